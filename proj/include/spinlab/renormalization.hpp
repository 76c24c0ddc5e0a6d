#pragma once

#include <string>
#include <vector>

#include "spinlab/mc.hpp"
#include "spinlab/specification.hpp"

namespace spinlab {

// Single-site block transformations: each image spin is produced from the spins
// of one source block, independently across image sites.
struct Transformation {
  enum class Kind { Decimation, Projection, Kadanoff, Majority, NoisyDecimation, NoisyProjection };

  Kind kind = Kind::Decimation;
  int dim = 1;      // source dimension
  int spacing = 2;  // site spacing for decimation kinds, block side for kadanoff/majority
  double p = 0;     // noise strength of the stochastic kinds

  static Transformation decimation(int dim, int b);
  // image site x reads the source layer site (x, 0); source must be 2-D
  static Transformation layerProjection();
  static Transformation kadanoff(int dim, int blockSide, double p);
  static Transformation majority(int dim, int blockSide);
  static Transformation noisyDecimation(int dim, int b, double p);
  static Transformation noisyLayerProjection(double p);

  int imageDim() const;
  bool deterministic() const;
  Region blockFor(const Site& imageSite) const;
  Region sourceSitesFor(const Region& image) const;
  // image sites whose block intersects the source region
  Region imageSitesTouching(const Region& source) const;
  // nominal radius compression of the preimage map; 0 when no constant exists
  double alpha() const;
  std::string describe() const;
};

// P(image spin = imageSpin | block sum = blockSum): the two-state normalization
// exp(p w s)/(2 cosh(p s)) for the stochastic kinds, a 0/1 indicator for the
// deterministic ones, ties split evenly for majority.
double singleSiteKernelProb(Transformation::Kind kind, double p, int blockSum, int imageSpin);

FiniteMeasure pushforward(const FiniteMeasure& mu, const Transformation& t, const Region& image);
// image = every site whose block lies inside mu's window
FiniteMeasure pushforward(const FiniteMeasure& mu, const Transformation& t);

struct BlockSpinReport {
  bool strictLocality = false;
  double alphaEstimate = 0;  // max source/image probe radius ratio
  bool factorization = true;
  double factorizationResidual = 0;
  std::string witness;
};

// probes are image regions; factorization is checked on probe pairs with
// disjoint source blocks over every enumerated source configuration
BlockSpinReport blockSpinCheck(const Transformation& t, const std::vector<Region>& probes);

// joint law on (source volume, image volume) given a boundary pair; index is
// sourceIdx | imageIdx << |source|
struct JointRow {
  Region source;
  Region image;
  Eigen::VectorXd p;
};

// Image-site factors enter for x in the image volume and for every x whose
// block meets the source volume; the row is renormalized afterwards.
JointRow jointKernel(const KernelRecipe& gamma, const Transformation& t, const Region& imageVolume,
                     const TailedConfiguration& sourceBoundary,
                     const TailedConfiguration& imageBoundary, int maxBits = 24);

struct JointKernelTable {
  Region sourceVolume;
  Region imageVolume;
  Region sourceDep;
  Region imageDep;
  // index = sourceBoundaryIdx | imageBoundaryIdx << |sourceDep|
  std::vector<JointRow> rows;
};

JointKernelTable jointKernelTable(const KernelRecipe& gamma, const Transformation& t,
                                  const Region& imageVolume, int maxStateBits = 16,
                                  int maxBoundaryBits = 12);
// product order on (source, image) states and boundaries
SlotKernel toSlotKernel(const JointKernelTable& table);

// Conditional expectation of fImage under the image law of the source model,
// given the spins of `condition`'s window plus a fill pinned beyond it.
struct RenormScenario {
  Interaction phi;  // source model
  Transformation t;
  Region imageVolume;             // where fImage lives
  LocalFunction fImage;
  TailedConfiguration condition;  // window = conditioned image sites, tail = fill
  // sites pinned from the tail; empty = cube of fillDepth beyond the window
  Region fillRegion;
  int fillDepth = 4;
  int stripWidth = 3;    // minimum source rows for the 2-D route
  // auto | chain | emission | strip | enumerate | mc
  std::string engine = "auto";
  McSchedule mc;
};

struct ConditionalEstimate {
  double value = 0;
  // fill-depth sensitivity for the pinned-fill routes, standard error for mc
  double error = 0;
  bool exact = false;
  std::string method;
};

ConditionalEstimate renormalizedConditional(const RenormScenario& s);

// Image-law conditional kernel built from a scenario: rows over the image
// volume, conditioning spins read from the row argument at the scenario's
// window sites, fill fixed by the scenario.  The scenario's fImage is unused;
// rows integrate indicators of each volume configuration.
KernelPtr renormKernelRecipe(RenormScenario base);

}  // namespace spinlab
