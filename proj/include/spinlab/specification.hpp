#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spinlab/enumerate.hpp"

namespace spinlab {

// One finite-volume kernel: a probability table on the volume for every
// conditioning configuration, read only through the dependence set.
struct KernelRecipe {
  virtual ~KernelRecipe() = default;

  virtual Region volume() const = 0;
  // exterior sites the row actually depends on; disjoint from the volume
  virtual Region dependenceSet() const = 0;
  virtual FiniteMeasure row(const TailedConfiguration& omega) const = 0;
  virtual std::string describe() const = 0;
};

using KernelPtr = std::shared_ptr<const KernelRecipe>;

FiniteMeasure gibbsKernel(const Interaction& phi, const Region& volume,
                          const TailedConfiguration& boundary);
KernelPtr gibbsKernelRecipe(const Interaction& phi, Region volume);

// all rows of a kernel, indexed by the configuration of the dependence set
struct KernelTable {
  Region volume;
  Region dependenceSet;
  std::vector<FiniteMeasure> rows;
  std::string label;

  const FiniteMeasure& rowFor(const TailedConfiguration& omega) const;
};

KernelTable tabulate(const KernelRecipe& k, int maxBoundaryBits = 20);

// |gamma(B|omega) - 1_B(omega)| accumulated termwise, so a proper kernel gives
// exactly 0.0. B must be a 0/1 table supported off the volume.
double propernessCheck(const KernelRecipe& k, const LocalFunction& b,
                       const TailedConfiguration& omega);

// total variation between outer(.|boundary) and the composition outer then inner
double consistencyCheck(const KernelRecipe& outer, const KernelRecipe& inner,
                        const TailedConfiguration& boundary,
                        std::uint64_t maxComposite = std::uint64_t{1} << 24);

// total variation between mu and mu k on the window of mu
double dlrResidual(const FiniteMeasure& mu, const KernelRecipe& k,
                   std::uint64_t maxComposite = std::uint64_t{1} << 24);

// geometry-free kernel: state and boundary are bit words under the product order
struct SlotKernel {
  int stateBits = 0;
  int boundaryBits = 0;
  std::vector<Eigen::VectorXd> rows;  // rows[boundaryIndex][stateIndex]
};

struct MonotonicityReport {
  bool preserving = true;
  // true when every increasing event was enumerated, false on the catalogue route
  bool exhaustive = true;
  int lowerBoundary = -1;
  int upperBoundary = -1;
  std::uint64_t eventMask = 0;  // violating up-set as a mask over state configurations
  std::string eventLabel;
  double lowerValue = 0;
  double upperValue = 0;
};

// Domination of every comparable boundary pair on every increasing event.
// Up-sets are enumerated exhaustively for stateBits <= 6; beyond that a fixed
// catalogue of increasing observables is scanned and `exhaustive` is false.
MonotonicityReport checkMonotonicity(const SlotKernel& k, double tol = 1e-12);
MonotonicityReport monotonicityCheck(const KernelTable& table, double tol = 1e-12);

// omega inside s, the tail fill outside
TailedConfiguration freezeBeyond(const TailedConfiguration& omega, const Region& s,
                                 const Tail& fill);

struct DirectionalRow {
  FiniteMeasure row;
  // the dependence set sits inside s, so growing s further cannot change the row
  bool stabilized = false;
};

// row of k at omega frozen on s and filled with all-plus (sign>0) or all-minus beyond
DirectionalRow directionalLimitKernel(const KernelRecipe& k, const TailedConfiguration& omega,
                                      int sign, const Region& s);

}  // namespace spinlab
