#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <spinlab/lattice.hpp>
#include <spinlab/measure.hpp>
#include <spinlab/recipes.hpp>
#include <spinlab/specification.hpp>

namespace spinlab {

// sum of mu log(mu/nu) with 0 log 0 = 0; +inf when mu charges a nu-null config
double relativeEntropy(const FiniteMeasure& mu, const FiniteMeasure& nu);

struct EntropySeries {
  std::vector<int> n;
  std::vector<double> h;  // window relative entropy, may be +inf
  std::vector<double> perSite;
  std::vector<double> increment;  // difference per added site
  double lastPerSite = 0;
  double lastIncrement = 0;
  std::string method;
};

// windows are centered cubes of radius 0..nMax
EntropySeries entropyDensitySeries(const MeasureRecipe& mu, const MeasureRecipe& nu, int nMax);

struct PressureSeries {
  std::vector<int> n;
  std::vector<double> value;  // (1/|window|) log nu[exp(sum of translates of f)]
  double extrapolated = 0;
  std::string method;
};

PressureSeries pressureEstimate(const LocalFunction& f, const MeasureRecipe& nu, int nMax);

// [H_delta - H_deltaPrime] - (1/2) (integral |g_delta - g_deltaPrime| dnu)^2,
// nonnegative up to roundoff
double csiszarGap(const MeasureRecipe& mu, const MeasureRecipe& nu, const Region& delta,
                  const Region& deltaPrime);

struct Cylinder {
  Region region;
  std::uint64_t values = 0;  // spins on the region in canonical bit order
};

struct DecouplingReport {
  double constant = 0;
  int evaluated = 0;
  int skipped = 0;  // pairs dropped for a zero-probability event
};

// max |log nu(A and B) / (nu(A) nu(B))| over the family, where each A lives in
// the radius-n cube and each B outside the radius-(n+gap) cube; a lower bound
// for the true decoupling constant
DecouplingReport decouplingConstant(const MeasureRecipe& nu, int n, int gap,
                                    const std::vector<std::pair<Cylinder, Cylinder>>& family);

// both spins at every site of the inner cube, paired with both spins at the
// axis sites just outside the guarded cube
std::vector<std::pair<Cylinder, Cylinder>> singleSiteCylinderFamily(int dim, int n, int gap);

enum class TrialFamily { Markov1, ProductOnly };

struct LegendreReport {
  double pressure = 0;
  double bestValue = 0;  // max over trials of mu(f) - h(mu|nu)
  double gap = 0;
  bool familyLimited = false;
  double bestA = 0;  // persistence parameters of the best trial
  double bestB = 0;
  std::string certificate;
};

LegendreReport legendreGap(const LocalFunction& f, const MeasureRecipe& nu, TrialFamily family,
                           int nMax);

struct CmBreakdown {
  double cM = 0;
  double aM = 0;
  double bM = 0;
  double muGammaF = 0;  // mu(gamma f), gamma truncated at mRef
  double muF = 0;
  std::string flags;
};

// C_M = nu[g_ann (gamma^{M,theta} f - gamma f)] with companions
// A_M = mu[gamma f - gamma^{M,theta} f] and B_M = nu[(g_ann - g_full) f];
// gamma stands for its mRef truncation throughout, flagged in the output.
// A_M + B_M + C_M telescopes to mu(gamma f) - mu(f) when nu is consistent
// with gamma and the truncation has stabilized.
CmBreakdown cmTerm(const MeasureRecipe& mu, const MeasureRecipe& nu, const KernelRecipe& gamma,
                   const Region& lambda, int M, const Tail& theta, const LocalFunction& f,
                   int mRef);

}  // namespace spinlab
