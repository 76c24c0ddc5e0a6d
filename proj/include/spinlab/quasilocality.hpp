#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spinlab/lattice.hpp>
#include <spinlab/measure.hpp>
#include <spinlab/recipes.hpp>
#include <spinlab/specification.hpp>

namespace spinlab {

// A real-valued function of a full configuration (window + tail).
class ConfigFunction {
public:
  virtual ~ConfigFunction() = default;

  virtual double operator()(const TailedConfiguration& eta) const = 0;
  // r >= 0: the value is determined by spins on cube(r); -1: unbounded reads
  virtual int exteriorRange() const { return -1; }
  // exact set of sites the function may read, when known
  virtual std::optional<Region> dependenceSet() const { return std::nullopt; }
  virtual std::string describe() const = 0;
};

using ConfigFunctionPtr = std::shared_ptr<const ConfigFunction>;

ConfigFunctionPtr localConfigFunction(LocalFunction f);
// eta -> row(eta)-expectation of f; f must live inside the kernel volume
ConfigFunctionPtr kernelExpectationFunction(KernelPtr gamma, LocalFunction f);

// Tails chi(m): spin -1 at site 0 and at every nonzero multiple of m+2
// (in the first coordinate), +1 elsewhere.  Distinct periods force any two
// members to disagree arbitrarily far out.
struct TailFamily {
  TailedConfiguration base() const;  // all-plus, d = 1
  Tail chi(int m) const;             // m >= 1
  // certifies chi(m) != chi(m') at some site beyond every cube(n), n <= nLimit
  bool pairwiseDistinct(int mLimit, int nLimit) const;
};

// Ladder value m/(n+m) when eta is all-plus on cube(n) and equals chi(m)
// beyond, with n the largest such radius, capped at nMax; 0 when no member
// matches.  Requires a decodable tail (uniform or periodic).
double counterexampleF(const TailedConfiguration& eta, const TailFamily& family, int nMax, int mMax);
ConfigFunctionPtr counterexampleFunction(TailFamily family, int nMax, int mMax);

// copy of omega's spins on cube(radius), tail beyond
TailedConfiguration spliceAt(const TailedConfiguration& omega, int radius, const Tail& tail);

struct VariationReport {
  double value = 0;
  bool exact = false;  // true only when every probe pair is provably unread
  int probes = 0;
};

// Spread of F over configurations agreeing with omega on cube(n), probed by
// the declared tail set (uniform fills, alternating, chi(1..mMax)).  A lower
// bound on the oscillation unless the exterior dependence is finite-range.
VariationReport variationAt(const ConfigFunction& f, const TailedConfiguration& omega, int n,
                            int mMax = 20);

struct DirectionalReport {
  double value = 0;  // |atM - atRef|
  double atM = 0;
  double atRef = 0;
  // the infinite-splice limit is approximated by the mRef splice
  bool referenceSubstituted = true;
};

// Discrepancy between F at omega spliced with theta beyond cube(m) and the
// same splice at radius mRef; requires m < mRef.
DirectionalReport directionalDelta(const ConfigFunction& f, const TailedConfiguration& omega,
                                   const Tail& theta, int m, int mRef);
DirectionalReport directionalDelta(const KernelPtr& gamma, const LocalFunction& f,
                                   const TailedConfiguration& omega, const Tail& theta, int m,
                                   int mRef);

struct BadSetPoint {
  int m = 0;
  double probability = 0;
  double error = 0;  // 0 on the exact route
  std::uint64_t evaluated = 0;
  bool exact = true;
};

struct BadSetRecord {
  Tail theta;
  std::string functionLabel;
  double epsilon = 0;
  int mRef = 0;
  std::vector<BadSetPoint> points;  // m strictly increasing
};

// mu-probability that the directional discrepancy at splice radius m exceeds
// epsilon.  Exact enumeration over the read set intersected with cube(mRef);
// throws EngineError when that set exceeds the budget.
BadSetPoint badSetProbability(const MeasureRecipe& mu, const ConfigFunction& f, const Tail& theta,
                              double epsilon, int m, int mRef, std::uint64_t budget = 1u << 18);
BadSetRecord badSetRecord(const MeasureRecipe& mu, const ConfigFunction& f, const Tail& theta,
                          double epsilon, const std::vector<int>& ms, int mRef,
                          std::uint64_t budget = 1u << 18);

struct RateSeries {
  std::vector<int> m;
  std::vector<double> alpha;
  std::vector<double> entries;  // log(probability)/alpha, -inf kept visible
  // max over the later half of the entries; an estimate, never a verdict
  double limsupEstimate = 0;
};

RateSeries continuityRate(const BadSetRecord& record, const std::vector<double>& alpha);

// per-m values of exp(alpha*(delta-c))/(alpha*delta) + h/(alpha*delta)
std::vector<double> prop1Bound(const std::vector<double>& h, const std::vector<double>& alpha,
                               double c, double delta);

}  // namespace spinlab
