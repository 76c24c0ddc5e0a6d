#include <spinlab/quasilocality.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace spinlab {

namespace {

int readRadius(const Region& r) {
  int rad = 0;
  const Region sites = r;
  for (const Site& s : sites.sites()) rad = std::max(rad, chebyshevNorm(s));
  return rad;
}

class LocalFn final : public ConfigFunction {
public:
  explicit LocalFn(LocalFunction f) : f_(std::move(f)) {}

  double operator()(const TailedConfiguration& eta) const override { return f_(eta); }
  int exteriorRange() const override { return readRadius(f_.support()); }
  std::optional<Region> dependenceSet() const override { return f_.support(); }
  std::string describe() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "local function on %zu sites", f_.support().size());
    return buf;
  }

private:
  LocalFunction f_;
};

class KernelFn final : public ConfigFunction {
public:
  KernelFn(KernelPtr gamma, LocalFunction f) : gamma_(std::move(gamma)), f_(std::move(f)) {
    const Region volume = gamma_->volume();
    const Region support = f_.support();
    for (const Site& s : support.sites())
      if (!volume.contains(s)) throw ContractError("observable leaves the kernel volume");
  }

  double operator()(const TailedConfiguration& eta) const override {
    return gamma_->row(eta).expectation(f_);
  }
  int exteriorRange() const override { return readRadius(gamma_->dependenceSet()); }
  std::optional<Region> dependenceSet() const override { return gamma_->dependenceSet(); }
  std::string describe() const override { return "row expectation under " + gamma_->describe(); }

private:
  KernelPtr gamma_;
  LocalFunction f_;
};

class LadderFn final : public ConfigFunction {
public:
  LadderFn(TailFamily family, int nMax, int mMax) : family_(family), nMax_(nMax), mMax_(mMax) {
    if (nMax < 0 || mMax < 1) throw ContractError("ladder needs nMax >= 0 and mMax >= 1");
  }

  double operator()(const TailedConfiguration& eta) const override {
    return counterexampleF(eta, family_, nMax_, mMax_);
  }
  std::string describe() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "tail-match ladder (nMax=%d, mMax=%d)", nMax_, mMax_);
    return buf;
  }

private:
  TailFamily family_;
  int nMax_;
  int mMax_;
};

}  // namespace

ConfigFunctionPtr localConfigFunction(LocalFunction f) {
  return std::make_shared<LocalFn>(std::move(f));
}

ConfigFunctionPtr kernelExpectationFunction(KernelPtr gamma, LocalFunction f) {
  if (!gamma) throw ContractError("kernel expectation needs a kernel");
  return std::make_shared<KernelFn>(std::move(gamma), std::move(f));
}

TailedConfiguration TailFamily::base() const { return TailedConfiguration::uniform(1, 1); }

Tail TailFamily::chi(int m) const {
  if (m < 1) throw ContractError("family index starts at 1");
  const int p = m + 2;
  std::vector<int8_t> pattern(static_cast<std::size_t>(p), 1);
  pattern[0] = -1;
  return Tail::periodic({p, 1}, std::move(pattern));
}

bool TailFamily::pairwiseDistinct(int mLimit, int nLimit) const {
  for (int m = 1; m <= mLimit; ++m) {
    for (int mp = m + 1; mp <= mLimit; ++mp) {
      const int p = m + 2, q = mp + 2;
      bool found = false;
      for (int x = nLimit + 1; x <= nLimit + p * q; ++x) {
        if ((x % p == 0) != (x % q == 0)) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

namespace {

int modFloor(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

// first x > from with x congruent to one of the flagged residues, INT_MAX if none
int firstFlagged(int from, const std::vector<char>& flagged, bool negativeSide) {
  const int q = static_cast<int>(flagged.size());
  int best = std::numeric_limits<int>::max();
  for (int r = 0; r < q; ++r) {
    if (!flagged[r]) continue;
    const int target = negativeSide ? modFloor(q - r, q) : r;
    best = std::min(best, from + 1 + modFloor(target - (from + 1), q));
  }
  return best;
}

}  // namespace

double counterexampleF(const TailedConfiguration& eta, const TailFamily& family, int nMax,
                       int mMax) {
  if (eta.dim() != 1) throw ContractError("ladder matching is one-dimensional");
  if (nMax < 0 || mMax < 1) throw ContractError("ladder needs nMax >= 0 and mMax >= 1");

  const Tail& tail = eta.tail();
  int q = 1;  // tail period along the axis
  std::vector<char> minusAt(1, 0);
  switch (tail.kind) {
    case TailKind::AllPlus:
      break;
    case TailKind::AllMinus:
      minusAt[0] = 1;
      break;
    case TailKind::Periodic:
      q = tail.period[0];
      minusAt.assign(q, 0);
      for (int r = 0; r < q; ++r) minusAt[r] = tail.pattern[r] == -1;
      break;
    case TailKind::Named:
      throw ContractError("tail not decodable for ladder matching");
  }

  if (eta.spin(site(0)) != 1) return 0;
  // largest all-plus radius, capped at the truncation order
  int plusRadius = 0;
  while (plusRadius < nMax && eta.spin(site(plusRadius + 1)) == 1 &&
         eta.spin(site(-(plusRadius + 1))) == 1)
    ++plusRadius;

  int windowExtent = 0;
  {
    const Region& w = eta.window();
    for (const Site& s : w.sites()) windowExtent = std::max(windowExtent, chebyshevNorm(s));
  }
  const int edge = std::max(windowExtent, plusRadius);  // beyond here eta is pure tail

  // first non-plus site above plusRadius on each side; window part by direct
  // scan, tail part from the residue table
  int posFirst = std::numeric_limits<int>::max();
  int negFirst = posFirst;
  for (int x = plusRadius + 1; x <= edge && posFirst == std::numeric_limits<int>::max(); ++x)
    if (eta.spin(site(x)) != 1) posFirst = x;
  for (int x = plusRadius + 1; x <= edge && negFirst == std::numeric_limits<int>::max(); ++x)
    if (eta.spin(site(-x)) != 1) negFirst = x;
  posFirst = std::min(posFirst, firstFlagged(edge, minusAt, false));
  negFirst = std::min(negFirst, firstFlagged(edge, minusAt, true));

  // a family member is minus at symmetric multiples of its period
  if (posFirst != negFirst || posFirst == std::numeric_limits<int>::max()) return 0;
  const int x0 = posFirst;

  int matched = 0;
  for (int d = 1; d * d <= x0; ++d) {
    if (x0 % d != 0) continue;
    for (const int p : {d, x0 / d}) {
      // previous multiple must sit inside the plus window, the index in range
      if (p < 3 || p - 2 > mMax || x0 - p > plusRadius) continue;
      const Tail member = family.chi(p - 2);
      const int mp = member.period[0];
      bool ok = true;
      for (int x = plusRadius + 1; x <= edge && ok; ++x) {
        if (eta.spin(site(x)) != member.spin(site(x)) ||
            eta.spin(site(-x)) != member.spin(site(-x)))
          ok = false;
      }
      // beyond the edge both sides are periodic: residue classes must agree
      if (ok && q % mp != 0) ok = false;
      for (int r = 0; r < q && ok; ++r)
        if ((minusAt[r] != 0) != (member.pattern[r % mp] == -1)) ok = false;
      if (!ok) continue;
      if (matched != 0 && matched != p - 2)
        throw ContractError("ambiguous tail match in the ladder family");
      matched = p - 2;
    }
  }
  if (matched == 0) return 0;
  return static_cast<double>(matched) / (plusRadius + matched);
}

ConfigFunctionPtr counterexampleFunction(TailFamily family, int nMax, int mMax) {
  return std::make_shared<LadderFn>(family, nMax, mMax);
}

TailedConfiguration spliceAt(const TailedConfiguration& omega, int radius, const Tail& tail) {
  const Region window = Region::cube(omega.dim(), radius);
  std::vector<int8_t> values;
  values.reserve(window.size());
  const Region sites = window;
  for (const Site& s : sites.sites()) values.push_back(static_cast<int8_t>(omega.spin(s)));
  return TailedConfiguration(window, std::move(values), tail);
}

VariationReport variationAt(const ConfigFunction& f, const TailedConfiguration& omega, int n,
                            int mMax) {
  if (n < 0) throw ContractError("window radius must be >= 0");
  if (mMax < 1) throw ContractError("probe family needs mMax >= 1");
  const TailFamily family;
  std::vector<Tail> probes{Tail::allPlus(), Tail::allMinus(), Tail::alternating(omega.dim())};
  // dense low indices, then doubling; the extremes pin the spread, so the
  // grid always carries mMax itself
  for (int m = 1; m <= std::min(mMax, 48); ++m) probes.push_back(family.chi(m));
  for (int m = 64; m < mMax; m *= 2) probes.push_back(family.chi(m));
  if (mMax > 48) probes.push_back(family.chi(mMax));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Tail& t : probes) {
    const double v = f(spliceAt(omega, n, t));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const int range = f.exteriorRange();
  VariationReport report;
  report.value = hi - lo;
  report.exact = range >= 0 && n >= range;
  report.probes = static_cast<int>(probes.size());
  return report;
}

DirectionalReport directionalDelta(const ConfigFunction& f, const TailedConfiguration& omega,
                                   const Tail& theta, int m, int mRef) {
  if (m < 0 || m >= mRef) throw ContractError("splice radii need 0 <= m < mRef");
  DirectionalReport report;
  report.atM = f(spliceAt(omega, m, theta));
  report.atRef = f(spliceAt(omega, mRef, theta));
  report.value = std::abs(report.atM - report.atRef);
  return report;
}

DirectionalReport directionalDelta(const KernelPtr& gamma, const LocalFunction& f,
                                   const TailedConfiguration& omega, const Tail& theta, int m,
                                   int mRef) {
  return directionalDelta(*kernelExpectationFunction(gamma, f), omega, theta, m, mRef);
}

BadSetPoint badSetProbability(const MeasureRecipe& mu, const ConfigFunction& f, const Tail& theta,
                              double epsilon, int m, int mRef, std::uint64_t budget) {
  if (epsilon <= 0) throw ContractError("bad-set threshold must be positive");
  if (m < 0 || m >= mRef) throw ContractError("splice radii need 0 <= m < mRef");

  BadSetPoint point;
  point.m = m;
  const int range = f.exteriorRange();
  if (range >= 0 && m >= range) return point;  // both splices agree on every read

  Region reads;
  if (auto dep = f.dependenceSet()) {
    std::vector<Site> kept;
    const Region depSites = *dep;
    for (const Site& s : depSites.sites())
      if (chebyshevNorm(s) <= mRef) kept.push_back(s);
    reads = Region::ofSites(mu.dim(), std::move(kept));
  } else {
    reads = Region::cube(mu.dim(), mRef);
  }

  if (reads.size() >= 63 || (std::uint64_t{1} << reads.size()) > budget)
    throw EngineError("bad-set enumeration budget exhausted");

  const FiniteMeasure marg = mu.marginal(reads);
  const std::uint64_t nConfigs = marg.size();
  std::vector<int8_t> values(reads.size());
  for (std::uint64_t idx = 0; idx < nConfigs; ++idx) {
    const double pr = marg.prob(idx);
    if (pr == 0) continue;
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = (idx >> i & 1u) ? int8_t{1} : int8_t{-1};
    // unread sites fall back to theta; f reads only its dependence set
    const TailedConfiguration eta(reads, values, theta);
    const double delta =
        std::abs(f(spliceAt(eta, m, theta)) - f(spliceAt(eta, mRef, theta)));
    if (delta > epsilon) point.probability += pr;
    ++point.evaluated;
  }
  return point;
}

BadSetRecord badSetRecord(const MeasureRecipe& mu, const ConfigFunction& f, const Tail& theta,
                          double epsilon, const std::vector<int>& ms, int mRef,
                          std::uint64_t budget) {
  if (ms.empty()) throw ContractError("bad-set record needs at least one splice radius");
  for (std::size_t i = 1; i < ms.size(); ++i)
    if (ms[i] <= ms[i - 1]) throw ContractError("splice radii must be strictly increasing");

  BadSetRecord record;
  record.theta = theta;
  record.functionLabel = f.describe();
  record.epsilon = epsilon;
  record.mRef = mRef;
  for (int m : ms) record.points.push_back(badSetProbability(mu, f, theta, epsilon, m, mRef, budget));
  return record;
}

RateSeries continuityRate(const BadSetRecord& record, const std::vector<double>& alpha) {
  if (record.points.empty()) throw ContractError("continuity rate needs a nonempty record");
  if (alpha.size() != record.points.size())
    throw ContractError("normalizer series length != record length");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= 0) throw ContractError("normalizers must be positive");
    if (i > 0 && alpha[i] <= alpha[i - 1])
      throw ContractError("normalizers must be strictly increasing");
  }

  RateSeries series;
  series.alpha = alpha;
  for (std::size_t i = 0; i < record.points.size(); ++i) {
    series.m.push_back(record.points[i].m);
    const double p = record.points[i].probability;
    series.entries.push_back(p > 0 ? std::log(p) / alpha[i]
                                   : -std::numeric_limits<double>::infinity());
  }
  double tailMax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = series.entries.size() / 2; i < series.entries.size(); ++i)
    tailMax = std::max(tailMax, series.entries[i]);
  series.limsupEstimate = tailMax;
  return series;
}

std::vector<double> prop1Bound(const std::vector<double>& h, const std::vector<double>& alpha,
                               double c, double delta) {
  if (!(delta > 0 && delta < c)) throw ContractError("need 0 < delta < c");
  if (h.size() != alpha.size()) throw ContractError("entropy and normalizer series differ in length");
  std::vector<double> values;
  values.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (alpha[i] <= 0) throw ContractError("normalizers must be positive");
    if (h[i] < 0) throw ContractError("relative entropies are nonnegative");
    values.push_back(std::exp(alpha[i] * (delta - c)) / (alpha[i] * delta) +
                     h[i] / (alpha[i] * delta));
  }
  return values;
}

}  // namespace spinlab
