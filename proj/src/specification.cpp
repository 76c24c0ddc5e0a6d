#include "spinlab/specification.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace spinlab {

namespace {

class GibbsKernel final : public KernelRecipe {
public:
  GibbsKernel(Interaction phi, Region vol)
      : phi_(phi), vol_(std::move(vol)), dep_(exteriorBoundary(vol_)) {}

  Region volume() const override { return vol_; }
  Region dependenceSet() const override { return dep_; }

  FiniteMeasure row(const TailedConfiguration& omega) const override {
    return enumerateMeasure(SpinSystem{phi_, vol_, omega, {}, false});
  }

  std::string describe() const override {
    std::ostringstream ss;
    ss << "gibbs J=" << phi_.j << " h=" << phi_.h << " beta=" << phi_.beta
       << " |volume|=" << vol_.size();
    return ss.str();
  }

private:
  Interaction phi_;
  Region vol_;
  Region dep_;
};

}  // namespace

FiniteMeasure gibbsKernel(const Interaction& phi, const Region& volume,
                          const TailedConfiguration& boundary) {
  return enumerateMeasure(SpinSystem{phi, volume, boundary, {}, false});
}

KernelPtr gibbsKernelRecipe(const Interaction& phi, Region volume) {
  return std::make_shared<GibbsKernel>(phi, std::move(volume));
}

const FiniteMeasure& KernelTable::rowFor(const TailedConfiguration& omega) const {
  return rows[omega.windowIndex(dependenceSet)];
}

KernelTable tabulate(const KernelRecipe& k, int maxBoundaryBits) {
  const Region dep = k.dependenceSet();
  if (static_cast<int>(dep.size()) > maxBoundaryBits)
    throw EngineError("tabulate: dependence set above the row cap");
  KernelTable out;
  out.volume = k.volume();
  out.dependenceSet = dep;
  out.label = k.describe();
  const std::uint64_t nRows = std::uint64_t{1} << dep.size();
  out.rows.reserve(nRows);
  for (std::uint64_t b = 0; b < nRows; ++b)
    out.rows.push_back(k.row(fromIndex(dep, b, Tail::allPlus())));
  return out;
}

double propernessCheck(const KernelRecipe& k, const LocalFunction& b,
                       const TailedConfiguration& omega) {
  const Region vol = k.volume();
  if (!disjoint(b.support(), vol))
    throw ContractError("propernessCheck: event reads interior sites");
  for (double v : b.table())
    if (v != 0 && v != 1) throw ContractError("propernessCheck: event is not an indicator");

  const FiniteMeasure r = k.row(omega);
  const double ref = b(omega);
  const Region w = regionUnion(vol, b.support());
  // spins off the volume stay omega's, so each term is exactly zero for a proper kernel
  double acc = 0;
  for (std::uint64_t idx = 0; idx < r.size(); ++idx) {
    std::vector<int8_t> vals(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Site& s = w.siteAt(i);
      if (const auto inVol = vol.indexOf(s))
        vals[i] = static_cast<int8_t>(spinOfBit(idx, *inVol));
      else
        vals[i] = static_cast<int8_t>(omega.spin(s));
    }
    acc += r.prob(idx) * (b(TailedConfiguration(w, std::move(vals), omega.tail())) - ref);
  }
  return std::abs(acc);
}

namespace {

// mu k on mu's window; dependence sites outside the window read from `outside`
FiniteMeasure composeKernel(const FiniteMeasure& mu, const KernelRecipe& k,
                            const TailedConfiguration* outside, std::uint64_t maxComposite) {
  const Region w = mu.support();
  const Region lam = k.volume();
  const Region dep = k.dependenceSet();
  const std::vector<int> embLam = embedding(lam, w);
  const std::uint64_t nLam = std::uint64_t{1} << lam.size();
  if (mu.size() > maxComposite / nLam)
    throw EngineError("kernel composition above the composite-state cap");

  struct DepSlot {
    int windowBit = -1;
    int fixedSpin = 0;
  };
  std::vector<DepSlot> depSlots(dep.size());
  for (std::size_t i = 0; i < dep.size(); ++i) {
    const Site& s = dep.siteAt(i);
    if (const auto inW = w.indexOf(s)) {
      depSlots[i].windowBit = *inW;
    } else {
      if (!outside) throw ContractError("kernel reads spins outside the window");
      depSlots[i].fixedSpin = outside->spin(s);
    }
  }

  std::uint64_t lamMask = 0;
  for (int bit : embLam) lamMask |= std::uint64_t{1} << bit;

  std::unordered_map<std::uint64_t, FiniteMeasure> rowCache;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mu.size()));
  for (std::uint64_t c = 0; c < mu.size(); ++c) {
    const double p = mu.prob(c);
    if (p == 0) continue;
    std::uint64_t depIdx = 0;
    for (std::size_t i = 0; i < depSlots.size(); ++i) {
      const auto& slot = depSlots[i];
      const int spin = slot.windowBit >= 0 ? spinOfBit(c, slot.windowBit) : slot.fixedSpin;
      if (spin > 0) depIdx |= std::uint64_t{1} << i;
    }
    auto it = rowCache.find(depIdx);
    if (it == rowCache.end())
      it = rowCache.emplace(depIdx, k.row(fromIndex(dep, depIdx, Tail::allPlus()))).first;
    const FiniteMeasure& r = it->second;
    const std::uint64_t base = c & ~lamMask;
    for (std::uint64_t sig = 0; sig < nLam; ++sig) {
      std::uint64_t target = base;
      for (std::size_t j = 0; j < embLam.size(); ++j)
        if ((sig >> j) & 1u) target |= std::uint64_t{1} << embLam[j];
      out[static_cast<Eigen::Index>(target)] += p * r.prob(sig);
    }
  }
  return FiniteMeasure(w, out);
}

}  // namespace

double consistencyCheck(const KernelRecipe& outer, const KernelRecipe& inner,
                        const TailedConfiguration& boundary, std::uint64_t maxComposite) {
  if (!isSubset(inner.volume(), outer.volume()))
    throw ContractError("consistencyCheck: inner volume not inside the outer one");
  const FiniteMeasure lhs = outer.row(boundary);
  return totalVariation(lhs, composeKernel(lhs, inner, &boundary, maxComposite));
}

double dlrResidual(const FiniteMeasure& mu, const KernelRecipe& k, std::uint64_t maxComposite) {
  if (!isSubset(k.volume(), mu.support()))
    throw ContractError("dlrResidual: volume not inside the window");
  if (!isSubset(k.dependenceSet(), regionMinus(mu.support(), k.volume())))
    throw ContractError("dlrResidual: kernel reads spins outside the window");
  return totalVariation(mu, composeKernel(mu, k, nullptr, maxComposite));
}

namespace {

std::vector<std::pair<int, int>> comparablePairs(int bits) {
  std::vector<std::pair<int, int>> out;
  const int n = 1 << bits;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && (a & b) == a) out.emplace_back(a, b);  // a <= b sitewise
  return out;
}

struct UpsetScan {
  int nConfigs;
  const std::vector<Eigen::VectorXd>* rows;
  const std::vector<std::pair<int, int>>* pairs;
  double tol;
  std::vector<int> order;  // configs by decreasing popcount
  // fixed-point (x * 2^52) row differences; integer sums stay exact across the
  // millions of add/remove toggles of the walk, where doubles would drift
  std::vector<std::vector<long long>> diff;
  std::vector<long long> sums;
  long long threshold = 0;
  std::uint64_t included = 0;
  MonotonicityReport* report;

  bool run() {
    for (int i = 0; i < nConfigs; ++i) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [](int a, int b) {
      return std::popcount(static_cast<unsigned>(a)) > std::popcount(static_cast<unsigned>(b));
    });
    const double scale = 4503599627370496.0;  // 2^52
    threshold = std::llround(tol * scale);
    diff.assign(pairs->size(), std::vector<long long>(nConfigs));
    for (std::size_t p = 0; p < pairs->size(); ++p) {
      const auto& [lo, hi] = (*pairs)[p];
      for (int c = 0; c < nConfigs; ++c)
        diff[p][c] = std::llround(((*rows)[hi][c] - (*rows)[lo][c]) * scale);
    }
    sums.assign(pairs->size(), 0);
    return walk(0);
  }

  // decide configs upward-first so membership only needs the immediate supersets
  bool walk(std::size_t i) {
    if (i == order.size()) {
      for (std::size_t p = 0; p < pairs->size(); ++p) {
        if (sums[p] < -threshold && freshSum(p) < -tol) {
          fillWitness(p);
          return true;
        }
      }
      return false;
    }
    if (walk(i + 1)) return true;
    const int c = order[i];
    const int nBits = std::countr_zero(static_cast<unsigned>(nConfigs));
    for (int b = 0; b < nBits; ++b)
      if (!((c >> b) & 1) && !((included >> (c | (1 << b))) & 1u)) return false;
    included |= std::uint64_t{1} << c;
    for (std::size_t p = 0; p < pairs->size(); ++p) sums[p] += diff[p][c];
    const bool found = walk(i + 1);
    if (!found) {
      included &= ~(std::uint64_t{1} << c);
      for (std::size_t p = 0; p < pairs->size(); ++p) sums[p] -= diff[p][c];
    }
    return found;
  }

  double freshSum(std::size_t p) const {
    const auto& [lo, hi] = (*pairs)[p];
    double d = 0;
    for (int c = 0; c < nConfigs; ++c)
      if ((included >> c) & 1u) d += (*rows)[hi][c] - (*rows)[lo][c];
    return d;
  }

  void fillWitness(std::size_t p) {
    const auto& [lo, hi] = (*pairs)[p];
    report->preserving = false;
    report->lowerBoundary = lo;
    report->upperBoundary = hi;
    report->eventMask = included;
    double a = 0, b = 0;
    for (int c = 0; c < nConfigs; ++c) {
      if ((included >> c) & 1u) {
        a += (*rows)[lo][c];
        b += (*rows)[hi][c];
      }
    }
    report->lowerValue = a;
    report->upperValue = b;
    std::ostringstream ss;
    ss << "up-set of " << std::popcount(included) << " states, mask 0x" << std::hex << included;
    report->eventLabel = ss.str();
  }
};

}  // namespace

MonotonicityReport checkMonotonicity(const SlotKernel& k, double tol) {
  if (k.boundaryBits > 12) throw EngineError("monotonicity check above 2^12 boundary rows");
  if (k.stateBits > 20) throw EngineError("monotonicity check above 2^20 states");
  const std::uint64_t nRows = std::uint64_t{1} << k.boundaryBits;
  const int nConfigs = 1 << k.stateBits;
  if (k.rows.size() != nRows) throw ContractError("slot kernel row count mismatch");
  for (const auto& r : k.rows)
    if (r.size() != nConfigs) throw ContractError("slot kernel row length mismatch");

  const auto pairs = comparablePairs(k.boundaryBits);
  MonotonicityReport report;
  if (pairs.empty()) return report;

  // up-set counts over {0,1}^n for n = 0..6
  static constexpr double kUpsets[] = {2, 3, 6, 20, 168, 7581, 7828354};
  if (k.stateBits <= 6 &&
      static_cast<double>(pairs.size()) * kUpsets[k.stateBits] <= 4294967296.0) {
    UpsetScan scan{nConfigs, &k.rows, &pairs, tol, {}, {}, {}, 0, 0, &report};
    scan.run();
    return report;
  }

  // catalogue route: single spins, all-plus products on pairs and on the whole
  // volume, magnetization
  report.exhaustive = false;
  std::vector<std::pair<std::string, Eigen::VectorXd>> fns;
  const auto spin = [](int c, int i) { return ((c >> i) & 1) ? 1.0 : -1.0; };
  for (int i = 0; i < k.stateBits; ++i) {
    Eigen::VectorXd t(nConfigs);
    for (int c = 0; c < nConfigs; ++c) t[c] = spin(c, i);
    std::ostringstream ss;
    ss << "spin[" << i << "]";
    fns.emplace_back(ss.str(), std::move(t));
  }
  for (int i = 0; i < k.stateBits; ++i) {
    for (int j = i + 1; j < k.stateBits; ++j) {
      Eigen::VectorXd t(nConfigs);
      const int mask = (1 << i) | (1 << j);
      for (int c = 0; c < nConfigs; ++c) t[c] = (c & mask) == mask ? 1.0 : 0.0;
      std::ostringstream ss;
      ss << "allPlus[" << i << "," << j << "]";
      fns.emplace_back(ss.str(), std::move(t));
    }
  }
  {
    Eigen::VectorXd t(nConfigs);
    for (int c = 0; c < nConfigs; ++c) t[c] = c == nConfigs - 1 ? 1.0 : 0.0;
    fns.emplace_back("allPlus[volume]", std::move(t));
  }
  {
    Eigen::VectorXd t(nConfigs);
    for (int c = 0; c < nConfigs; ++c) {
      double m = 0;
      for (int i = 0; i < k.stateBits; ++i) m += spin(c, i);
      t[c] = m / k.stateBits;
    }
    fns.emplace_back("magnetization", std::move(t));
  }

  for (const auto& [label, t] : fns) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(nRows));
    for (std::uint64_t r = 0; r < nRows; ++r) e[static_cast<Eigen::Index>(r)] = k.rows[r].dot(t);
    for (const auto& [lo, hi] : pairs) {
      if (e[lo] > e[hi] + tol) {
        report.preserving = false;
        report.lowerBoundary = lo;
        report.upperBoundary = hi;
        report.eventLabel = label;
        report.lowerValue = e[lo];
        report.upperValue = e[hi];
        return report;
      }
    }
  }
  return report;
}

MonotonicityReport monotonicityCheck(const KernelTable& table, double tol) {
  SlotKernel slot;
  slot.stateBits = static_cast<int>(table.volume.size());
  slot.boundaryBits = static_cast<int>(table.dependenceSet.size());
  slot.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) slot.rows.push_back(r.probabilities());
  return checkMonotonicity(slot, tol);
}

TailedConfiguration freezeBeyond(const TailedConfiguration& omega, const Region& s,
                                 const Tail& fill) {
  std::vector<int8_t> vals(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    vals[i] = static_cast<int8_t>(omega.spin(s.siteAt(i)));
  return TailedConfiguration(s, std::move(vals), fill);
}

DirectionalRow directionalLimitKernel(const KernelRecipe& k, const TailedConfiguration& omega,
                                      int sign, const Region& s) {
  if (!isSubset(k.volume(), s))
    throw ContractError("directionalLimitKernel: s must contain the volume");
  const TailedConfiguration frozen =
      freezeBeyond(omega, s, sign > 0 ? Tail::allPlus() : Tail::allMinus());
  DirectionalRow out;
  out.stabilized = isSubset(k.dependenceSet(), s);
  out.row = k.row(frozen);
  return out;
}

}  // namespace spinlab
