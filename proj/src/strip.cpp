#include "spinlab/strip.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace spinlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validateStrip(const Strip& s) {
  if (s.width < 1) throw ContractError("strip width must be >= 1");
  if (s.x1 < s.x0) throw ContractError("strip needs x1 >= x0");
  if (s.width > 14) throw EngineError("strip width above 14");
  if (s.exterior && s.exterior->dim() != 2) throw ContractError("strip exterior must be 2-D");
}

}  // namespace

Strip Strip::withConstraint(const Site& s, int spin) const {
  Strip out = *this;
  out.constraints.emplace_back(s, static_cast<int8_t>(spin));
  return out;
}

Region Strip::region() const {
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(columns()) * static_cast<std::size_t>(width));
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y < y0 + width; ++y) sites.push_back(site(x, y));
  return Region::ofSites(2, sites);
}

double logPartition(const Strip& strip) {
  validateStrip(strip);
  const int w = strip.width;
  const std::uint64_t nStates = std::uint64_t{1} << w;
  const double bj = strip.phi.beta * strip.phi.j;
  const double bh = strip.phi.beta * strip.phi.h;

  // per-column masks and exterior field offsets
  const int nCols = strip.columns();
  std::vector<std::vector<double>> rowField(static_cast<std::size_t>(nCols),
                                            std::vector<double>(static_cast<std::size_t>(w), bh));
  std::vector<std::uint64_t> fixedMask(static_cast<std::size_t>(nCols), 0);
  std::vector<std::uint64_t> fixedValue(static_cast<std::size_t>(nCols), 0);

  if (strip.exterior) {
    const TailedConfiguration& ext = *strip.exterior;
    for (int ci = 0; ci < nCols; ++ci) {
      const int x = strip.x0 + ci;
      auto& f = rowField[static_cast<std::size_t>(ci)];
      f[0] += bj * ext.spin(site(x, strip.y0 - 1));
      f[static_cast<std::size_t>(w - 1)] += bj * ext.spin(site(x, strip.y0 + w));
      if (x == strip.x0)
        for (int i = 0; i < w; ++i)
          f[static_cast<std::size_t>(i)] += bj * ext.spin(site(strip.x0 - 1, strip.y0 + i));
      if (x == strip.x1)
        for (int i = 0; i < w; ++i)
          f[static_cast<std::size_t>(i)] += bj * ext.spin(site(strip.x1 + 1, strip.y0 + i));
    }
  }
  for (const auto& [s, v] : strip.constraints) {
    if (v != 1 && v != -1) throw ContractError("strip constraint spin must be +-1");
    const int ci = s[0] - strip.x0;
    const int ri = s[1] - strip.y0;
    if (ci < 0 || ci >= nCols || ri < 0 || ri >= w)
      throw ContractError("strip constraint outside the rectangle");
    const std::uint64_t bit = std::uint64_t{1} << ri;
    const std::uint64_t want = v == 1 ? bit : 0;
    auto& m = fixedMask[static_cast<std::size_t>(ci)];
    auto& val = fixedValue[static_cast<std::size_t>(ci)];
    if ((m & bit) && (val & bit) != want) return kNegInf;
    m |= bit;
    val = (val & ~bit) | want;
  }

  const auto colLogWeight = [&](int ci, std::uint64_t c) {
    double e = 0;
    for (int i = 0; i < w; ++i)
      e += rowField[static_cast<std::size_t>(ci)][static_cast<std::size_t>(i)] *
           spinOfBit(c, i);
    for (int i = 0; i + 1 < w; ++i) e += bj * spinOfBit(c, i) * spinOfBit(c, i + 1);
    return e;
  };

  Eigen::VectorXd v(static_cast<Eigen::Index>(nStates));
  double logScale = 0;
  const auto fillColumn = [&](int ci, Eigen::VectorXd& out, bool multiply) {
    const std::uint64_t mask = fixedMask[static_cast<std::size_t>(ci)];
    const std::uint64_t want = fixedValue[static_cast<std::size_t>(ci)];
    for (std::uint64_t c = 0; c < nStates; ++c) {
      const double lw = (c & mask) == want ? std::exp(colLogWeight(ci, c)) : 0.0;
      const auto k = static_cast<Eigen::Index>(c);
      out(k) = multiply ? out(k) * lw : lw;
    }
  };
  fillColumn(0, v, false);

  // horizontal coupling applied one row-bit at a time
  const double tSame = std::exp(bj), tDiff = std::exp(-bj);
  for (int ci = 1; ci < nCols; ++ci) {
    for (int i = 0; i < w; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      for (std::uint64_t c = 0; c < nStates; ++c) {
        if (c & bit) continue;
        const auto lo = static_cast<Eigen::Index>(c);
        const auto hi = static_cast<Eigen::Index>(c | bit);
        const double a = v(lo), b = v(hi);
        v(lo) = a * tSame + b * tDiff;
        v(hi) = a * tDiff + b * tSame;
      }
    }
    fillColumn(ci, v, true);
    const double scale = v.maxCoeff();
    if (scale <= 0) return kNegInf;
    v /= scale;
    logScale += std::log(scale);
  }
  const double total = v.sum();
  return total > 0 ? logScale + std::log(total) : kNegInf;
}

FiniteMeasure jointMarginal(const Strip& strip, const Region& s) {
  validateStrip(strip);
  if (s.dim() != 2) throw ContractError("strip marginal needs 2-D sites");
  if (s.empty()) throw ContractError("strip marginal needs a nonempty region");
  const Region rect = strip.region();
  if (!isSubset(s, rect)) throw ContractError("strip marginal sites outside the rectangle");
  const std::size_t k = s.sites().size();
  if (k > 16) throw EngineError("strip marginal above 16 sites");
  Eigen::VectorXd logw(static_cast<Eigen::Index>(std::uint64_t{1} << k));
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << k); ++idx) {
    Strip sub = strip;
    for (std::size_t i = 0; i < k; ++i)
      sub.constraints.emplace_back(s.siteAt(i),
                                   static_cast<int8_t>(spinOfBit(idx, static_cast<int>(i))));
    logw(static_cast<Eigen::Index>(idx)) = logPartition(sub);
  }
  return FiniteMeasure::fromLogWeights(s, logw);
}

double expectation(const Strip& strip, const LocalFunction& f) {
  if (f.support().empty()) return f.atIndex(0);
  return jointMarginal(strip, f.support()).expectation(f);
}

}  // namespace spinlab
