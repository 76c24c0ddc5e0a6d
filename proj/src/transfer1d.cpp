#include "spinlab/transfer1d.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace spinlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double spinOf(int idx) { return idx == 0 ? -1.0 : 1.0; }

// allowed-spin mask per site, (0,0) when constraints conflict
std::vector<std::array<bool, 2>> buildMasks(const Chain1D& chain) {
  std::vector<std::array<bool, 2>> mask(static_cast<std::size_t>(chain.length()),
                                        {true, true});
  for (const auto& [x, s] : chain.constraints) {
    if (x < chain.lo || x > chain.hi)
      throw ContractError("chain constraint outside [lo, hi]");
    if (s != 1 && s != -1) throw ContractError("chain constraint spin must be +-1");
    const std::size_t i = static_cast<std::size_t>(x - chain.lo);
    mask[i][s == 1 ? 0 : 1] = false;
  }
  return mask;
}

}  // namespace

Chain1D Chain1D::withConstraint(int x, int spin) const {
  Chain1D out = *this;
  out.constraints.emplace_back(x, static_cast<int8_t>(spin));
  return out;
}

Eigen::Matrix2d transferOperator(const Interaction& phi) {
  Eigen::Matrix2d t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      t(a, b) = std::exp(phi.beta * (phi.j * spinOf(a) * spinOf(b) + phi.h * spinOf(b)));
  return t;
}

std::array<double, 2> transferEigenvalues(const Interaction& phi) {
  const Eigen::Matrix2d t = transferOperator(phi);
  const double tr = t(0, 0) + t(1, 1);
  const double det = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

double logLambdaMax(const Interaction& phi) { return std::log(transferEigenvalues(phi)[0]); }

double logPartition(const Chain1D& chain) {
  if (chain.hi < chain.lo) throw ContractError("chain needs hi >= lo");
  const auto mask = buildMasks(chain);
  const int n = chain.length();
  const double bj = chain.phi.beta * chain.phi.j;
  const double bh = chain.phi.beta * chain.phi.h;
  const auto bond = [&](int a, int b) { return std::exp(bj * spinOf(a) * spinOf(b)); };
  const auto field = [&](int a) { return std::exp(bh * spinOf(a)); };

  if (chain.boundary == ChainBoundary::Periodic) {
    if (n < 3) throw ContractError("periodic chain needs at least 3 sites");
    Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
    double logScale = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::Matrix2d m;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          m(a, b) = mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]
                        ? field(a) * bond(a, b)
                        : 0.0;
      prod = (prod * m).eval();
      const double scale = prod.cwiseAbs().maxCoeff();
      if (scale <= 0) return kNegInf;
      prod /= scale;
      logScale += std::log(scale);
    }
    const double tr = prod.trace();
    return tr > 0 ? logScale + std::log(tr) : kNegInf;
  }

  Eigen::Vector2d v;
  double logScale = 0;
  for (int a = 0; a < 2; ++a) {
    double w = mask[0][static_cast<std::size_t>(a)] ? field(a) : 0.0;
    if (chain.boundary == ChainBoundary::Plus) w *= bond(a, 1);
    if (chain.boundary == ChainBoundary::Minus) w *= bond(a, 0);
    v(a) = w;
  }
  for (int i = 1; i < n; ++i) {
    Eigen::Vector2d nv = Eigen::Vector2d::Zero();
    for (int b = 0; b < 2; ++b) {
      if (!mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)]) continue;
      nv(b) = field(b) * (v(0) * bond(0, b) + v(1) * bond(1, b));
    }
    v = nv;
    const double scale = v.maxCoeff();
    if (scale <= 0) return kNegInf;
    v /= scale;
    logScale += std::log(scale);
  }
  double z = 0;
  for (int a = 0; a < 2; ++a) {
    double w = v(a);
    if (chain.boundary == ChainBoundary::Plus) w *= bond(a, 1);
    if (chain.boundary == ChainBoundary::Minus) w *= bond(a, 0);
    z += w;
  }
  return z > 0 ? logScale + std::log(z) : kNegInf;
}

FiniteMeasure jointMarginal(const Chain1D& chain, const Region& s) {
  if (s.dim() != 1) throw ContractError("chain marginal needs 1-D sites");
  if (s.empty()) throw ContractError("chain marginal needs a nonempty region");
  const auto& sites = s.sites();
  for (const Site& x : sites)
    if (x[0] < chain.lo || x[0] > chain.hi)
      throw ContractError("chain marginal site outside [lo, hi]");
  const std::size_t k = sites.size();
  if (k > 24) throw EngineError("chain marginal above 24 sites");
  Eigen::VectorXd logw(static_cast<Eigen::Index>(std::uint64_t{1} << k));
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << k); ++idx) {
    Chain1D sub = chain;
    for (std::size_t i = 0; i < k; ++i)
      sub.constraints.emplace_back(sites[i][0],
                                   static_cast<int8_t>(spinOfBit(idx, static_cast<int>(i))));
    logw(static_cast<Eigen::Index>(idx)) = logPartition(sub);
  }
  return FiniteMeasure::fromLogWeights(s, logw);
}

double pairCorrelation(const Chain1D& chain, int x, int y) {
  if (x == y) return 1.0;
  const Region pair = Region::ofSites(1, {site(std::min(x, y)), site(std::max(x, y))});
  const FiniteMeasure m = jointMarginal(chain, pair);
  return m.expectation(LocalFunction::pairProduct(1, pair.siteAt(0), pair.siteAt(1)));
}

TransferSummary transferMatrix1D(const Interaction& phi, int n, ChainBoundary boundary,
                                 const std::vector<int>& distances) {
  if (n < 0) throw ContractError("transferMatrix1D needs n >= 0");
  Chain1D chain{phi, -n, n, boundary, {}};
  TransferSummary out;
  out.nSites = chain.length();
  out.logZ = logPartition(chain);
  out.logZPerSite = out.logZ / out.nSites;
  out.centerMarginal = jointMarginal(chain, Region::ofSites(1, {site(0)}));
  out.pairCorrelations.reserve(distances.size());
  for (int d : distances) {
    if (std::abs(d) > n) throw ContractError("correlation distance outside the chain");
    out.pairCorrelations.push_back(d == 0 ? 1.0 : pairCorrelation(chain, 0, d));
  }
  return out;
}

Chain2 Chain2::gibbs(const Interaction& phi) {
  const Eigen::Matrix2d t = transferOperator(phi);
  const double lambda = transferEigenvalues(phi)[0];
  // right and left Perron vectors; lambda exceeds both diagonal entries
  const Eigen::Vector2d psi(t(0, 1), lambda - t(0, 0));
  const Eigen::Vector2d phiL(t(1, 0), lambda - t(0, 0));
  Chain2 c;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) c.P(a, b) = t(a, b) * psi(b) / (lambda * psi(a));
  const Eigen::Vector2d prod = phiL.cwiseProduct(psi);
  c.pi = prod / prod.sum();
  return c;
}

Chain2 Chain2::ofPersistence(double a, double b) {
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1))
    throw ContractError("persistence probabilities must lie in [0, 1]");
  const double denom = (1 - a) + (1 - b);
  if (denom <= 0) throw ContractError("persistence chain (1, 1) has no unique stationary law");
  Chain2 c;
  c.P << b, 1 - b, 1 - a, a;
  c.pi << (1 - a) / denom, (1 - b) / denom;
  return c;
}

Chain2 Chain2::iid(double pPlus) {
  if (!(pPlus >= 0 && pPlus <= 1)) throw ContractError("iid spin probability must lie in [0, 1]");
  Chain2 c;
  c.P << 1 - pPlus, pPlus, 1 - pPlus, pPlus;
  c.pi << 1 - pPlus, pPlus;
  return c;
}

Eigen::Matrix2d Chain2::power(int r) const {
  if (r < 0) throw ContractError("chain power needs r >= 0");
  Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d base = P;
  while (r > 0) {
    if (r & 1) acc = (acc * base).eval();
    base = (base * base).eval();
    r >>= 1;
  }
  return acc;
}

FiniteMeasure Chain2::marginal(const Region& s) const {
  if (s.dim() != 1) throw ContractError("chain marginal needs 1-D sites");
  if (s.empty()) throw ContractError("chain marginal needs a nonempty region");
  const auto& sites = s.sites();
  const std::size_t k = sites.size();
  if (k > 24) throw EngineError("chain marginal above 24 sites");
  std::map<int, Eigen::Matrix2d> hop;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const int gap = sites[i + 1][0] - sites[i][0];
    if (!hop.count(gap)) hop[gap] = power(gap);
  }
  Eigen::VectorXd p(static_cast<Eigen::Index>(std::uint64_t{1} << k));
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << k); ++idx) {
    double w = pi(static_cast<int>(idx & 1));
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const int gap = sites[i + 1][0] - sites[i][0];
      w *= hop[gap](static_cast<int>((idx >> i) & 1), static_cast<int>((idx >> (i + 1)) & 1));
    }
    p(static_cast<Eigen::Index>(idx)) = w;
  }
  return FiniteMeasure(s, p);
}

double Chain2::logMass(const Region& s, std::uint64_t index) const {
  if (s.dim() != 1) throw ContractError("chain mass needs 1-D sites");
  if (s.empty()) throw ContractError("chain mass needs a nonempty region");
  const auto& sites = s.sites();
  std::map<int, Eigen::Matrix2d> hop;
  double acc = 0;
  const double p0 = pi(static_cast<int>(index & 1));
  if (p0 <= 0) return kNegInf;
  acc += std::log(p0);
  for (std::size_t i = 0; i + 1 < sites.size(); ++i) {
    const int gap = sites[i + 1][0] - sites[i][0];
    if (!hop.count(gap)) hop[gap] = power(gap);
    const double step =
        hop[gap](static_cast<int>((index >> i) & 1), static_cast<int>((index >> (i + 1)) & 1));
    if (step <= 0) return kNegInf;
    acc += std::log(step);
  }
  return acc;
}

Chain2 Chain2::decimate(int b) const {
  if (b < 1) throw ContractError("decimation spacing must be >= 1");
  Chain2 c;
  c.pi = pi;
  c.P = power(b);
  return c;
}

double Chain2::expectation(const LocalFunction& f) const {
  if (f.support().empty()) return f.atIndex(0);
  return marginal(f.support()).expectation(f);
}

double relEntropyRate(const Chain2& mu, const Chain2& nu) {
  double acc = 0;
  for (int a = 0; a < 2; ++a) {
    if (mu.pi(a) <= 0) continue;
    for (int b = 0; b < 2; ++b) {
      const double p = mu.P(a, b);
      if (p <= 0) continue;
      const double q = nu.P(a, b);
      if (q <= 0) return std::numeric_limits<double>::infinity();
      acc += mu.pi(a) * p * std::log(p / q);
    }
  }
  return acc;
}

namespace {

struct LiftedTilt {
  int blockLen = 1;                 // sites per lifted state
  Eigen::MatrixXd m;                // shift transition with one tilt factor per step
  Eigen::VectorXd start;            // open-chain initial weights, tilt included
  std::vector<std::size_t> fBits;   // block bit position of each support site

  std::uint64_t fIndexOf(std::uint64_t state) const {
    std::uint64_t idx = 0;
    for (std::size_t j = 0; j < fBits.size(); ++j) idx |= ((state >> fBits[j]) & 1) << j;
    return idx;
  }
};

LiftedTilt buildTilt(const Chain2& nu, const LocalFunction& f) {
  if (f.support().dim() != 1) throw ContractError("tilted transfer needs a 1-D function");
  const int lo = f.support().siteAt(0)[0];
  const LocalFunction g = translate(f, site(-lo));
  const int d = g.support().siteAt(g.support().size() - 1)[0];
  if (d > 6) throw EngineError("tilted transfer block length above 7");
  LiftedTilt t;
  t.blockLen = d + 1;
  for (const Site& x : g.support().sites()) t.fBits.push_back(static_cast<std::size_t>(x[0]));
  const std::uint64_t nStates = std::uint64_t{1} << t.blockLen;
  t.m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nStates),
                              static_cast<Eigen::Index>(nStates));
  t.start.resize(static_cast<Eigen::Index>(nStates));
  for (std::uint64_t u = 0; u < nStates; ++u) {
    double w = nu.pi(static_cast<int>(u & 1));
    for (int i = 0; i + 1 < t.blockLen; ++i)
      w *= nu.P(static_cast<int>((u >> i) & 1), static_cast<int>((u >> (i + 1)) & 1));
    t.start(static_cast<Eigen::Index>(u)) = w * std::exp(g.atIndex(t.fIndexOf(u)));
    for (std::uint64_t s = 0; s < 2; ++s) {
      const std::uint64_t v = (u >> 1) | (s << d);
      t.m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) =
          nu.P(static_cast<int>((u >> d) & 1), static_cast<int>(s)) *
          std::exp(g.atIndex(t.fIndexOf(v)));
    }
  }
  return t;
}

}  // namespace

double tiltedOpenLogSum(const Chain2& nu, const LocalFunction& f, int nTranslates) {
  if (nTranslates < 0) throw ContractError("tilted sum needs nTranslates >= 0");
  if (nTranslates == 0) return 0;
  if (f.support().empty()) return nTranslates * f.atIndex(0);
  const LiftedTilt t = buildTilt(nu, f);
  Eigen::RowVectorXd v = t.start.transpose();
  double logScale = 0;
  for (int step = 1; step < nTranslates; ++step) {
    v = (v * t.m).eval();
    const double scale = v.maxCoeff();
    if (scale <= 0) return kNegInf;
    v /= scale;
    logScale += std::log(scale);
  }
  const double total = v.sum();
  return total > 0 ? logScale + std::log(total) : kNegInf;
}

double tiltedRingLogSum(const Chain2& nu, const LocalFunction& f, int nSites) {
  if (f.support().empty()) return nSites * f.atIndex(0);
  const LiftedTilt t = buildTilt(nu, f);
  if (nSites < t.blockLen) throw ContractError("ring shorter than the function block");
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(t.m.rows(), t.m.cols());
  Eigen::Matrix2d chainProd = Eigen::Matrix2d::Identity();
  double logScale = 0, chainScale = 0;
  for (int i = 0; i < nSites; ++i) {
    prod = (prod * t.m).eval();
    const double scale = prod.cwiseAbs().maxCoeff();
    if (scale <= 0) return kNegInf;
    prod /= scale;
    logScale += std::log(scale);
    chainProd = (chainProd * nu.P).eval();
    const double cs = chainProd.cwiseAbs().maxCoeff();
    chainProd /= cs;
    chainScale += std::log(cs);
  }
  const double tr = prod.trace();
  const double chainTr = chainProd.trace();
  if (tr <= 0) return kNegInf;
  if (chainTr <= 0) throw EngineError("circular chain law has zero mass");
  return (logScale + std::log(tr)) - (chainScale + std::log(chainTr));
}

double tiltedLogLambda(const Chain2& nu, const LocalFunction& f) {
  if (f.support().empty()) return f.atIndex(0);
  const LiftedTilt t = buildTilt(nu, f);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(t.m);
  return std::log(solver.eigenvalues().cwiseAbs().maxCoeff());
}

}  // namespace spinlab
