#include "spinlab/measure.hpp"

#include <cmath>

namespace spinlab {

FiniteMeasure::FiniteMeasure(Region support, Eigen::VectorXd probabilities)
    : support_(std::move(support)), p_(std::move(probabilities)) {
  if (support_.size() > 24) throw EngineError("measure support above 24 sites");
  if (p_.size() != Eigen::Index{1} << support_.size())
    throw ContractError("measure table size != 2^|support|");
  validate();
}

FiniteMeasure FiniteMeasure::fromWeights(Region support, const Eigen::VectorXd& weights) {
  double total = weights.sum();
  if (!(total > 0) || !std::isfinite(total))
    throw ContractError("measure weights must have positive finite total");
  if (weights.minCoeff() < 0) throw ContractError("measure weights must be >= 0");
  return FiniteMeasure(std::move(support), weights / total);
}

FiniteMeasure FiniteMeasure::fromLogWeights(Region support, const Eigen::VectorXd& logWeights) {
  double shift = logWeights.maxCoeff();
  Eigen::VectorXd w = (logWeights.array() - shift).exp();
  return fromWeights(std::move(support), w);
}

FiniteMeasure FiniteMeasure::pointMass(Region support, std::uint64_t index) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << support.size());
  p[static_cast<Eigen::Index>(index)] = 1.0;
  return FiniteMeasure(std::move(support), std::move(p));
}

FiniteMeasure FiniteMeasure::uniform(Region support) {
  Eigen::Index n = Eigen::Index{1} << support.size();
  return FiniteMeasure(std::move(support),
                       Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

FiniteMeasure FiniteMeasure::productBernoulli(Region support, double pPlus) {
  if (pPlus < 0 || pPlus > 1) throw ContractError("Bernoulli parameter outside [0,1]");
  std::size_t n = support.size();
  Eigen::VectorXd p(Eigen::Index{1} << n);
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
    double v = 1.0;
    for (std::size_t i = 0; i < n; ++i) v *= ((idx >> i) & 1u) ? pPlus : 1.0 - pPlus;
    p[static_cast<Eigen::Index>(idx)] = v;
  }
  return FiniteMeasure(std::move(support), std::move(p));
}

void FiniteMeasure::validate(double tol) const {
  if (p_.size() == 0) throw ContractError("empty measure");
  if (p_.minCoeff() < -1e-15) throw ContractError("measure has negative entry");
  // summation roundoff scales with the table, so large windows need slack
  const double slack = tol + static_cast<double>(p_.size()) * 2.2e-16;
  if (std::abs(p_.sum() - 1.0) > slack)
    throw ContractError("measure mass not 1 within tolerance");
}

double FiniteMeasure::expectation(const LocalFunction& f) const {
  auto emb = embedding(f.support(), support_);
  double acc = 0;
  for (std::uint64_t idx = 0; idx < size(); ++idx)
    acc += p_[static_cast<Eigen::Index>(idx)] * f.atIndex(extractIndex(idx, emb));
  return acc;
}

FiniteMeasure FiniteMeasure::marginal(const Region& sub) const {
  auto emb = embedding(sub, support_);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index{1} << sub.size());
  for (std::uint64_t idx = 0; idx < size(); ++idx)
    out[static_cast<Eigen::Index>(extractIndex(idx, emb))] += p_[static_cast<Eigen::Index>(idx)];
  return FiniteMeasure(sub, std::move(out));
}

FiniteMeasure product(const FiniteMeasure& a, const FiniteMeasure& b) {
  if (!disjoint(a.support(), b.support()))
    throw ContractError("product measure requires disjoint supports");
  Region sup = regionUnion(a.support(), b.support());
  auto embA = embedding(a.support(), sup);
  auto embB = embedding(b.support(), sup);
  Eigen::VectorXd p(Eigen::Index{1} << sup.size());
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << sup.size()); ++idx)
    p[static_cast<Eigen::Index>(idx)] =
        a.prob(extractIndex(idx, embA)) * b.prob(extractIndex(idx, embB));
  return FiniteMeasure(std::move(sup), std::move(p));
}

double totalVariation(const FiniteMeasure& a, const FiniteMeasure& b) {
  if (!(a.support() == b.support()))
    throw ContractError("total variation requires equal supports");
  return 0.5 * (a.probabilities() - b.probabilities()).cwiseAbs().sum();
}

FiniteMeasure translate(const FiniteMeasure& mu, const Site& shift) {
  // canonical order is shift-invariant, so the table carries over unchanged
  return FiniteMeasure(translate(mu.support(), shift), mu.probabilities());
}

std::vector<int> embedding(const Region& sub, const Region& sup) {
  std::vector<int> emb;
  emb.reserve(sub.size());
  for (const auto& s : sub.sites()) {
    auto i = sup.indexOf(s);
    if (!i) throw ContractError("embedding: site not contained in target region");
    emb.push_back(*i);
  }
  return emb;
}

std::uint64_t extractIndex(std::uint64_t supIndex, const std::vector<int>& emb) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < emb.size(); ++i)
    out |= ((supIndex >> emb[i]) & 1u) << i;
  return out;
}

}  // namespace spinlab
