#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "spinlab/lattice.hpp"

namespace spinlab {

// Probability table over the configurations of a finite region, indexed in the
// region's canonical site order. Entries are >= 0 and sum to 1 within 1e-12.
class FiniteMeasure {
public:
  FiniteMeasure() = default;
  FiniteMeasure(Region support, Eigen::VectorXd probabilities);

  static FiniteMeasure fromWeights(Region support, const Eigen::VectorXd& weights);
  // weights given as logs; shifted by the max before exponentiation
  static FiniteMeasure fromLogWeights(Region support, const Eigen::VectorXd& logWeights);
  static FiniteMeasure pointMass(Region support, std::uint64_t index);
  static FiniteMeasure uniform(Region support);
  static FiniteMeasure productBernoulli(Region support, double pPlus);

  const Region& support() const { return support_; }
  const Eigen::VectorXd& probabilities() const { return p_; }
  std::uint64_t size() const { return static_cast<std::uint64_t>(p_.size()); }
  double prob(std::uint64_t index) const { return p_[static_cast<Eigen::Index>(index)]; }

  void validate(double tol = 1e-12) const;

  double expectation(const LocalFunction& f) const;  // f.support subset of support
  FiniteMeasure marginal(const Region& sub) const;
  // joint of independent pieces on disjoint regions
  friend FiniteMeasure product(const FiniteMeasure& a, const FiniteMeasure& b);

private:
  Region support_;
  Eigen::VectorXd p_;
};

FiniteMeasure product(const FiniteMeasure& a, const FiniteMeasure& b);

// (1/2) sum |a - b|; supports must match
double totalVariation(const FiniteMeasure& a, const FiniteMeasure& b);

FiniteMeasure translate(const FiniteMeasure& mu, const Site& shift);

// bit position of each sub site inside sup's order; throws unless sub subset of sup
std::vector<int> embedding(const Region& sub, const Region& sup);
// extract the sub-configuration index from a configuration of the larger region
std::uint64_t extractIndex(std::uint64_t supIndex, const std::vector<int>& emb);

}  // namespace spinlab
