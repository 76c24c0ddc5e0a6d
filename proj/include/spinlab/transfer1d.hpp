#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "spinlab/measure.hpp"

namespace spinlab {

// Spin index convention everywhere: index 0 <-> spin -1, index 1 <-> spin +1.

enum class ChainBoundary { Periodic, Plus, Minus, Free };

// finite nearest-neighbor chain on sites [lo, hi]
struct Chain1D {
  Interaction phi;
  int lo = 0;
  int hi = 0;
  ChainBoundary boundary = ChainBoundary::Free;
  std::vector<std::pair<int, int8_t>> constraints;

  Chain1D withConstraint(int x, int spin) const;
  int length() const { return hi - lo + 1; }
};

double logPartition(const Chain1D& chain);
// law of the spins on s (1-D sites inside [lo,hi]), conditional on the constraints
FiniteMeasure jointMarginal(const Chain1D& chain, const Region& s);
double pairCorrelation(const Chain1D& chain, int x, int y);

struct TransferSummary {
  int nSites = 0;
  double logZ = 0;
  double logZPerSite = 0;
  FiniteMeasure centerMarginal;
  std::vector<double> pairCorrelations;  // vs requested distances from the center
};
// chain on [-n, n]
TransferSummary transferMatrix1D(const Interaction& phi, int n, ChainBoundary boundary,
                                 const std::vector<int>& distances = {});

// transfer operator T(a,b) = exp(beta J a b) * exp(beta h b)
Eigen::Matrix2d transferOperator(const Interaction& phi);
std::array<double, 2> transferEigenvalues(const Interaction& phi);  // {max, min}
double logLambdaMax(const Interaction& phi);

// stationary 2-state Markov chain; covers the infinite-volume 1-D Gibbs field, its
// decimated images, and the order-1 trial family
struct Chain2 {
  Eigen::Vector2d pi;
  Eigen::Matrix2d P;

  static Chain2 gibbs(const Interaction& phi);
  // a = P(+ -> +), b = P(- -> -)
  static Chain2 ofPersistence(double a, double b);
  static Chain2 iid(double pPlus);

  Eigen::Matrix2d power(int r) const;
  // exact law on any finite set of 1-D sites
  FiniteMeasure marginal(const Region& s) const;
  double logMass(const Region& s, std::uint64_t index) const;
  Chain2 decimate(int b) const;
  double expectation(const LocalFunction& f) const;
};

// sum_a pi_mu(a) sum_b P_mu(a,b) log(P_mu/P_nu); +inf if absolute continuity fails
double relEntropyRate(const Chain2& mu, const Chain2& nu);

// log of nu[exp(sum_{x in window} translate_x f)] for a local f on [0..D], D <= 6.
// Ring evaluation uses the circular chain law (exact product law for iid nu).
double tiltedRingLogSum(const Chain2& nu, const LocalFunction& f, int nSites);
double tiltedOpenLogSum(const Chain2& nu, const LocalFunction& f, int nTranslates);
// infinite-volume growth rate of the tilted sums
double tiltedLogLambda(const Chain2& nu, const LocalFunction& f);

}  // namespace spinlab
