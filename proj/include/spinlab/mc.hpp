#pragma once

#include <cstdint>
#include <vector>

#include "spinlab/enumerate.hpp"
#include "spinlab/measure.hpp"

namespace spinlab {

// Counter-based uniform in (0,1). Same (seed, chain, sweep, site) always yields the
// same draw, so chains can run on any thread layout without changing the stream.
double mcUniform(std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep,
                 std::uint64_t site);

struct McSchedule {
  int chains = 4;
  int sweeps = 4096;  // measured sweeps, after burn-in
  int burnIn = 512;
  int sweepsPerSample = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SampleStream {
  Region window;
  std::uint64_t seed = 0;
  int chains = 0;
  int sweepsPerSample = 1;
  int burnIn = 0;
  std::vector<std::pair<Site, int8_t>> constraints;
  // [chain][sample] -> window configuration index
  std::vector<std::vector<std::uint64_t>> samples;
  // optional importance log-weights aligned with samples; empty = unweighted
  std::vector<std::vector<double>> logWeights;

  std::uint64_t totalSamples() const;
};

// heat-bath chain in fixed canonical scan order; constrained sites never flip
SampleStream mcSample(const SpinSystem& sys, const McSchedule& sched);

struct McEstimate {
  double mean = 0;
  double standardError = 0;
  std::uint64_t nSamples = 0;
};

// batch means over each chain, pooled in chain order
McEstimate empiricalEstimate(const SampleStream& stream, const LocalFunction& f);
FiniteMeasure empiricalLaw(const SampleStream& stream, const Region& record);
// initial-positive-sequence estimate, in sweeps-per-sample units
double integratedAutocorrelation(const SampleStream& stream, const LocalFunction& f);

struct CouplingReport {
  McEstimate plus;
  McEstimate minus;
  std::uint64_t sweepsChecked = 0;
  std::uint64_t dominatedSweeps = 0;  // plus state >= minus state at every site
  double dominatedFraction() const {
    return sweepsChecked == 0 ? 1.0 : static_cast<double>(dominatedSweeps) / sweepsChecked;
  }
};

// same window and constraints, shared uniforms, all-plus vs all-minus starts
CouplingReport coupledPlusMinus(const SpinSystem& sysPlus, const SpinSystem& sysMinus,
                                const LocalFunction& f, const McSchedule& sched);

}  // namespace spinlab
