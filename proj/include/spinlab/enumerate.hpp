#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spinlab/measure.hpp"

namespace spinlab {

// Finite window of a nearest-neighbor model. Bonds inside the window count once;
// bonds leaving the window pick up the exterior spin unless the boundary is free.
struct SpinSystem {
  Interaction phi;
  Region window;
  std::optional<TailedConfiguration> exterior;  // nullopt = free boundary
  std::vector<std::pair<Site, int8_t>> constraints;
  bool ringX = false;  // d=1 only: wrap bond between the extreme sites

  SpinSystem withConstraint(const Site& s, int spin) const;
};

// beta * (J sum_bonds s s' + sum_x s_x (h + J * exterior field))
double configEnergy(const SpinSystem& sys, std::uint64_t index);

// Boltzmann law by exhaustive enumeration over unconstrained sites; log-sum-exp
// throughout. Constrained configurations carry probability zero in the table.
FiniteMeasure enumerateMeasure(const SpinSystem& sys, int maxFreeSites = 24);

double enumerateLogPartition(const SpinSystem& sys, int maxFreeSites = 24);

}  // namespace spinlab
