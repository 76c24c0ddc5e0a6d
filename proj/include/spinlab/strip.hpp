#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "spinlab/measure.hpp"

namespace spinlab {

// Rectangle [x0, x1] x [y0, y0 + width - 1] swept column by column. Column states
// are width-bit words, bit i for row y0 + i, bit 1 <-> spin +1. Width is capped at
// 14 so a column sweep stays O(width * 2^width).
struct Strip {
  Interaction phi;
  int x0 = 0;
  int x1 = 0;
  int y0 = 0;
  int width = 1;
  // spins read at sites adjacent to the rectangle; nullopt = free boundary
  std::optional<TailedConfiguration> exterior;
  std::vector<std::pair<Site, int8_t>> constraints;

  Strip withConstraint(const Site& s, int spin) const;
  Region region() const;
  int columns() const { return x1 - x0 + 1; }
};

double logPartition(const Strip& strip);
// law on s conditional on the constraints, via constrained log-partition ratios
FiniteMeasure jointMarginal(const Strip& strip, const Region& s);
double expectation(const Strip& strip, const LocalFunction& f);

}  // namespace spinlab
