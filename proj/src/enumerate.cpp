#include "spinlab/enumerate.hpp"

#include <algorithm>
#include <cmath>

namespace spinlab {

namespace {

struct CompiledSystem {
  std::vector<std::pair<int, int>> bonds;  // window index pairs
  std::vector<double> field;               // per-site linear coefficient, beta included
  double bondCoef = 0;                     // beta * J
  std::uint64_t fixedMask = 0, fixedValue = 0;
  std::vector<int> freeBits;
};

CompiledSystem compile(const SpinSystem& sys) {
  const Region& w = sys.window;
  CompiledSystem c;
  c.bondCoef = sys.phi.beta * sys.phi.j;
  c.field.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Site& s = w.siteAt(i);
    double f = sys.phi.h;
    for (const auto& nb : neighbors(s, w.dim())) {
      if (auto jdx = w.indexOf(nb)) {
        if (*jdx > static_cast<int>(i)) c.bonds.emplace_back(static_cast<int>(i), *jdx);
      } else if (sys.exterior) {
        f += sys.phi.j * sys.exterior->spin(nb);
      }
    }
    c.field[i] = sys.phi.beta * f;
  }
  if (sys.ringX) {
    if (w.dim() != 1 || w.size() < 3) throw ContractError("ring needs a 1-D window of >= 3 sites");
    c.bonds.emplace_back(0, static_cast<int>(w.size()) - 1);
  }
  for (const auto& [s, v] : sys.constraints) {
    auto i = w.indexOf(s);
    if (!i) throw ContractError("constraint site outside window");
    std::uint64_t bit = std::uint64_t{1} << *i;
    if (c.fixedMask & bit) throw ContractError("duplicate constraint site");
    c.fixedMask |= bit;
    if (v > 0) c.fixedValue |= bit;
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!(c.fixedMask >> i & 1u)) c.freeBits.push_back(static_cast<int>(i));
  return c;
}

double energyOf(const CompiledSystem& c, std::uint64_t idx) {
  double e = 0;
  for (const auto& [i, j] : c.bonds) e += c.bondCoef * spinOfBit(idx, i) * spinOfBit(idx, j);
  for (std::size_t i = 0; i < c.field.size(); ++i) e += c.field[i] * spinOfBit(idx, static_cast<int>(i));
  return e;
}

std::uint64_t expandFree(const CompiledSystem& c, std::uint64_t freeIdx) {
  std::uint64_t idx = c.fixedValue;
  for (std::size_t b = 0; b < c.freeBits.size(); ++b)
    idx |= ((freeIdx >> b) & 1u) << c.freeBits[b];
  return idx;
}

}  // namespace

SpinSystem SpinSystem::withConstraint(const Site& s, int spin) const {
  SpinSystem out = *this;
  out.constraints.emplace_back(s, static_cast<int8_t>(spin));
  return out;
}

double configEnergy(const SpinSystem& sys, std::uint64_t index) {
  return energyOf(compile(sys), index);
}

FiniteMeasure enumerateMeasure(const SpinSystem& sys, int maxFreeSites) {
  CompiledSystem c = compile(sys);
  if (static_cast<int>(c.freeBits.size()) > maxFreeSites)
    throw EngineError("enumeration budget exceeded: " + std::to_string(c.freeBits.size()) +
                      " free sites");
  if (sys.window.size() > 24) throw EngineError("enumeration window above 24 sites");
  std::uint64_t nFree = std::uint64_t{1} << c.freeBits.size();
  std::vector<double> energies(nFree);
  double emax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < nFree; ++k) {
    energies[k] = energyOf(c, expandFree(c, k));
    emax = std::max(emax, energies[k]);
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << sys.window.size());
  double total = 0;
  for (std::uint64_t k = 0; k < nFree; ++k) {
    double w = std::exp(energies[k] - emax);
    p[static_cast<Eigen::Index>(expandFree(c, k))] = w;
    total += w;
  }
  return FiniteMeasure(sys.window, p / total);
}

double enumerateLogPartition(const SpinSystem& sys, int maxFreeSites) {
  CompiledSystem c = compile(sys);
  if (static_cast<int>(c.freeBits.size()) > maxFreeSites)
    throw EngineError("enumeration budget exceeded: " + std::to_string(c.freeBits.size()) +
                      " free sites");
  std::uint64_t nFree = std::uint64_t{1} << c.freeBits.size();
  double emax = -std::numeric_limits<double>::infinity();
  std::vector<double> energies(nFree);
  for (std::uint64_t k = 0; k < nFree; ++k) {
    energies[k] = energyOf(c, expandFree(c, k));
    emax = std::max(emax, energies[k]);
  }
  double acc = 0;
  for (double e : energies) acc += std::exp(e - emax);
  return emax + std::log(acc);
}

}  // namespace spinlab
