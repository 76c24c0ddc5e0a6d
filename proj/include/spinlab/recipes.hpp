#pragma once

#include <memory>
#include <optional>
#include <string>

#include "spinlab/enumerate.hpp"
#include "spinlab/strip.hpp"
#include "spinlab/transfer1d.hpp"

namespace spinlab {

// A lattice law exposed through exact finite-window queries. Implementations
// answer exactly; sampling-based approximation lives in the engines.
struct MeasureRecipe {
  virtual ~MeasureRecipe() = default;

  virtual int dim() const = 0;
  virtual FiniteMeasure marginal(const Region& window) const = 0;
  // log of the probability that the window spins equal `index`; -inf on zero mass
  virtual double logMass(const Region& window, std::uint64_t index) const;
  // present when the law is a stationary order-1 two-state chain on Z
  virtual std::optional<Chain2> asChain() const { return std::nullopt; }
  // true only when the law provably factorizes across the two regions
  virtual bool independentAcross(const Region& a, const Region& b) const;
  virtual std::string describe() const = 0;
};

using RecipePtr = std::shared_ptr<const MeasureRecipe>;

RecipePtr productRecipe(int dim, double pPlus);
RecipePtr chainRecipe(Chain2 chain, std::string label);
RecipePtr gibbsChainRecipe(const Interaction& phi);
RecipePtr decimatedChainRecipe(const Interaction& phi, int spacing);
// law of `source` read at every spacing-th site through a binary noise channel
RecipePtr emissionChainRecipe(Chain2 source, int spacing, double emitPlusGivenMinus,
                              double emitPlusGivenPlus, std::string label);
// Boltzmann law of one finite window, held as a single enumerated table
RecipePtr windowGibbsRecipe(SpinSystem sys, std::string label);
// conditional Gibbs law on a strip, queried through column transfer
RecipePtr stripGibbsRecipe(Strip strip, std::string label);
// one strip row read as a 1-D law: site x maps to (x, yRow)
RecipePtr stripRowRecipe(Strip strip, int yRow, std::string label);

}  // namespace spinlab
