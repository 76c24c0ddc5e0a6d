#include "spinlab/recipes.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace spinlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void requireDim(const Region& window, int dim, const char* who) {
  if (window.empty()) throw ContractError(std::string(who) + ": empty window");
  if (window.dim() != dim) throw ContractError(std::string(who) + ": window dimension mismatch");
}

}  // namespace

double MeasureRecipe::logMass(const Region& window, std::uint64_t index) const {
  const FiniteMeasure m = marginal(window);
  if (index >= m.size()) throw ContractError("logMass: index out of range");
  const double p = m.prob(index);
  return p > 0 ? std::log(p) : kNegInf;
}

bool MeasureRecipe::independentAcross(const Region&, const Region&) const { return false; }

namespace {

class ProductRecipe final : public MeasureRecipe {
public:
  ProductRecipe(int dim, double pPlus) : dim_(dim), p_(pPlus) {
    if (dim != 1 && dim != 2) throw ContractError("productRecipe: dim must be 1 or 2");
    if (!(pPlus >= 0 && pPlus <= 1)) throw ContractError("productRecipe: pPlus outside [0,1]");
  }

  int dim() const override { return dim_; }

  FiniteMeasure marginal(const Region& window) const override {
    requireDim(window, dim_, "productRecipe");
    return FiniteMeasure::productBernoulli(window, p_);
  }

  double logMass(const Region& window, std::uint64_t index) const override {
    requireDim(window, dim_, "productRecipe");
    const int n = static_cast<int>(window.size());
    if (n > 63 || index >= (std::uint64_t{1} << n)) throw ContractError("logMass: index out of range");
    const int k = std::popcount(index);
    if (k > 0 && p_ == 0) return kNegInf;
    if (k < n && p_ == 1) return kNegInf;
    double out = 0;
    if (k > 0) out += k * std::log(p_);
    if (k < n) out += (n - k) * std::log1p(-p_);
    return out;
  }

  std::optional<Chain2> asChain() const override {
    if (dim_ != 1) return std::nullopt;
    return Chain2::iid(p_);
  }

  bool independentAcross(const Region& a, const Region& b) const override {
    return disjoint(a, b);
  }

  std::string describe() const override {
    std::ostringstream ss;
    ss << "product d=" << dim_ << " pPlus=" << p_;
    return ss.str();
  }

private:
  int dim_;
  double p_;
};

class ChainRecipe final : public MeasureRecipe {
public:
  ChainRecipe(Chain2 chain, std::string label) : chain_(std::move(chain)), label_(std::move(label)) {}

  int dim() const override { return 1; }

  FiniteMeasure marginal(const Region& window) const override {
    requireDim(window, 1, "chainRecipe");
    return chain_.marginal(window);
  }

  double logMass(const Region& window, std::uint64_t index) const override {
    requireDim(window, 1, "chainRecipe");
    return chain_.logMass(window, index);
  }

  std::optional<Chain2> asChain() const override { return chain_; }

  bool independentAcross(const Region& a, const Region& b) const override {
    // row equality holds exactly for chains built by Chain2::iid
    return disjoint(a, b) && chain_.P(0, 0) == chain_.P(1, 0) && chain_.P(0, 1) == chain_.P(1, 1);
  }

  std::string describe() const override { return label_; }

private:
  Chain2 chain_;
  std::string label_;
};

// Image sites k observe source site spacing*k through the channel
// e(+|a) given by emitPlusGiven{Minus,Plus}. Masses come from the forward
// recursion over the hidden source states, one rescale per step.
class EmissionRecipe final : public MeasureRecipe {
public:
  EmissionRecipe(Chain2 source, int spacing, double ePlusGivenMinus, double ePlusGivenPlus,
                 std::string label)
      : source_(std::move(source)),
        spacing_(spacing),
        label_(std::move(label)) {
    if (spacing < 1) throw ContractError("emissionChainRecipe: spacing must be >= 1");
    for (double e : {ePlusGivenMinus, ePlusGivenPlus})
      if (!(e >= 0 && e <= 1)) throw ContractError("emissionChainRecipe: emission outside [0,1]");
    emit_ << 1 - ePlusGivenMinus, 1 - ePlusGivenPlus, ePlusGivenMinus, ePlusGivenPlus;
    if (ePlusGivenMinus == ePlusGivenPlus) {
      iid_ = true;
      observed_ = Chain2::iid(ePlusGivenPlus);
    } else if (source_.P(0, 0) == source_.P(1, 0) && source_.P(0, 1) == source_.P(1, 1)) {
      iid_ = true;
      const double pSrc = source_.P(0, 1);
      observed_ = Chain2::iid(pSrc * ePlusGivenPlus + (1 - pSrc) * ePlusGivenMinus);
    } else if (ePlusGivenPlus == 1 && ePlusGivenMinus == 0) {
      observed_ = source_.decimate(spacing_);
    }
  }

  int dim() const override { return 1; }

  FiniteMeasure marginal(const Region& window) const override {
    requireDim(window, 1, "emissionChainRecipe");
    if (window.size() > 20) throw EngineError("emission marginal above 20 sites");
    const std::uint64_t n = std::uint64_t{1} << window.size();
    Eigen::VectorXd logw(static_cast<Eigen::Index>(n));
    for (std::uint64_t idx = 0; idx < n; ++idx) logw[static_cast<Eigen::Index>(idx)] = logMass(window, idx);
    return FiniteMeasure::fromLogWeights(window, logw);
  }

  double logMass(const Region& window, std::uint64_t index) const override {
    requireDim(window, 1, "emissionChainRecipe");
    const auto& sites = window.sites();
    Eigen::Vector2d v = source_.pi;
    double logAcc = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i > 0) {
        const int gap = spacing_ * (sites[i][0] - sites[i - 1][0]);
        v = source_.power(gap).transpose() * v;
      }
      const int s = (index >> i) & 1u;
      v = v.cwiseProduct(emit_.row(s).transpose());
      const double scale = v.sum();
      if (scale <= 0) return kNegInf;
      logAcc += std::log(scale);
      v /= scale;
    }
    return logAcc;
  }

  std::optional<Chain2> asChain() const override { return observed_; }

  bool independentAcross(const Region& a, const Region& b) const override {
    return iid_ && disjoint(a, b);
  }

  std::string describe() const override { return label_; }

private:
  Chain2 source_;
  int spacing_;
  Eigen::Matrix2d emit_;  // emit_(s, a) = P(observe s | source a), index 0 <-> -1
  std::optional<Chain2> observed_;
  bool iid_ = false;
  std::string label_;
};

class WindowGibbsRecipe final : public MeasureRecipe {
public:
  WindowGibbsRecipe(SpinSystem sys, std::string label)
      : sys_(std::move(sys)), full_(enumerateMeasure(sys_)), label_(std::move(label)) {}

  int dim() const override { return sys_.window.dim(); }

  FiniteMeasure marginal(const Region& window) const override {
    if (!isSubset(window, sys_.window))
      throw ContractError("windowGibbsRecipe: query leaves the enumerated window");
    return full_.marginal(window);
  }

  std::string describe() const override { return label_; }

private:
  SpinSystem sys_;
  FiniteMeasure full_;
  std::string label_;
};

class StripGibbsRecipe final : public MeasureRecipe {
public:
  StripGibbsRecipe(Strip strip, std::string label)
      : strip_(std::move(strip)), label_(std::move(label)) {}

  int dim() const override { return 2; }

  FiniteMeasure marginal(const Region& window) const override {
    requireDim(window, 2, "stripGibbsRecipe");
    return jointMarginal(strip_, window);
  }

  std::string describe() const override { return label_; }

private:
  Strip strip_;
  std::string label_;
};

class StripRowRecipe final : public MeasureRecipe {
public:
  StripRowRecipe(Strip strip, int yRow, std::string label)
      : strip_(std::move(strip)), y_(yRow), label_(std::move(label)) {
    if (y_ < strip_.y0 || y_ >= strip_.y0 + strip_.width)
      throw ContractError("stripRowRecipe: row outside the strip");
  }

  int dim() const override { return 1; }

  FiniteMeasure marginal(const Region& window) const override {
    requireDim(window, 1, "stripRowRecipe");
    std::vector<Site> mapped;
    mapped.reserve(window.size());
    for (const Site& s : window.sites()) mapped.push_back(site(s[0], y_));
    // same x order, same y: canonical orders agree, the table carries over
    const FiniteMeasure m2 = jointMarginal(strip_, Region::ofSites(2, std::move(mapped)));
    return FiniteMeasure(window, m2.probabilities());
  }

  std::string describe() const override { return label_; }

private:
  Strip strip_;
  int y_;
  std::string label_;
};

}  // namespace

RecipePtr productRecipe(int dim, double pPlus) {
  return std::make_shared<ProductRecipe>(dim, pPlus);
}

RecipePtr chainRecipe(Chain2 chain, std::string label) {
  return std::make_shared<ChainRecipe>(std::move(chain), std::move(label));
}

RecipePtr gibbsChainRecipe(const Interaction& phi) {
  std::ostringstream ss;
  ss << "chain1d J=" << phi.j << " h=" << phi.h << " beta=" << phi.beta;
  return chainRecipe(Chain2::gibbs(phi), ss.str());
}

RecipePtr decimatedChainRecipe(const Interaction& phi, int spacing) {
  if (spacing < 1) throw ContractError("decimatedChainRecipe: spacing must be >= 1");
  std::ostringstream ss;
  ss << "decimated(b=" << spacing << ") chain1d J=" << phi.j << " h=" << phi.h
     << " beta=" << phi.beta;
  return chainRecipe(Chain2::gibbs(phi).decimate(spacing), ss.str());
}

RecipePtr emissionChainRecipe(Chain2 source, int spacing, double emitPlusGivenMinus,
                              double emitPlusGivenPlus, std::string label) {
  return std::make_shared<EmissionRecipe>(std::move(source), spacing, emitPlusGivenMinus,
                                          emitPlusGivenPlus, std::move(label));
}

RecipePtr windowGibbsRecipe(SpinSystem sys, std::string label) {
  return std::make_shared<WindowGibbsRecipe>(std::move(sys), std::move(label));
}

RecipePtr stripGibbsRecipe(Strip strip, std::string label) {
  return std::make_shared<StripGibbsRecipe>(std::move(strip), std::move(label));
}

RecipePtr stripRowRecipe(Strip strip, int yRow, std::string label) {
  return std::make_shared<StripRowRecipe>(std::move(strip), yRow, std::move(label));
}

}  // namespace spinlab
