#include <doctest.h>

#include <cmath>
#include <random>
#include <spinlab/renormalization.hpp>
#include <spinlab/thermo.hpp>

using namespace spinlab;

namespace {

// fixed finite table exposed through the recipe interface
struct TableRecipe final : MeasureRecipe {
  FiniteMeasure table;
  explicit TableRecipe(FiniteMeasure t) : table(std::move(t)) {}
  int dim() const override { return table.support().dim(); }
  FiniteMeasure marginal(const Region& window) const override { return table.marginal(window); }
  std::string describe() const override { return "table"; }
};

FiniteMeasure randomMeasure(const Region& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(std::uint64_t{1} << r.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = u(rng);
  return FiniteMeasure::fromWeights(r, w);
}

LocalFunction combine(const LocalFunction& f, const LocalFunction& g, double t) {
  const Region sup = regionUnion(f.support(), g.support());
  const auto embF = embedding(f.support(), sup);
  const auto embG = embedding(g.support(), sup);
  std::vector<double> table(std::uint64_t{1} << sup.size());
  for (std::uint64_t i = 0; i < table.size(); ++i)
    table[i] = f.atIndex(extractIndex(i, embF)) + t * g.atIndex(extractIndex(i, embG));
  return LocalFunction(sup, table);
}

}  // namespace

TEST_SUITE_BEGIN("thermo");

TEST_CASE("relative entropy of finite tables") {
  const Region r = Region::ofSites(1, {site(0)});
  const FiniteMeasure half = FiniteMeasure::productBernoulli(r, 0.5);
  CHECK(relativeEntropy(half, half) == 0.0);
  const FiniteMeasure skew = FiniteMeasure::productBernoulli(r, 0.75);
  CHECK(relativeEntropy(half, skew) == doctest::Approx(0.14384103622589042).epsilon(1e-14));
  CHECK(std::isinf(relativeEntropy(FiniteMeasure::pointMass(r, 1),
                                   FiniteMeasure::pointMass(r, 0))));

  // nonnegative, zero only at equality
  std::mt19937_64 rng(2);
  const Region w = Region::cube(1, 1);
  for (int k = 0; k < 100; ++k) {
    const FiniteMeasure a = randomMeasure(w, rng);
    const FiniteMeasure b = randomMeasure(w, rng);
    const double h = relativeEntropy(a, b);
    CHECK(h >= 0.0);
    if (h < 1e-12) CHECK(totalVariation(a, b) < 1e-5);
  }
}

TEST_CASE("entropy density series") {
  const auto g05 = gibbsChainRecipe(Interaction(1.0, 0.0, 0.5));
  const EntropySeries same = entropyDensitySeries(*g05, *g05, 6);
  for (double v : same.perSite) CHECK(v < 1e-10);

  const auto g1 = gibbsChainRecipe(Interaction(1.0, 0.0, 1.0));
  const EntropySeries pair = entropyDensitySeries(*g1, *g05, 12);
  const double rate = 0.06713075445313267;  // closed-form Markov rate
  CHECK(std::abs(pair.lastIncrement - rate) / rate < 0.01);
  // window entropies grow, increments settle
  for (std::size_t i = 1; i < pair.h.size(); ++i) CHECK(pair.h[i] >= pair.h[i - 1] - 1e-12);

  const EntropySeries prod =
      entropyDensitySeries(*productRecipe(1, 0.5), *productRecipe(1, 0.25), 5);
  for (double v : prod.perSite)
    CHECK(v == doctest::Approx(0.14384103622589042).epsilon(1e-12));
}

TEST_CASE("pressure series") {
  const auto uniform = productRecipe(1, 0.5);
  const PressureSeries zero =
      pressureEstimate(LocalFunction::constant(1, 0.0), *uniform, 8);
  for (double v : zero.value) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(zero.extrapolated == doctest::Approx(0.0).epsilon(1e-14));

  const PressureSeries field =
      pressureEstimate(LocalFunction::spinAt(1, site(0)), *uniform, 8);
  for (double v : field.value)
    CHECK(v == doctest::Approx(0.4337808304830271).epsilon(1e-12));
  CHECK(field.extrapolated == doctest::Approx(0.4337808304830271).epsilon(1e-12));

  const PressureSeries pair =
      pressureEstimate(LocalFunction::pairProduct(1, site(0), site(1)), *uniform, 10);
  CHECK(pair.extrapolated == doctest::Approx(0.4337808304830271).epsilon(1e-9));
  // the periodic values carry a geometric transient and approach the same limit
  const double lastGap = std::abs(pair.value.back() - pair.extrapolated);
  const double firstGap = std::abs(pair.value[2] - pair.extrapolated);
  CHECK(lastGap < firstGap);
  CHECK(lastGap < 1e-2);
}

TEST_CASE("pressure is convex along function pencils") {
  const auto nu = gibbsChainRecipe(Interaction(1.0, 0.0, 0.5));
  const LocalFunction f = LocalFunction::pairProduct(1, site(0), site(1));
  const LocalFunction g = LocalFunction::spinAt(1, site(0));
  std::vector<double> p;
  for (int i = -2; i <= 2; ++i)
    p.push_back(pressureEstimate(combine(f, g, 0.25 * i), *nu, 6).extrapolated);
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    CHECK(p[i + 1] - 2 * p[i] + p[i - 1] >= -1e-9);
}

TEST_CASE("csiszar gap is nonnegative and vanishes at equality") {
  const auto mu = gibbsChainRecipe(Interaction(1.0, 0.0, 1.0));
  const auto nu = gibbsChainRecipe(Interaction(1.0, 0.0, 0.5));
  const Region delta = Region::cube(1, 2);
  const Region deltaPrime = Region::cube(1, 1);
  CHECK(csiszarGap(*mu, *mu, delta, deltaPrime) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(csiszarGap(*mu, *nu, delta, delta) == 0.0);
  CHECK(csiszarGap(*mu, *nu, delta, deltaPrime) >= -1e-12);

  std::mt19937_64 rng(7);
  const Region four = Region::ofSites(1, {site(-1), site(0), site(1), site(2)});
  for (int k = 0; k < 100; ++k) {
    const TableRecipe a(randomMeasure(four, rng));
    const TableRecipe b(randomMeasure(four, rng));
    CHECK(csiszarGap(a, b, four, deltaPrime) >= -1e-12);
    // volume monotonicity of the window entropies
    CHECK(relativeEntropy(a.table.marginal(deltaPrime), b.table.marginal(deltaPrime)) <=
          relativeEntropy(a.table, b.table) + 1e-12);
  }
}

TEST_CASE("decoupling constants") {
  const auto family1 = singleSiteCylinderFamily(1, 1, 1);
  const DecouplingReport prod = decouplingConstant(*productRecipe(1, 0.6), 1, 1, family1);
  CHECK(prod.constant == 0.0);
  CHECK(prod.skipped == 0);

  const auto nu = gibbsChainRecipe(Interaction(1.0, 0.0, 0.5));
  const double frozen[] = {0.24022901391655535, 0.10390176522757856, 0.046677197350082994,
                           0.021299895330195353};
  double prev = 1e9;
  for (int g = 1; g <= 4; ++g) {
    const DecouplingReport rep =
        decouplingConstant(*nu, 1, g, singleSiteCylinderFamily(1, 1, g));
    CHECK(rep.constant == doctest::Approx(frozen[g - 1]).epsilon(1e-12));
    CHECK(rep.constant > 0.0);
    CHECK(rep.constant < prev);
    CHECK(rep.skipped == 0);
    prev = rep.constant;
  }

  // decimated image keeps finite constants of comparable size
  const auto dec = decimatedChainRecipe(Interaction(1.0, 0.0, 0.5), 2);
  const DecouplingReport img = decouplingConstant(*dec, 1, 1, family1);
  CHECK(img.constant > 0.0);
  CHECK(img.constant < 1.0);

  CHECK_THROWS_AS(decouplingConstant(*nu, 1, 0, singleSiteCylinderFamily(1, 2, 0)),
                  ContractError);
}

TEST_CASE("legendre gap over trial families") {
  const auto nu = gibbsChainRecipe(Interaction(1.0, 0.0, 0.5));
  const LocalFunction zero = LocalFunction::constant(1, 0.0);
  const LegendreReport atNu = legendreGap(zero, *nu, TrialFamily::Markov1, 8);
  CHECK(atNu.pressure == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(atNu.gap < 1e-9);
  CHECK(atNu.gap >= -1e-12);
  const double aNu = std::exp(0.5) / (std::exp(0.5) + std::exp(-0.5));
  CHECK(atNu.bestA == doctest::Approx(aNu).epsilon(1e-9));
  CHECK(atNu.bestB == doctest::Approx(aNu).epsilon(1e-9));

  const LocalFunction pair = LocalFunction::pairProduct(1, site(0), site(1));
  const LegendreReport tilt = legendreGap(pair, *nu, TrialFamily::Markov1, 10);
  CHECK(tilt.pressure == doctest::Approx(0.7353256640555181).epsilon(1e-12));
  CHECK(tilt.gap >= -1e-9);
  CHECK(tilt.gap < 0.01);
  CHECK(!tilt.familyLimited);

  const LegendreReport limited = legendreGap(pair, *nu, TrialFamily::ProductOnly, 10);
  CHECK(limited.familyLimited);
  CHECK(limited.gap > 0.01);
  CHECK(limited.gap > tilt.gap);
}

TEST_CASE("cm term vanishes once the kernel dependence is enclosed") {
  const Interaction phi(1.0, 0.0, 1.0);
  const auto nu = gibbsChainRecipe(phi);
  const auto gamma = gibbsKernelRecipe(phi, Region::cube(1, 0));
  const LocalFunction f = LocalFunction::spinAt(1, site(0));

  // nearest-neighbor dependence sits inside every valid M cube, so the frozen
  // fill never reaches it and all three terms are exact zeros
  for (int M : {1, 3}) {
    const CmBreakdown b =
        cmTerm(*nu, *nu, *gamma, Region::cube(1, 0), M, Tail::allMinus(), f, 6);
    CHECK(b.cM == 0.0);
    CHECK(b.aM == 0.0);
    CHECK(b.bM == 0.0);
    CHECK(b.muGammaF == doctest::Approx(b.muF).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cmTerm(*nu, *nu, *gamma, Region::cube(1, 0), 6, Tail::allMinus(), f, 6),
                  ContractError);
}

TEST_CASE("cm term on the decimated image kernel decays by the reference radius") {
  const Interaction phi(1.0, 0.0, 1.0);
  const auto image = decimatedChainRecipe(phi, 2);
  const LocalFunction f = LocalFunction::spinAt(1, site(0));

  RenormScenario s;
  s.phi = phi;
  s.t = Transformation::decimation(1, 2);
  s.imageVolume = Region::ofSites(1, {site(0)});
  s.fImage = f;
  const Region window = regionMinus(Region::cube(1, 7), s.imageVolume);
  s.condition = TailedConfiguration(window, std::vector<int8_t>(window.size(), 1),
                                    Tail::allPlus());
  const KernelPtr gamma = renormKernelRecipe(s);

  const CmBreakdown b = cmTerm(*image, *image, *gamma, s.imageVolume, 6, Tail::allMinus(), f, 7);
  CHECK(std::abs(b.cM) < 1e-8);
  CHECK(!b.flags.empty());
  // the image law solves its own kernel, so the telescoped sum collapses
  CHECK(b.aM + b.bM + b.cM == doctest::Approx(b.muGammaF - b.muF).epsilon(1e-10));
  CHECK(std::abs(b.muGammaF - b.muF) < 1e-8);
}

TEST_SUITE_END();
