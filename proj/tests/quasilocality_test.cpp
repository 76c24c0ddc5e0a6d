#include <doctest.h>

#include <cmath>
#include <spinlab/quasilocality.hpp>
#include <spinlab/renormalization.hpp>

using namespace spinlab;

TEST_SUITE_BEGIN("quasilocality");

TEST_CASE("chi tails are pairwise distinct far out") {
  const TailFamily fam;
  const Tail chi2 = fam.chi(2);
  CHECK(chi2.spin(site(0)) == -1);
  CHECK(chi2.spin(site(4)) == -1);
  CHECK(chi2.spin(site(-8)) == -1);
  CHECK(chi2.spin(site(3)) == +1);
  CHECK(chi2.spin(site(5)) == +1);
  CHECK(fam.pairwiseDistinct(10, 50));
  CHECK_THROWS_AS(fam.chi(0), ContractError);
}

TEST_CASE("spliceAt keeps a core and swaps the tail") {
  const TailFamily fam;
  const TailedConfiguration eta = spliceAt(fam.base(), 3, fam.chi(2));
  for (int x = -3; x <= 3; ++x) CHECK(eta.spin(site(x)) == +1);
  CHECK(eta.spin(site(4)) == -1);
  CHECK(eta.spin(site(5)) == +1);
  CHECK(eta.spin(site(-4)) == -1);
}

TEST_CASE("ladder values of the counterexample function") {
  const TailFamily fam;
  const int nMax = 1000, mMax = 30;
  const auto at = [&](int n, int m) {
    return counterexampleF(spliceAt(fam.base(), n, fam.chi(m)), fam, nMax, mMax);
  };
  CHECK(at(3, 2) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  CHECK(at(3, 8) == doctest::Approx(8.0 / 11.0).epsilon(1e-15));
  CHECK(at(7, 20) == doctest::Approx(20.0 / 27.0).epsilon(1e-15));
  CHECK(at(5, 4) == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

  // the base point and fixed-tail approaches of it score zero
  CHECK(counterexampleF(fam.base(), fam, nMax, mMax) == 0.0);
  const auto f = counterexampleFunction(fam, nMax, mMax);
  for (int r = 1; r <= 6; ++r)
    CHECK((*f)(spliceAt(fam.base(), r, Tail::allMinus())) == 0.0);
  CHECK((*f)(spliceAt(fam.base(), 4, Tail::alternating(1))) == 0.0);
}

TEST_CASE("probe-set variation reproduces the truncated supremum at the base point") {
  const TailFamily fam;
  const int mMax = 20;
  const auto f = counterexampleFunction(fam, 1000, mMax);
  for (int n = 1; n <= 5; ++n) {
    const VariationReport rep = variationAt(*f, fam.base(), n, mMax);
    CHECK(rep.value == static_cast<double>(mMax) / (n + mMax));
    CHECK(rep.probes > 0);
    CHECK(!rep.exact);
  }
}

TEST_CASE("variation of local and kernel functions") {
  const auto constant = localConfigFunction(LocalFunction::constant(1, 4.2));
  CHECK(variationAt(*constant, TailedConfiguration::uniform(1, +1), 1).value == 0.0);

  const auto gamma = gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 0));
  const auto gf = kernelExpectationFunction(gamma, LocalFunction::spinAt(1, site(0)));
  const VariationReport far = variationAt(*gf, TailedConfiguration::uniform(1, +1), 3);
  CHECK(far.value == 0.0);
  CHECK(far.exact);
  // inside the dependence range the spread is genuine
  const VariationReport near = variationAt(*gf, TailedConfiguration::uniform(1, +1), 0);
  CHECK(near.value > 0.1);
}

TEST_CASE("directional discrepancies of finite-range kernels die exactly") {
  const auto gamma = gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 0));
  const auto gf = kernelExpectationFunction(gamma, LocalFunction::spinAt(1, site(0)));
  const DirectionalReport rep =
      directionalDelta(*gf, TailedConfiguration::uniform(1, +1), Tail::allMinus(), 2, 6);
  CHECK(rep.value == 0.0);
  CHECK(rep.referenceSubstituted);
  CHECK_THROWS_AS(
      directionalDelta(*gf, TailedConfiguration::uniform(1, +1), Tail::allMinus(), 6, 6),
      ContractError);

  const auto kernelOverload = directionalDelta(gamma, LocalFunction::spinAt(1, site(0)),
                                               TailedConfiguration::uniform(1, +1),
                                               Tail::allMinus(), 2, 6);
  CHECK(kernelOverload.value == 0.0);
}

TEST_CASE("directional evaluations of the counterexample ladder shrink with the core") {
  const TailFamily fam;
  const auto f = counterexampleFunction(fam, 1000, 1000);
  const Tail theta = fam.chi(3);
  double prev = 2.0;
  for (int m = 1; m <= 8; ++m) {
    const DirectionalReport rep = directionalDelta(*f, fam.base(), theta, m, 64);
    // splice radius m matches n = m, so the value is 3/(m+3) against 3/67
    CHECK(rep.atM == doctest::Approx(3.0 / (m + 3)).epsilon(1e-15));
    CHECK(rep.value < prev);
    prev = rep.value;
  }
}

TEST_CASE("two-dimensional image kernels forget the fill at high temperature") {
  RenormScenario s;
  s.phi = Interaction(1.0, 0.0, 0.2);
  s.t = Transformation::decimation(2, 2);
  s.imageVolume = Region::ofSites(2, {site(0, 0)});
  s.fImage = LocalFunction::spinAt(2, site(0, 0));
  s.stripWidth = 3;
  s.engine = "strip";
  std::vector<Site> cond;
  for (int x = -7; x <= 7; ++x)
    if (x != 0) cond.push_back(site(x, 0));
  const Region window = Region::ofSites(2, cond);
  s.fillRegion = window;
  std::vector<int8_t> alternating;
  for (const Site& x : window.sites())
    alternating.push_back(static_cast<int8_t>(mathMod(x[0], 2) == 0 ? 1 : -1));
  s.condition = TailedConfiguration(window, alternating, Tail::allPlus());

  const auto F = kernelExpectationFunction(renormKernelRecipe(s), s.fImage);
  const TailedConfiguration omega(window, alternating, Tail::allPlus());
  const DirectionalReport plus = directionalDelta(*F, omega, Tail::allPlus(), 3, 7);
  const DirectionalReport minus = directionalDelta(*F, omega, Tail::allMinus(), 3, 7);
  CHECK(std::abs(plus.atM - minus.atM) < 0.01);
}

TEST_CASE("bad sets of finite-range kernels are empty") {
  const auto gamma = gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 0));
  const auto gf = kernelExpectationFunction(gamma, LocalFunction::spinAt(1, site(0)));
  const auto mu = gibbsChainRecipe(Interaction(1.0, 0.0, 1.0));
  const BadSetPoint p = badSetProbability(*mu, *gf, Tail::allMinus(), 0.1, 2, 5);
  CHECK(p.probability == 0.0);
  CHECK(p.exact);
  CHECK(p.evaluated > 0);

  // epsilon above the total oscillation: empty whatever the kernel
  const BadSetPoint wide = badSetProbability(*mu, *gf, Tail::allMinus(), 3.0, 1, 4);
  CHECK(wide.probability == 0.0);

  CHECK_THROWS_AS(badSetProbability(*mu, *gf, Tail::allMinus(), 0.1, 2, 5, 4), EngineError);
}

TEST_CASE("noisy decimation keeps a bad set that shrinks in m and in epsilon") {
  const Interaction phi(1.0, 0.0, 1.0);
  const double p = 0.8;
  RenormScenario s;
  s.phi = phi;
  s.t = Transformation::noisyDecimation(1, 2, p);
  s.imageVolume = Region::ofSites(1, {site(0)});
  s.fImage = LocalFunction::spinAt(1, site(0));
  const Region window = regionMinus(Region::cube(1, 5), s.imageVolume);
  s.condition = TailedConfiguration(window, std::vector<int8_t>(window.size(), 1),
                                    Tail::allPlus());
  const auto F = kernelExpectationFunction(renormKernelRecipe(s), s.fImage);

  const double eMinus = 1.0 / (1.0 + std::exp(2 * p));
  const double ePlus = 1.0 / (1.0 + std::exp(-2 * p));
  const auto mu = emissionChainRecipe(Chain2::gibbs(phi), 2, eMinus, ePlus, "noisy image");

  const BadSetRecord rec = badSetRecord(*mu, *F, Tail::allMinus(), 0.01, {1, 2, 3}, 5);
  REQUIRE(rec.points.size() == 3);
  CHECK(rec.points[0].probability > 0.0);
  for (std::size_t i = 1; i < rec.points.size(); ++i)
    CHECK(rec.points[i].probability <= rec.points[i - 1].probability + 1e-12);

  double prev = 2.0;
  for (double eps : {0.001, 0.01, 0.1}) {
    const BadSetPoint q = badSetProbability(*mu, *F, Tail::allMinus(), eps, 2, 5);
    CHECK(q.probability <= prev + 1e-12);
    prev = q.probability;
  }
}

TEST_CASE("continuity rate normalizes log probabilities") {
  BadSetRecord zeros;
  zeros.epsilon = 0.01;
  zeros.mRef = 9;
  for (int m : {1, 2, 3}) zeros.points.push_back({m, 0.0, 0.0, 16, true});
  const RateSeries flat = continuityRate(zeros, {1.0, 2.0, 3.0});
  for (double e : flat.entries) CHECK(std::isinf(e));
  CHECK(std::isinf(flat.limsupEstimate));

  BadSetRecord synth;
  synth.epsilon = 0.01;
  synth.mRef = 9;
  std::vector<double> alpha;
  for (int m = 1; m <= 5; ++m) {
    synth.points.push_back({m, std::exp(-0.7 * m), 0.0, 16, true});
    alpha.push_back(m);
  }
  const RateSeries rate = continuityRate(synth, alpha);
  for (double e : rate.entries) CHECK(e == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(rate.limsupEstimate == doctest::Approx(-0.7).epsilon(1e-12));

  CHECK_THROWS_AS(continuityRate(synth, {1.0}), ContractError);
}

TEST_CASE("proposition-style bounds") {
  const std::vector<double> alpha{1, 2, 3};
  const auto zeroH = prop1Bound({0, 0, 0}, alpha, 1.0, 0.5);
  CHECK(zeroH[0] == doctest::Approx(1.2130613194252668).epsilon(1e-14));
  CHECK(zeroH[1] == doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK(zeroH[2] == doctest::Approx(0.1487534400989532).epsilon(1e-14));

  // linear entropy growth pins the bound near 1/delta
  std::vector<double> h, a;
  for (int m = 1; m <= 40; ++m) {
    h.push_back(m);
    a.push_back(m);
  }
  const auto linear = prop1Bound(h, a, 1.0, 0.5);
  for (double v : linear) CHECK(v >= 2.0);
  CHECK(linear.back() == doctest::Approx(2.0).epsilon(1e-3));

  CHECK_THROWS_AS(prop1Bound({0.0}, {1.0}, 0.5, 0.5), ContractError);
  CHECK_THROWS_AS(prop1Bound({0.0}, {1.0}, 0.5, 0.7), ContractError);
}

TEST_SUITE_END();
