#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <spinlab/measure.hpp>

using namespace spinlab;

TEST_SUITE_BEGIN("measure");

TEST_CASE("construction and normalization") {
  const Region r = Region::cube(1, 1);
  Eigen::VectorXd w(8);
  for (int i = 0; i < 8; ++i) w[i] = i + 1.0;
  const FiniteMeasure mu = FiniteMeasure::fromWeights(r, w);
  CHECK(mu.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mu.prob(7) == doctest::Approx(8.0 / 36.0));
  mu.validate();

  Eigen::VectorXd lw(2);
  lw << 700.0, 700.0 + std::log(3.0);  // overflow without the max shift
  const FiniteMeasure nu = FiniteMeasure::fromLogWeights(Region::cube(1, 0), lw);
  CHECK(nu.prob(1) == doctest::Approx(0.75).epsilon(1e-14));

  Eigen::VectorXd bad(2);
  bad << 1.0, -0.5;
  CHECK_THROWS_AS(FiniteMeasure::fromWeights(Region::cube(1, 0), bad), ContractError);
}

TEST_CASE("point mass, uniform, product bernoulli") {
  const Region r = Region::ofSites(1, {site(0), site(1)});
  const FiniteMeasure pt = FiniteMeasure::pointMass(r, 0b01);
  CHECK(pt.prob(0b01) == 1.0);
  CHECK(pt.prob(0b10) == 0.0);
  CHECK(FiniteMeasure::uniform(r).prob(3) == doctest::Approx(0.25));
  const FiniteMeasure ber = FiniteMeasure::productBernoulli(r, 0.75);
  CHECK(ber.prob(0b11) == doctest::Approx(0.75 * 0.75));
  CHECK(ber.prob(0b01) == doctest::Approx(0.75 * 0.25));
}

TEST_CASE("expectation and marginal") {
  const Region r = Region::ofSites(1, {site(0), site(1)});
  const FiniteMeasure ber = FiniteMeasure::productBernoulli(r, 0.8);
  const LocalFunction s0 = LocalFunction::spinAt(1, site(0));
  CHECK(ber.expectation(s0) == doctest::Approx(0.6).epsilon(1e-14));  // 2p - 1
  const FiniteMeasure m = ber.marginal(Region::ofSites(1, {site(1)}));
  CHECK(m.prob(1) == doctest::Approx(0.8).epsilon(1e-14));

  // marginal of a correlated table still sums the right fibers
  Eigen::VectorXd w(4);
  w << 0.1, 0.2, 0.3, 0.4;
  const FiniteMeasure mu = FiniteMeasure::fromWeights(r, w);
  const FiniteMeasure m0 = mu.marginal(Region::ofSites(1, {site(0)}));
  CHECK(m0.prob(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(m0.prob(1) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("product of independent pieces") {
  const FiniteMeasure a = FiniteMeasure::productBernoulli(Region::ofSites(1, {site(0)}), 0.3);
  const FiniteMeasure b = FiniteMeasure::productBernoulli(Region::ofSites(1, {site(2)}), 0.9);
  const FiniteMeasure ab = product(a, b);
  CHECK(ab.support().size() == 2);
  CHECK(ab.prob(0b11) == doctest::Approx(0.27).epsilon(1e-14));
  const FiniteMeasure backA = ab.marginal(a.support());
  CHECK(backA.prob(1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(product(a, a), ContractError);
}

TEST_CASE("total variation") {
  const Region r = Region::ofSites(1, {site(0)});
  const FiniteMeasure p = FiniteMeasure::productBernoulli(r, 0.9);
  const FiniteMeasure q = FiniteMeasure::productBernoulli(r, 0.4);
  CHECK(totalVariation(p, q) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(totalVariation(p, p) == 0.0);
  // symmetric and bounded by 1
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int k = 0; k < 50; ++k) {
    const FiniteMeasure x = FiniteMeasure::productBernoulli(r, u(rng));
    const FiniteMeasure y = FiniteMeasure::productBernoulli(r, u(rng));
    const double d = totalVariation(x, y);
    CHECK(d == doctest::Approx(totalVariation(y, x)).epsilon(1e-14));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("translate shifts the support and keeps the table") {
  const Region r = Region::ofSites(1, {site(0), site(1)});
  Eigen::VectorXd w(4);
  w << 0.1, 0.2, 0.3, 0.4;
  const FiniteMeasure mu = FiniteMeasure::fromWeights(r, w);
  const FiniteMeasure shifted = translate(mu, site(5));
  CHECK(shifted.support().contains(site(5)));
  CHECK(shifted.support().contains(site(6)));
  for (std::uint64_t i = 0; i < 4; ++i) CHECK(shifted.prob(i) == mu.prob(i));
}

TEST_CASE("embedding and extractIndex invert each other") {
  const Region sup = Region::cube(1, 2);
  const Region sub = Region::ofSites(1, {site(-1), site(2)});
  const auto emb = embedding(sub, sup);
  REQUIRE(emb.size() == 2);
  for (std::uint64_t idx = 0; idx < 32; ++idx) {
    std::uint64_t expect = 0;
    if ((idx >> 1) & 1u) expect |= 1u;  // site -1 sits at bit 1 of the cube
    if ((idx >> 4) & 1u) expect |= 2u;  // site 2 sits at bit 4
    CHECK(extractIndex(idx, emb) == expect);
  }
  CHECK_THROWS_AS(embedding(Region::ofSites(1, {site(9)}), sup), ContractError);
}

TEST_SUITE_END();
