#include <doctest.h>

#include <cmath>
#include <spinlab/enumerate.hpp>
#include <spinlab/specification.hpp>

using namespace spinlab;

namespace {

// 0/1 observable of the spin at one exterior site
LocalFunction spinIndicator(int dim, const Site& s, int sign) {
  std::vector<double> table(2);
  table[sign > 0 ? 1 : 0] = 1.0;
  return LocalFunction(Region::ofSites(dim, {s}), table);
}

}  // namespace

TEST_SUITE_BEGIN("specification");

TEST_CASE("single-site kernel rows follow the two-state Boltzmann weight") {
  const auto k = gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 0));
  const FiniteMeasure row = k->row(TailedConfiguration::uniform(1, +1));
  CHECK(row.prob(1) == doctest::Approx(0.9820137900379085).epsilon(1e-14));
  const FiniteMeasure flip = k->row(TailedConfiguration::uniform(1, -1));
  CHECK(flip.prob(1) == doctest::Approx(1 - 0.9820137900379085).epsilon(1e-12));

  // beta = 0: every row uniform whatever the boundary
  const auto cold = gibbsKernelRecipe(Interaction(1.0, 0.7, 0.0), Region::cube(1, 1));
  for (std::uint64_t b = 0; b < 4; ++b) {
    const FiniteMeasure r = cold->row(fromIndex(cold->dependenceSet(), b, Tail::allPlus()));
    for (std::uint64_t i = 0; i < 8; ++i) CHECK(r.prob(i) == doctest::Approx(0.125));
  }
}

TEST_CASE("kernel rows match a hand-built Boltzmann sum on two sites") {
  const Interaction phi(1.0, 0.2, 0.8);
  const Region vol = Region::ofSites(1, {site(0), site(1)});
  const TailedConfiguration omega = TailedConfiguration::ofTail(1, Tail::alternating(1));
  const FiniteMeasure row = gibbsKernel(phi, vol, omega);
  const int wl = omega.spin(site(-1)), wr = omega.spin(site(2));
  double z = 0;
  double w[4];
  for (int idx = 0; idx < 4; ++idx) {
    const int s0 = spinOfBit(idx, 0), s1 = spinOfBit(idx, 1);
    w[idx] = std::exp(phi.beta * (phi.j * (s0 * s1 + wl * s0 + s1 * wr) + phi.h * (s0 + s1)));
    z += w[idx];
  }
  for (int idx = 0; idx < 4; ++idx)
    CHECK(row.prob(idx) == doctest::Approx(w[idx] / z).epsilon(1e-13));
}

TEST_CASE("every tabulated row is a probability vector") {
  for (const double beta : {0.0, 0.5, 1.0}) {
    const auto k = gibbsKernelRecipe(Interaction(1.0, 0.1, beta), Region::cube(1, 1));
    const KernelTable table = tabulate(*k);
    REQUIRE(table.rows.size() == 4);
    for (const FiniteMeasure& row : table.rows) {
      CHECK(row.probabilities().minCoeff() >= 0.0);
      CHECK(row.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("properness residual is exactly zero on boundary events") {
  const auto k = gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 1));
  const TailedConfiguration plus = TailedConfiguration::uniform(1, +1);
  const TailedConfiguration mixed = TailedConfiguration::ofTail(1, Tail::alternating(1));
  for (const auto& omega : {plus, mixed}) {
    CHECK(propernessCheck(*k, spinIndicator(1, site(2), +1), omega) == 0.0);
    CHECK(propernessCheck(*k, spinIndicator(1, site(2), -1), omega) == 0.0);
    CHECK(propernessCheck(*k, LocalFunction::constant(1, 1.0), omega) == 0.0);
  }
  // an event reading the interior is rejected
  CHECK_THROWS_AS(propernessCheck(*k, spinIndicator(1, site(0), +1), plus), ContractError);
}

TEST_CASE("nested Gibbs kernels are consistent, mismatched temperatures are not") {
  const Interaction phi(1.0, 0.0, 1.0);
  const auto inner = gibbsKernelRecipe(phi, Region::cube(1, 0));
  const auto outer = gibbsKernelRecipe(phi, Region::cube(1, 1));
  for (std::uint64_t b = 0; b < 4; ++b) {
    const TailedConfiguration omega = fromIndex(outer->dependenceSet(), b, Tail::allPlus());
    CHECK(consistencyCheck(*outer, *inner, omega) < 1e-12);
    // a volume composed with itself reduces to properness
    CHECK(consistencyCheck(*outer, *outer, omega) < 1e-14);
  }
  const auto colder = gibbsKernelRecipe(Interaction(1.0, 0.0, 0.5), Region::cube(1, 0));
  CHECK(consistencyCheck(*outer, *colder, TailedConfiguration::uniform(1, +1)) > 0.01);
}

TEST_CASE("finite-volume Gibbs laws solve the DLR equation") {
  const Interaction phi(1.0, 0.0, 1.0);
  const Region w = Region::cube(1, 2);
  SpinSystem sys{phi, w, TailedConfiguration::uniform(1, +1), {}, false};
  const FiniteMeasure mu = enumerateMeasure(sys);
  const auto k = gibbsKernelRecipe(phi, Region::cube(1, 0));
  CHECK(dlrResidual(mu, *k) < 1e-12);

  const FiniteMeasure point = FiniteMeasure::pointMass(w, (1u << w.size()) - 1);
  CHECK(dlrResidual(point, *k) > 0.01);

  // one application of the kernel lands on its fixed-point margin
  const Region rest = regionMinus(w, k->volume());
  Eigen::VectorXd applied = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mu.size()));
  const auto embRest = embedding(rest, w);
  const auto embVol = embedding(k->volume(), w);
  for (std::uint64_t c = 0; c < point.size(); ++c) {
    if (point.prob(c) == 0.0) continue;
    const TailedConfiguration omega =
        fromIndex(rest, extractIndex(c, embRest), Tail::allPlus());
    const FiniteMeasure row = k->row(omega);
    for (std::uint64_t v = 0; v < row.size(); ++v) {
      std::uint64_t target = c;
      for (std::size_t i = 0; i < embVol.size(); ++i)
        target = withSpin(target, embVol[i], spinOfBit(v, static_cast<int>(i)));
      applied[static_cast<Eigen::Index>(target)] += point.prob(c) * row.prob(v);
    }
  }
  const FiniteMeasure once(w, applied);
  CHECK(dlrResidual(once, *k) < 1e-12);
}

TEST_CASE("ferromagnetic kernels preserve increasing events, antiferromagnetic ones do not") {
  const KernelTable ferro =
      tabulate(*gibbsKernelRecipe(Interaction(1.0, 0.0, 1.0), Region::cube(1, 1)));
  const MonotonicityReport ok = monotonicityCheck(ferro);
  CHECK(ok.preserving);
  CHECK(ok.exhaustive);

  const KernelTable anti =
      tabulate(*gibbsKernelRecipe(Interaction(-1.0, 0.0, 1.0), Region::cube(1, 1)));
  const MonotonicityReport bad = monotonicityCheck(anti);
  CHECK(!bad.preserving);
  CHECK(bad.lowerBoundary >= 0);
  CHECK(bad.upperBoundary >= 0);
  CHECK(bad.lowerValue > bad.upperValue);
  CHECK(compareIndices(static_cast<std::uint64_t>(bad.lowerBoundary),
                       static_cast<std::uint64_t>(bad.upperBoundary),
                       static_cast<int>(anti.dependenceSet.size())) == Order::Less);

  const KernelTable cold =
      tabulate(*gibbsKernelRecipe(Interaction(-1.0, 0.3, 0.0), Region::cube(1, 1)));
  CHECK(monotonicityCheck(cold).preserving);
}

TEST_CASE("slot kernel monotonicity catches a planted violation") {
  SlotKernel k;
  k.stateBits = 1;
  k.boundaryBits = 1;
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.3, 0.7;
  hi << 0.4, 0.6;  // higher boundary, lower chance of the + state
  k.rows = {lo, hi};
  const MonotonicityReport rep = checkMonotonicity(k);
  CHECK(!rep.preserving);
  CHECK(rep.eventMask == 0b10);  // the up-set {state +}

  SlotKernel fine = k;
  fine.rows = {hi, lo};
  CHECK(checkMonotonicity(fine).preserving);
}

TEST_CASE("freezeBeyond keeps the inner spins and swaps the tail") {
  const TailedConfiguration omega = TailedConfiguration::ofTail(1, Tail::alternating(1));
  const TailedConfiguration frozen = freezeBeyond(omega, Region::cube(1, 2), Tail::allMinus());
  for (int x = -2; x <= 2; ++x) CHECK(frozen.spin(site(x)) == omega.spin(site(x)));
  for (int x : {-5, 3, 9}) CHECK(frozen.spin(site(x)) == -1);
}

TEST_CASE("directional rows stabilize once the dependence set is covered") {
  const Interaction phi(1.0, 0.0, 1.0);
  const auto k = gibbsKernelRecipe(phi, Region::cube(1, 1));
  const TailedConfiguration omega = TailedConfiguration::ofTail(1, Tail::alternating(1));
  const DirectionalRow d = directionalLimitKernel(*k, omega, -1, Region::cube(1, 2));
  CHECK(d.stabilized);
  const FiniteMeasure direct = k->row(omega);
  for (std::uint64_t i = 0; i < direct.size(); ++i)
    CHECK(d.row.prob(i) == doctest::Approx(direct.prob(i)).epsilon(1e-14));

  // S smaller than the dependence set: the fill decides, and the flag reports it
  const DirectionalRow undersized = directionalLimitKernel(*k, omega, -1, Region::cube(1, 0));
  CHECK(!undersized.stabilized);
  const FiniteMeasure allMinusRow =
      k->row(TailedConfiguration::uniform(1, -1));
  for (std::uint64_t i = 0; i < allMinusRow.size(); ++i)
    CHECK(undersized.row.prob(i) == doctest::Approx(allMinusRow.prob(i)).epsilon(1e-14));

  const DirectionalRow plusFill =
      directionalLimitKernel(*k, TailedConfiguration::uniform(1, +1), -1,
                             regionUnion(k->volume(), exteriorBoundary(k->volume())));
  CHECK(plusFill.stabilized);
  const FiniteMeasure plusRow = k->row(TailedConfiguration::uniform(1, +1));
  for (std::uint64_t i = 0; i < plusRow.size(); ++i)
    CHECK(plusFill.row.prob(i) == doctest::Approx(plusRow.prob(i)).epsilon(1e-14));
}

TEST_SUITE_END();
