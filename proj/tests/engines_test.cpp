#include <doctest.h>

#include <cmath>
#include <spinlab/enumerate.hpp>
#include <spinlab/mc.hpp>
#include <spinlab/strip.hpp>
#include <spinlab/transfer1d.hpp>

using namespace spinlab;

TEST_SUITE_BEGIN("engines");

TEST_CASE("two-site free chain probabilities") {
  SpinSystem sys{Interaction(1.0, 0.0, 1.0), Region::ofSites(1, {site(0), site(1)}), std::nullopt,
                 {}, false};
  const FiniteMeasure mu = enumerateMeasure(sys);
  // single bond: weights e, 1/e, 1/e, e
  CHECK(mu.prob(0b11) == doctest::Approx(0.4403985389889412).epsilon(1e-14));
  CHECK(mu.prob(0b00) == doctest::Approx(0.4403985389889412).epsilon(1e-14));
  CHECK(mu.prob(0b01) == doctest::Approx((1.0 - 2 * 0.4403985389889412) / 2).epsilon(1e-12));
}

TEST_CASE("zero temperature of the enumerator is uniform; constraints pin") {
  SpinSystem sys{Interaction(1.0, 0.3, 0.0), Region::cube(1, 1), std::nullopt, {}, false};
  const FiniteMeasure mu = enumerateMeasure(sys);
  for (std::uint64_t i = 0; i < 8; ++i) CHECK(mu.prob(i) == doctest::Approx(0.125));

  SpinSystem pinned = sys;
  for (const Site& s : sys.window.sites()) pinned = pinned.withConstraint(s, -1);
  const FiniteMeasure pt = enumerateMeasure(pinned);
  CHECK(pt.prob(0) == doctest::Approx(1.0));
  for (std::uint64_t i = 1; i < 8; ++i) CHECK(pt.prob(i) == 0.0);
}

TEST_CASE("configEnergy counts interior bonds once and boundary bonds against the exterior") {
  SpinSystem sys{Interaction(1.0, 0.5, 1.0), Region::ofSites(1, {site(0), site(1)}),
                 TailedConfiguration::uniform(1, +1), {}, false};
  // all plus: bond +1, fields 2*0.5, exterior bonds at -1 and 2 both +1
  CHECK(configEnergy(sys, 0b11) == doctest::Approx(1.0 + 1.0 + 2.0));
  // center flip costs both the interior bond and one exterior bond
  CHECK(configEnergy(sys, 0b10) == doctest::Approx(-1.0 + 0.0 + (-1.0 + 1.0)));
}

TEST_CASE("transfer matrix agrees with enumeration on every boundary") {
  const Interaction phi(1.0, 0.2, 0.7);
  for (const auto boundary :
       {ChainBoundary::Free, ChainBoundary::Plus, ChainBoundary::Minus, ChainBoundary::Periodic}) {
    const TransferSummary ts = transferMatrix1D(phi, 5, boundary, {1, 2});
    SpinSystem sys{phi, Region::cube(1, 5), std::nullopt, {}, false};
    if (boundary == ChainBoundary::Plus) sys.exterior = TailedConfiguration::uniform(1, +1);
    if (boundary == ChainBoundary::Minus) sys.exterior = TailedConfiguration::uniform(1, -1);
    if (boundary == ChainBoundary::Periodic) sys.ringX = true;
    CHECK(ts.logZ == doctest::Approx(enumerateLogPartition(sys)).epsilon(1e-12));
    const FiniteMeasure mu = enumerateMeasure(sys);
    const FiniteMeasure center = mu.marginal(Region::ofSites(1, {site(0)}));
    CHECK(ts.centerMarginal.prob(1) == doctest::Approx(center.prob(1)).epsilon(1e-10));
    const LocalFunction pair = LocalFunction::pairProduct(1, site(0), site(1));
    CHECK(ts.pairCorrelations[0] == doctest::Approx(mu.expectation(pair)).epsilon(1e-10));
  }
}

TEST_CASE("transfer limits") {
  // periodic log partition per site approaches log(e + 1/e)
  const TransferSummary big = transferMatrix1D(Interaction(1.0, 0.0, 1.0), 40,
                                               ChainBoundary::Periodic);
  CHECK(big.logZPerSite == doctest::Approx(1.1269280110429725).epsilon(1e-9));
  CHECK(logLambdaMax(Interaction(1.0, 0.0, 1.0)) ==
        doctest::Approx(1.1269280110429725).epsilon(1e-14));

  // decoupled sites magnetize to tanh(beta h)
  const TransferSummary dec = transferMatrix1D(Interaction(0.0, 0.4, 1.5), 6,
                                               ChainBoundary::Free);
  const double m = dec.centerMarginal.prob(1) - dec.centerMarginal.prob(0);
  CHECK(m == doctest::Approx(std::tanh(1.5 * 0.4)).epsilon(1e-12));

  // infinite temperature
  CHECK(transferMatrix1D(Interaction(1.0, 1.0, 0.0), 5, ChainBoundary::Periodic).logZPerSite ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("free-chain pair correlation is tanh(beta)^distance") {
  Chain1D chain{Interaction(1.0, 0.0, 1.0), -8, 8, ChainBoundary::Free, {}};
  const double t = std::tanh(1.0);
  for (int d = 1; d <= 5; ++d)
    CHECK(pairCorrelation(chain, 0, d) == doctest::Approx(std::pow(t, d)).epsilon(1e-12));
}

TEST_CASE("constrained chain marginals renormalize") {
  Chain1D chain{Interaction(1.0, 0.0, 1.0), -3, 3, ChainBoundary::Free, {}};
  const Chain1D pinned = chain.withConstraint(0, +1);
  const FiniteMeasure law = jointMarginal(pinned, Region::ofSites(1, {site(0), site(1)}));
  CHECK(law.prob(0b00) == 0.0);
  CHECK(law.prob(0b10) == 0.0);
  // neighbor of a pinned + spin follows the two-state Boltzmann weight
  CHECK(law.prob(0b11) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)))
                              .epsilon(1e-12));
}

TEST_CASE("stationary chain laws") {
  const Chain2 c = Chain2::gibbs(Interaction(1.0, 0.0, 1.0));
  const double p = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
  CHECK(c.P(1, 1) == doctest::Approx(p).epsilon(1e-14));
  CHECK(c.pi(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.expectation(LocalFunction::pairProduct(1, site(0), site(3)))
        == doctest::Approx(std::pow(std::tanh(1.0), 3)).epsilon(1e-12));

  // decimation composes transitions
  const Chain2 d = c.decimate(2);
  CHECK(d.P(1, 1) == doctest::Approx(p * p + (1 - p) * (1 - p)).epsilon(1e-14));

  // marginal of nonadjacent sites multiplies powers of P
  const FiniteMeasure two = c.marginal(Region::ofSites(1, {site(0), site(5)}));
  CHECK(two.prob(0b11) == doctest::Approx(0.5 * c.power(5)(1, 1)).epsilon(1e-13));

  CHECK(relEntropyRate(c, c) == 0.0);
  CHECK(relEntropyRate(Chain2::gibbs(Interaction(1.0, 0.0, 1.0)),
                       Chain2::gibbs(Interaction(1.0, 0.0, 0.5)))
        == doctest::Approx(0.06713075445313267).epsilon(1e-12));
  // absolute continuity failure
  CHECK(std::isinf(relEntropyRate(Chain2::iid(0.5), Chain2::ofPersistence(1 - 1e-18, 1 - 1e-18))));
}

TEST_CASE("tilted sums: iid spin tilt factorizes exactly") {
  const Chain2 nu = Chain2::iid(0.5);
  LocalFunction f = LocalFunction::spinAt(1, site(0));
  std::vector<double> scaled(f.table());
  for (double& v : scaled) v *= 0.3;
  const LocalFunction f03(f.support(), scaled);
  for (int n : {1, 4, 9}) {
    CHECK(tiltedRingLogSum(nu, f03, n) / n ==
          doctest::Approx(std::log(std::cosh(0.3))).epsilon(1e-13));
  }
  CHECK(tiltedLogLambda(nu, f03) == doctest::Approx(std::log(std::cosh(0.3))).epsilon(1e-13));
}

TEST_CASE("tilted ring sums converge to the tilted eigenvalue") {
  const Chain2 nu = Chain2::gibbs(Interaction(1.0, 0.0, 0.5));
  const LocalFunction pair = LocalFunction::pairProduct(1, site(0), site(1));
  const double lam = tiltedLogLambda(nu, pair);
  const double at8 = std::abs(tiltedRingLogSum(nu, pair, 8) / 8 - lam);
  const double at16 = std::abs(tiltedRingLogSum(nu, pair, 16) / 16 - lam);
  const double at32 = std::abs(tiltedRingLogSum(nu, pair, 32) / 32 - lam);
  CHECK(at16 < at8);
  CHECK(at32 < at16);
  CHECK(at32 < 1e-6);
}

TEST_CASE("strip engine matches enumeration") {
  const Interaction phi(1.0, 0.15, 0.6);
  Strip strip{phi, -1, 1, -1, 3, std::nullopt, {}};
  SpinSystem sys{phi, Region::cube(2, 1), std::nullopt, {}, false};
  CHECK(logPartition(strip) == doctest::Approx(enumerateLogPartition(sys)).epsilon(1e-11));

  const Region probe = Region::ofSites(2, {site(0, 0), site(1, 0)});
  const FiniteMeasure viaStrip = jointMarginal(strip, probe);
  const FiniteMeasure viaEnum = enumerateMeasure(sys).marginal(probe);
  for (std::uint64_t i = 0; i < 4; ++i)
    CHECK(viaStrip.prob(i) == doctest::Approx(viaEnum.prob(i)).epsilon(1e-11));

  Strip walled = strip;
  walled.exterior = TailedConfiguration::uniform(2, +1);
  SpinSystem sysWalled = sys;
  sysWalled.exterior = TailedConfiguration::uniform(2, +1);
  const LocalFunction f = LocalFunction::spinAt(2, site(0, 0));
  CHECK(expectation(walled, f) ==
        doctest::Approx(enumerateMeasure(sysWalled).expectation(f)).epsilon(1e-11));

  Strip pinned = walled.withConstraint(site(1, 1), -1);
  SpinSystem sysPinned = sysWalled.withConstraint(site(1, 1), -1);
  CHECK(expectation(pinned, f) ==
        doctest::Approx(enumerateMeasure(sysPinned).expectation(f)).epsilon(1e-11));
}

TEST_CASE("strip width cap") {
  Strip strip{Interaction(1.0, 0.0, 1.0), 0, 4, 0, 15, std::nullopt, {}};
  CHECK_THROWS_AS(logPartition(strip), EngineError);
}

TEST_CASE("counter-based uniforms are pure in their coordinates") {
  const double a = mcUniform(7, 1, 2, 3);
  CHECK(a == mcUniform(7, 1, 2, 3));
  CHECK(a != mcUniform(8, 1, 2, 3));
  CHECK(a > 0.0);
  CHECK(a < 1.0);
}

TEST_CASE("sampler streams are reproducible and respect constraints") {
  SpinSystem sys{Interaction(1.0, 0.0, 1.0), Region::cube(1, 4), std::nullopt, {}, false};
  sys = sys.withConstraint(site(2), -1);
  McSchedule sched;
  sched.chains = 2;
  sched.sweeps = 64;
  sched.burnIn = 16;
  sched.seed = 42;
  const SampleStream s1 = mcSample(sys, sched);
  const SampleStream s2 = mcSample(sys, sched);
  CHECK(s1.samples == s2.samples);

  McSchedule threaded = sched;
  threaded.threads = 4;
  CHECK(mcSample(sys, threaded).samples == s1.samples);

  const int bit = *sys.window.indexOf(site(2));
  for (const auto& chain : s1.samples)
    for (std::uint64_t cfg : chain) CHECK(((cfg >> bit) & 1u) == 0u);
}

TEST_CASE("free coins at infinite temperature") {
  SpinSystem sys{Interaction(1.0, 0.0, 0.0), Region::cube(1, 4), std::nullopt, {}, false};
  McSchedule sched;
  sched.seed = 3;
  const SampleStream s = mcSample(sys, sched);
  const McEstimate est = empiricalEstimate(s, LocalFunction::spinAt(1, site(0)));
  CHECK(std::abs(est.mean) < 3 * est.standardError);
  const McEstimate c = empiricalEstimate(s, LocalFunction::constant(1, 2.5));
  CHECK(c.mean == doctest::Approx(2.5));
  CHECK(c.standardError == 0.0);
}

TEST_CASE("sampler agrees with the exact engines") {
  const Interaction phi(1.0, 0.0, 1.0);
  SpinSystem sys{phi, Region::cube(1, 8), std::nullopt, {}, false};
  McSchedule sched;
  sched.seed = 11;
  sched.sweeps = 8192;
  const SampleStream s = mcSample(sys, sched);
  const LocalFunction pair = LocalFunction::pairProduct(1, site(0), site(1));
  const McEstimate est = empiricalEstimate(s, pair);
  const double exact = enumerateMeasure(sys).expectation(pair);
  CHECK(std::abs(est.mean - exact) < 3 * est.standardError);
  CHECK(integratedAutocorrelation(s, pair) > 0.0);

  // all but one site pinned: the free spin follows the two-state Boltzmann law
  SpinSystem pinned = sys;
  for (const Site& x : sys.window.sites())
    if (!(x == site(0))) pinned = pinned.withConstraint(x, +1);
  const SampleStream ps = mcSample(pinned, sched);
  const McEstimate pest = empiricalEstimate(ps, LocalFunction::spinAt(1, site(0)));
  const double pPlus = std::exp(2.0) / (std::exp(2.0) + std::exp(-2.0));
  CHECK(std::abs(pest.mean - (2 * pPlus - 1)) < 3 * pest.standardError);
}

TEST_CASE("empirical law concentrates near the exact window law") {
  SpinSystem sys{Interaction(1.0, 0.1, 0.8), Region::cube(1, 3), std::nullopt, {}, false};
  McSchedule sched;
  sched.seed = 5;
  sched.sweeps = 8192;
  const SampleStream s = mcSample(sys, sched);
  const Region probe = Region::ofSites(1, {site(0), site(1)});
  const FiniteMeasure emp = empiricalLaw(s, probe);
  const FiniteMeasure exact = enumerateMeasure(sys).marginal(probe);
  CHECK(totalVariation(emp, exact) < 0.02);
}

TEST_CASE("coupled plus and minus chains stay ordered pathwise") {
  SpinSystem plus{Interaction(1.0, 0.0, 0.9), Region::cube(1, 5),
                  TailedConfiguration::uniform(1, +1), {}, false};
  SpinSystem minus = plus;
  minus.exterior = TailedConfiguration::uniform(1, -1);
  McSchedule sched;
  sched.seed = 17;
  sched.sweeps = 1024;
  const LocalFunction mag = LocalFunction::magnetization(Region::cube(1, 1));
  const CouplingReport rep = coupledPlusMinus(plus, minus, mag, sched);
  CHECK(rep.dominatedFraction() == 1.0);
  CHECK(rep.plus.mean >= rep.minus.mean);
}

TEST_SUITE_END();
