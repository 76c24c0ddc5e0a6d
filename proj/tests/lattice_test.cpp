#include <doctest.h>

#include <spinlab/lattice.hpp>

using namespace spinlab;

TEST_SUITE_BEGIN("lattice");

TEST_CASE("cube sizes and site order") {
  CHECK(Region::cube(2, 0).size() == 1);
  CHECK(Region::cube(2, 0).siteAt(0) == site(0, 0));
  CHECK(Region::cube(2, 1).size() == 9);
  const Region r = Region::cube(1, 2);
  REQUIRE(r.size() == 5);
  for (int x = -2; x <= 2; ++x) CHECK(r.siteAt(x + 2) == site(x));
  // lexicographic on (x, y)
  const Region q = Region::cube(2, 1);
  CHECK(q.siteAt(0) == site(-1, -1));
  CHECK(q.siteAt(1) == site(-1, 0));
  CHECK(q.siteAt(8) == site(1, 1));
}

TEST_CASE("region algebra") {
  const Region a = Region::cube(1, 1);
  const Region b = Region::ofSites(1, {site(1), site(2)});
  CHECK(regionUnion(a, b).size() == 4);
  CHECK(regionMinus(a, b).size() == 2);
  CHECK(regionIntersect(a, b).size() == 1);
  CHECK(isSubset(regionIntersect(a, b), a));
  CHECK(disjoint(regionMinus(a, b), b));
  const Region ann = Region::annulus(1, 3, a);
  CHECK(ann.size() == 4);
  CHECK(!ann.contains(site(0)));
  CHECK(ann.contains(site(3)));
  CHECK_THROWS_AS(Region::annulus(1, 1, Region::cube(1, 2)), ContractError);
}

TEST_CASE("exterior boundary and closure") {
  const Region lam = Region::cube(1, 1);
  const Region bd = exteriorBoundary(lam);
  CHECK(bd.size() == 2);
  CHECK(bd.contains(site(-2)));
  CHECK(bd.contains(site(2)));
  CHECK(closure(lam).size() == 5);
  CHECK(exteriorBoundary(Region::cube(2, 0)).size() == 4);
}

TEST_CASE("splice keeps inner spins and hands the exterior to the tail") {
  const Region lam = Region::cube(1, 1);
  const TailedConfiguration plus = TailedConfiguration::uniform(1, +1);
  const TailedConfiguration s = splice(plus, lam, Tail::allMinus());
  for (int x = -1; x <= 1; ++x) CHECK(s.spin(site(x)) == +1);
  CHECK(s.spin(site(2)) == -1);
  CHECK(s.spin(site(-7)) == -1);

  // inner equal to outer's restriction: configuration unchanged everywhere
  const TailedConfiguration again = splice(s, lam, s.tail());
  for (int x = -9; x <= 9; ++x) CHECK(again.spin(site(x)) == s.spin(site(x)));
}

TEST_CASE("splice agrees with inner and outer exhaustively on small windows") {
  const Region lam = Region::ofSites(1, {site(-1), site(0), site(2)});
  for (std::uint64_t idx = 0; idx < 8; ++idx) {
    const TailedConfiguration inner = fromIndex(lam, idx, Tail::allPlus());
    const TailedConfiguration out = splice(inner, lam, Tail::alternating(1));
    for (std::size_t i = 0; i < lam.size(); ++i)
      CHECK(out.spin(lam.siteAt(i)) == inner.spin(lam.siteAt(i)));
    for (int x = -6; x <= 6; ++x)
      if (!lam.contains(site(x))) CHECK(out.spin(site(x)) == Tail::alternating(1).spin(site(x)));
  }
}

TEST_CASE("compare verdicts") {
  const Region two = Region::ofSites(1, {site(0), site(1)});
  const auto cfg = [&](int a, int b) {
    return TailedConfiguration(two, {static_cast<int8_t>(a), static_cast<int8_t>(b)},
                               Tail::allPlus());
  };
  CHECK(compare(cfg(+1, +1), cfg(+1, -1), 2) == Order::Greater);
  CHECK(compare(cfg(+1, -1), cfg(-1, +1), 2) == Order::Incomparable);
  CHECK(compare(cfg(-1, +1), cfg(-1, +1), 5) == Order::Equal);
}

TEST_CASE("compare is a partial order on an enumerated window") {
  const Region w = Region::cube(1, 1);
  std::vector<TailedConfiguration> all;
  for (std::uint64_t i = 0; i < 8; ++i) all.push_back(fromIndex(w, i, Tail::allPlus()));
  auto leq = [&](std::size_t i, std::size_t j) {
    const Order o = compare(all[i], all[j], 3);
    return o == Order::Equal || o == Order::Less;
  };
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(compare(all[i], all[i], 3) == Order::Equal);
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j && leq(i, j) && leq(j, i)) FAIL("antisymmetry broken");
      for (std::size_t k = 0; k < all.size(); ++k)
        if (leq(i, j) && leq(j, k)) CHECK(leq(i, k));
    }
  }
}

TEST_CASE("compareIndices follows the bitwise product order") {
  CHECK(compareIndices(0b11, 0b01, 2) == Order::Greater);
  CHECK(compareIndices(0b01, 0b01, 2) == Order::Equal);
  CHECK(compareIndices(0b01, 0b10, 2) == Order::Incomparable);
  CHECK(compareIndices(0b000, 0b111, 3) == Order::Less);
}

TEST_CASE("translate acts as a group action") {
  const TailedConfiguration eta =
      fromIndex(Region::cube(1, 1), 0b101, Tail::alternating(1));
  const TailedConfiguration same = translate(eta, site(0));
  const TailedConfiguration back = translate(translate(eta, site(3)), site(-3));
  for (int x = -8; x <= 8; ++x) {
    CHECK(same.spin(site(x)) == eta.spin(site(x)));
    CHECK(back.spin(site(x)) == eta.spin(site(x)));
  }
  // (tau_i omega)_x = omega_(x - i)
  const TailedConfiguration moved = translate(eta, site(2));
  for (int x = -6; x <= 6; ++x) CHECK(moved.spin(site(x)) == eta.spin(site(x - 2)));
}

TEST_CASE("translating spin-at-origin gives spin-at-shift on every configuration") {
  const LocalFunction f = LocalFunction::spinAt(1, site(0));
  const LocalFunction g = translate(f, site(1));
  CHECK(g.support().contains(site(1)));
  const Region two = Region::ofSites(1, {site(0), site(1)});
  for (std::uint64_t idx = 0; idx < 4; ++idx) {
    const TailedConfiguration eta = fromIndex(two, idx, Tail::allPlus());
    CHECK(g(eta) == doctest::Approx(eta.spin(site(1))).epsilon(0));
    CHECK(f(eta) == doctest::Approx(eta.spin(site(0))).epsilon(0));
  }
}

TEST_CASE("local function basics") {
  const LocalFunction pair = LocalFunction::pairProduct(1, site(0), site(1));
  CHECK(pair.supNorm() == 1.0);
  CHECK(!pair.isIncreasing());
  const LocalFunction mag = LocalFunction::magnetization(Region::cube(1, 1));
  CHECK(mag.isIncreasing());
  CHECK(mag(TailedConfiguration::uniform(1, +1)) == doctest::Approx(1.0));
  const LocalFunction ind = LocalFunction::indicatorAllPlus(Region::cube(1, 1));
  CHECK(ind.isIncreasing());
  CHECK(ind(TailedConfiguration::uniform(1, +1)) == 1.0);
  CHECK(ind(TailedConfiguration::uniform(1, -1)) == 0.0);
  CHECK(LocalFunction::constant(1, 3.5)(TailedConfiguration::uniform(1, -1)) == 3.5);
}

TEST_CASE("tails and window indexing") {
  const Tail alt = Tail::alternating(1);
  CHECK(alt.spin(site(0)) == +1);
  CHECK(alt.spin(site(1)) == -1);
  CHECK(alt.spin(site(-1)) == -1);
  CHECK(alt.spin(site(-2)) == +1);

  const Tail per = Tail::periodic({3, 1}, {1, -1, -1});
  CHECK(per.spin(site(0)) == +1);
  CHECK(per.spin(site(1)) == -1);
  CHECK(per.spin(site(3)) == +1);
  CHECK(per.spin(site(-1)) == -1);  // mathematical mod

  const Region w = Region::cube(1, 1);
  for (std::uint64_t idx = 0; idx < 8; ++idx)
    CHECK(fromIndex(w, idx, Tail::allPlus()).windowIndex(w) == idx);
  const TailedConfiguration eta = fromIndex(w, 0b110, Tail::allPlus());
  CHECK(eta.windowIndex(Region::ofSites(1, {site(0), site(1)})) == 0b11);
}

TEST_CASE("index helpers") {
  CHECK(spinOfBit(0b10, 1) == +1);
  CHECK(spinOfBit(0b10, 0) == -1);
  CHECK(withSpin(0b00, 1, +1) == 0b10);
  CHECK(withSpin(0b11, 0, -1) == 0b10);
  CHECK(mathMod(-1, 3) == 2);
  CHECK(mathMod(7, 3) == 1);
  CHECK(chebyshevNorm(site(-3, 2)) == 3);
}

TEST_CASE("interaction validates its parameters") {
  CHECK_THROWS_AS(Interaction(1.0, 0.0, -0.5), ContractError);
  const Interaction phi(2.0, -0.25, 0.75);
  CHECK(phi.j == 2.0);
  CHECK(phi.h == -0.25);
  CHECK(phi.beta == 0.75);
  CHECK(Interaction::range() == 1);
}

TEST_SUITE_END();
