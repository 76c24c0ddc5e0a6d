#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinlab {

// Spins are +1/-1 (int). Sites live on Z^d, d in {1,2}; d=1 uses coordinate 0 only.
// Region site order is lexicographic on (c[0], c[1]) and is the canonical order for
// every configuration table in the library: bit i of a configuration index holds the
// spin of the i-th site, bit 1 <=> spin +1.

struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};
struct EngineError : std::runtime_error {
  explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

struct Site {
  std::array<int, 2> c{0, 0};
  int operator[](std::size_t i) const { return c[i]; }
  friend auto operator<=>(const Site&, const Site&) = default;
};

inline Site site(int x) { return Site{{x, 0}}; }
inline Site site(int x, int y) { return Site{{x, y}}; }
inline Site operator+(Site a, const Site& b) {
  a.c[0] += b.c[0];
  a.c[1] += b.c[1];
  return a;
}
inline Site operator-(Site a, const Site& b) {
  a.c[0] -= b.c[0];
  a.c[1] -= b.c[1];
  return a;
}
int chebyshevNorm(const Site& s);

enum class RegionKind { Cube, Explicit, Annulus };

class Region {
public:
  Region() = default;

  // (2n+1)^d sites centered at the origin.
  static Region cube(int dim, int radius);
  // cube(outerRadius) minus inner; inner must be contained in the cube.
  static Region annulus(int dim, int outerRadius, const Region& inner);
  static Region ofSites(int dim, std::vector<Site> sites);

  int dim() const { return dim_; }
  RegionKind kind() const { return kind_; }
  int radius() const { return radius_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& siteAt(std::size_t i) const { return sites_[i]; }

  bool contains(const Site& s) const;
  // position in canonical order, nullopt if absent
  std::optional<int> indexOf(const Site& s) const;

  friend bool operator==(const Region&, const Region&);

private:
  int dim_ = 1;
  RegionKind kind_ = RegionKind::Explicit;
  int radius_ = 0;
  std::vector<Site> sites_;
};

Region regionUnion(const Region& a, const Region& b);
Region regionMinus(const Region& a, const Region& b);
Region regionIntersect(const Region& a, const Region& b);
bool isSubset(const Region& a, const Region& b);
bool disjoint(const Region& a, const Region& b);

std::vector<Site> neighbors(const Site& s, int dim);
// nearest-neighbor sites outside the region
Region exteriorBoundary(const Region& r);
Region closure(const Region& r);

// ---- total configurations: finite window + deterministic tail ----

class TailedConfiguration;

enum class TailKind { AllPlus, AllMinus, Periodic, Named };

struct Tail {
  TailKind kind = TailKind::AllPlus;
  std::array<int, 2> period{1, 1};
  std::vector<int8_t> pattern;  // cell (x mod p0) + p0*(y mod p1), mathematical mod
  std::shared_ptr<const TailedConfiguration> ref;

  static Tail allPlus() { return Tail{}; }
  static Tail allMinus() { return Tail{TailKind::AllMinus, {1, 1}, {}, nullptr}; }
  static Tail periodic(std::array<int, 2> period, std::vector<int8_t> pattern);
  static Tail alternating(int dim);
  static Tail named(std::shared_ptr<const TailedConfiguration> ref);

  int spin(const Site& s) const;
};

class TailedConfiguration {
public:
  TailedConfiguration() = default;
  TailedConfiguration(Region window, std::vector<int8_t> values, Tail tail);

  static TailedConfiguration uniform(int dim, int spin);
  static TailedConfiguration ofTail(int dim, Tail tail);

  const Region& window() const { return window_; }
  const Tail& tail() const { return tail_; }
  const std::vector<int8_t>& windowValues() const { return values_; }
  int dim() const { return window_.dim(); }

  int spin(const Site& s) const;  // defined on every site
  std::uint64_t windowIndex(const Region& sub) const;  // config index of sub's spins

private:
  Region window_;
  std::vector<int8_t> values_;
  Tail tail_;
};

// omega on Lambda, theta outside
TailedConfiguration splice(const TailedConfiguration& omega, const Region& lambda,
                           const Tail& theta);
// window values from a configuration index, given tail
TailedConfiguration fromIndex(const Region& window, std::uint64_t index, Tail tail);

enum class Order { Equal, Less, Greater, Incomparable };

// coordinatewise spin order over all sites with Chebyshev norm <= horizon
Order compare(const TailedConfiguration& a, const TailedConfiguration& b, int horizon);
Order compareIndices(std::uint64_t a, std::uint64_t b, int nSites);

// ---- local observables ----

class LocalFunction {
public:
  LocalFunction() = default;
  LocalFunction(Region support, std::vector<double> table);

  static LocalFunction spinAt(int dim, const Site& s);
  static LocalFunction pairProduct(int dim, const Site& a, const Site& b);
  static LocalFunction indicatorAllPlus(Region support);
  static LocalFunction magnetization(Region support);
  static LocalFunction constant(int dim, double value);

  const Region& support() const { return support_; }
  const std::vector<double>& table() const { return table_; }

  double atIndex(std::uint64_t idx) const { return table_[idx]; }
  double operator()(const TailedConfiguration& eta) const;
  double supNorm() const;
  bool isIncreasing() const;

private:
  Region support_;
  std::vector<double> table_;
};

// group action; also provided for Region and TailedConfiguration
Site translate(const Site& s, const Site& shift);
Region translate(const Region& r, const Site& shift);
LocalFunction translate(const LocalFunction& f, const Site& shift);
TailedConfiguration translate(const TailedConfiguration& eta, const Site& shift);

// ---- nearest-neighbor interaction ----

struct Interaction {
  double j = 1.0;
  double h = 0.0;
  double beta = 1.0;

  Interaction() = default;
  Interaction(double j_, double h_, double beta_);
  static constexpr int range() { return 1; }
};

// ---- configuration index helpers ----

inline int spinOfBit(std::uint64_t idx, int bit) { return (idx >> bit) & 1u ? 1 : -1; }
inline std::uint64_t withSpin(std::uint64_t idx, int bit, int spin) {
  return spin > 0 ? (idx | (std::uint64_t{1} << bit)) : (idx & ~(std::uint64_t{1} << bit));
}
inline int mathMod(int a, int p) {
  int r = a % p;
  return r < 0 ? r + p : r;
}

}  // namespace spinlab
