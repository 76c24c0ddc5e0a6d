#include "spinlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace spinlab {

int chebyshevNorm(const Site& s) { return std::max(std::abs(s.c[0]), std::abs(s.c[1])); }

namespace {

void checkDim(int dim) {
  if (dim != 1 && dim != 2) throw ContractError("lattice dimension must be 1 or 2");
}

std::vector<Site> canonicalize(int dim, std::vector<Site> sites) {
  for (auto& s : sites) {
    if (dim == 1 && s.c[1] != 0) throw ContractError("d=1 site with nonzero second coordinate");
  }
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    throw ContractError("region has duplicate sites");
  return sites;
}

}  // namespace

Region Region::cube(int dim, int radius) {
  checkDim(dim);
  if (radius < 0) throw ContractError("cube radius must be >= 0");
  Region r;
  r.dim_ = dim;
  r.kind_ = RegionKind::Cube;
  r.radius_ = radius;
  if (dim == 1) {
    for (int x = -radius; x <= radius; ++x) r.sites_.push_back(site(x));
  } else {
    for (int x = -radius; x <= radius; ++x)
      for (int y = -radius; y <= radius; ++y) r.sites_.push_back(site(x, y));
  }
  r.sites_ = canonicalize(dim, std::move(r.sites_));
  return r;
}

Region Region::annulus(int dim, int outerRadius, const Region& inner) {
  Region outer = cube(dim, outerRadius);
  if (!isSubset(inner, outer)) throw ContractError("annulus: inner region not inside cube");
  Region r = regionMinus(outer, inner);
  r.kind_ = RegionKind::Annulus;
  r.radius_ = outerRadius;
  return r;
}

Region Region::ofSites(int dim, std::vector<Site> sites) {
  checkDim(dim);
  Region r;
  r.dim_ = dim;
  r.kind_ = RegionKind::Explicit;
  r.sites_ = canonicalize(dim, std::move(sites));
  return r;
}

bool Region::contains(const Site& s) const {
  return std::binary_search(sites_.begin(), sites_.end(), s);
}

std::optional<int> Region::indexOf(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || *it != s) return std::nullopt;
  return static_cast<int>(it - sites_.begin());
}

bool operator==(const Region& a, const Region& b) {
  return a.dim_ == b.dim_ && a.sites_ == b.sites_;
}

Region regionUnion(const Region& a, const Region& b) {
  if (a.dim() != b.dim()) throw ContractError("region dimension mismatch");
  std::vector<Site> out;
  std::set_union(a.sites().begin(), a.sites().end(), b.sites().begin(), b.sites().end(),
                 std::back_inserter(out));
  return Region::ofSites(a.dim(), std::move(out));
}

Region regionMinus(const Region& a, const Region& b) {
  if (a.dim() != b.dim()) throw ContractError("region dimension mismatch");
  std::vector<Site> out;
  std::set_difference(a.sites().begin(), a.sites().end(), b.sites().begin(), b.sites().end(),
                      std::back_inserter(out));
  return Region::ofSites(a.dim(), std::move(out));
}

Region regionIntersect(const Region& a, const Region& b) {
  if (a.dim() != b.dim()) throw ContractError("region dimension mismatch");
  std::vector<Site> out;
  std::set_intersection(a.sites().begin(), a.sites().end(), b.sites().begin(), b.sites().end(),
                        std::back_inserter(out));
  return Region::ofSites(a.dim(), std::move(out));
}

bool isSubset(const Region& a, const Region& b) {
  return std::includes(b.sites().begin(), b.sites().end(), a.sites().begin(), a.sites().end());
}

bool disjoint(const Region& a, const Region& b) {
  return regionIntersect(a, b).empty();
}

std::vector<Site> neighbors(const Site& s, int dim) {
  checkDim(dim);
  std::vector<Site> out;
  out.push_back(s + site(1));
  out.push_back(s - site(1));
  if (dim == 2) {
    out.push_back(s + site(0, 1));
    out.push_back(s - site(0, 1));
  }
  return out;
}

Region exteriorBoundary(const Region& r) {
  std::vector<Site> out;
  for (const auto& s : r.sites())
    for (const auto& n : neighbors(s, r.dim()))
      if (!r.contains(n)) out.push_back(n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Region::ofSites(r.dim(), std::move(out));
}

Region closure(const Region& r) { return regionUnion(r, exteriorBoundary(r)); }

// ---- tails ----

Tail Tail::periodic(std::array<int, 2> period, std::vector<int8_t> pattern) {
  if (period[0] < 1 || period[1] < 1) throw ContractError("tail period must be >= 1");
  if (pattern.size() != static_cast<std::size_t>(period[0]) * period[1])
    throw ContractError("tail pattern size != period product");
  for (int8_t v : pattern)
    if (v != 1 && v != -1) throw ContractError("tail pattern entries must be +-1");
  Tail t;
  t.kind = TailKind::Periodic;
  t.period = period;
  t.pattern = std::move(pattern);
  return t;
}

Tail Tail::alternating(int dim) {
  checkDim(dim);
  if (dim == 1) return periodic({2, 1}, {1, -1});
  return periodic({2, 2}, {1, -1, -1, 1});  // (-1)^(x+y)
}

Tail Tail::named(std::shared_ptr<const TailedConfiguration> ref) {
  if (!ref) throw ContractError("named tail requires a configuration");
  Tail t;
  t.kind = TailKind::Named;
  t.ref = std::move(ref);
  return t;
}

int Tail::spin(const Site& s) const {
  switch (kind) {
    case TailKind::AllPlus:
      return 1;
    case TailKind::AllMinus:
      return -1;
    case TailKind::Periodic:
      return pattern[mathMod(s.c[0], period[0]) + period[0] * mathMod(s.c[1], period[1])];
    case TailKind::Named:
      return ref->spin(s);
  }
  throw ContractError("bad tail kind");
}

TailedConfiguration::TailedConfiguration(Region window, std::vector<int8_t> values, Tail tail)
    : window_(std::move(window)), values_(std::move(values)), tail_(std::move(tail)) {
  if (values_.size() != window_.size())
    throw ContractError("window values size != window size");
  for (int8_t v : values_)
    if (v != 1 && v != -1) throw ContractError("window values must be +-1");
}

TailedConfiguration TailedConfiguration::uniform(int dim, int spin) {
  return ofTail(dim, spin > 0 ? Tail::allPlus() : Tail::allMinus());
}

TailedConfiguration TailedConfiguration::ofTail(int dim, Tail tail) {
  return TailedConfiguration(Region::ofSites(dim, {}), {}, std::move(tail));
}

int TailedConfiguration::spin(const Site& s) const {
  if (auto i = window_.indexOf(s)) return values_[*i];
  return tail_.spin(s);
}

std::uint64_t TailedConfiguration::windowIndex(const Region& sub) const {
  if (sub.size() > 63) throw EngineError("windowIndex: region too large");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < sub.size(); ++i)
    if (spin(sub.siteAt(i)) > 0) idx |= std::uint64_t{1} << i;
  return idx;
}

TailedConfiguration splice(const TailedConfiguration& omega, const Region& lambda,
                           const Tail& theta) {
  if (omega.dim() != lambda.dim()) throw ContractError("splice: dimension mismatch");
  std::vector<int8_t> vals;
  vals.reserve(lambda.size());
  for (const auto& s : lambda.sites()) vals.push_back(static_cast<int8_t>(omega.spin(s)));
  return TailedConfiguration(lambda, std::move(vals), theta);
}

TailedConfiguration fromIndex(const Region& window, std::uint64_t index, Tail tail) {
  std::vector<int8_t> vals(window.size());
  for (std::size_t i = 0; i < window.size(); ++i)
    vals[i] = static_cast<int8_t>(spinOfBit(index, static_cast<int>(i)));
  return TailedConfiguration(window, std::move(vals), std::move(tail));
}

Order compare(const TailedConfiguration& a, const TailedConfiguration& b, int horizon) {
  if (a.dim() != b.dim()) throw ContractError("compare: dimension mismatch");
  bool le = true, ge = true;
  auto visit = [&](const Site& s) {
    int sa = a.spin(s), sb = b.spin(s);
    if (sa < sb) ge = false;
    if (sa > sb) le = false;
  };
  if (a.dim() == 1) {
    for (int x = -horizon; x <= horizon; ++x) visit(site(x));
  } else {
    for (int x = -horizon; x <= horizon; ++x)
      for (int y = -horizon; y <= horizon; ++y) visit(site(x, y));
  }
  if (le && ge) return Order::Equal;
  if (le) return Order::Less;
  if (ge) return Order::Greater;
  return Order::Incomparable;
}

Order compareIndices(std::uint64_t a, std::uint64_t b, int nSites) {
  std::uint64_t mask = nSites >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << nSites) - 1);
  std::uint64_t am = a & mask, bm = b & mask;
  if (am == bm) return Order::Equal;
  if ((am & bm) == am) return Order::Less;
  if ((am & bm) == bm) return Order::Greater;
  return Order::Incomparable;
}

// ---- local functions ----

LocalFunction::LocalFunction(Region support, std::vector<double> table)
    : support_(std::move(support)), table_(std::move(table)) {
  if (support_.size() > 24) throw EngineError("local function support too large");
  if (table_.size() != (std::size_t{1} << support_.size()))
    throw ContractError("local function table size != 2^|support|");
}

LocalFunction LocalFunction::spinAt(int dim, const Site& s) {
  return LocalFunction(Region::ofSites(dim, {s}), {-1.0, 1.0});
}

LocalFunction LocalFunction::pairProduct(int dim, const Site& a, const Site& b) {
  Region sup = Region::ofSites(dim, {a, b});
  std::vector<double> t(4);
  for (std::uint64_t idx = 0; idx < 4; ++idx)
    t[idx] = spinOfBit(idx, 0) * spinOfBit(idx, 1);
  return LocalFunction(sup, std::move(t));
}

LocalFunction LocalFunction::indicatorAllPlus(Region support) {
  std::size_t n = support.size();
  std::vector<double> t(std::size_t{1} << n, 0.0);
  t.back() = 1.0;
  return LocalFunction(std::move(support), std::move(t));
}

LocalFunction LocalFunction::magnetization(Region support) {
  std::size_t n = support.size();
  if (n == 0) throw ContractError("magnetization needs nonempty support");
  std::vector<double> t(std::size_t{1} << n, 0.0);
  for (std::uint64_t idx = 0; idx < t.size(); ++idx) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m += spinOfBit(idx, static_cast<int>(i));
    t[idx] = m / static_cast<double>(n);
  }
  return LocalFunction(std::move(support), std::move(t));
}

LocalFunction LocalFunction::constant(int dim, double value) {
  return LocalFunction(Region::ofSites(dim, {}), {value});
}

double LocalFunction::operator()(const TailedConfiguration& eta) const {
  return table_[eta.windowIndex(support_)];
}

double LocalFunction::supNorm() const {
  double m = 0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

bool LocalFunction::isIncreasing() const {
  int n = static_cast<int>(support_.size());
  for (std::uint64_t idx = 0; idx < table_.size(); ++idx)
    for (int b = 0; b < n; ++b)
      if (!((idx >> b) & 1u) && table_[idx] > table_[idx | (std::uint64_t{1} << b)] + 1e-15)
        return false;
  return true;
}

// ---- translation ----

Site translate(const Site& s, const Site& shift) { return s + shift; }

Region translate(const Region& r, const Site& shift) {
  std::vector<Site> out;
  out.reserve(r.size());
  for (const auto& s : r.sites()) out.push_back(s + shift);
  return Region::ofSites(r.dim(), std::move(out));  // shift preserves lexicographic order
}

LocalFunction translate(const LocalFunction& f, const Site& shift) {
  return LocalFunction(translate(f.support(), shift), f.table());
}

TailedConfiguration translate(const TailedConfiguration& eta, const Site& shift) {
  Tail t = eta.tail();
  if (t.kind == TailKind::Periodic) {
    // shift the pattern so that spins move with the sites
    std::vector<int8_t> p(t.pattern.size());
    for (int x = 0; x < t.period[0]; ++x)
      for (int y = 0; y < t.period[1]; ++y)
        p[x + t.period[0] * y] = t.pattern[mathMod(x - shift.c[0], t.period[0]) +
                                           t.period[0] * mathMod(y - shift.c[1], t.period[1])];
    t.pattern = std::move(p);
  } else if (t.kind == TailKind::Named) {
    t.ref = std::make_shared<const TailedConfiguration>(translate(*t.ref, shift));
  }
  return TailedConfiguration(translate(eta.window(), shift), eta.windowValues(), std::move(t));
}

Interaction::Interaction(double j_, double h_, double beta_) : j(j_), h(h_), beta(beta_) {
  if (beta < 0) throw ContractError("beta must be >= 0");
  if (!std::isfinite(j) || !std::isfinite(h) || !std::isfinite(beta))
    throw ContractError("interaction parameters must be finite");
}

}  // namespace spinlab
