#include "spinlab/renormalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "spinlab/recipes.hpp"

namespace spinlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int floorDiv(int a, int p) { return (a - mathMod(a, p)) / p; }

Region dedupedRegion(int dim, std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return Region::ofSites(dim, std::move(sites));
}

void checkSourceDim(int dim) {
  if (dim != 1 && dim != 2) throw ContractError("transformation dimension must be 1 or 2");
}

}  // namespace

Transformation Transformation::decimation(int dim, int b) {
  checkSourceDim(dim);
  if (b < 1) throw ContractError("decimation spacing must be >= 1");
  return Transformation{Kind::Decimation, dim, b, 0};
}

Transformation Transformation::layerProjection() {
  return Transformation{Kind::Projection, 2, 1, 0};
}

Transformation Transformation::kadanoff(int dim, int blockSide, double p) {
  checkSourceDim(dim);
  if (blockSide < 1) throw ContractError("kadanoff block side must be >= 1");
  if (!(p >= 0)) throw ContractError("kadanoff p must be >= 0");
  return Transformation{Kind::Kadanoff, dim, blockSide, p};
}

Transformation Transformation::majority(int dim, int blockSide) {
  checkSourceDim(dim);
  if (blockSide < 1) throw ContractError("majority block side must be >= 1");
  return Transformation{Kind::Majority, dim, blockSide, 0};
}

Transformation Transformation::noisyDecimation(int dim, int b, double p) {
  checkSourceDim(dim);
  if (b < 1) throw ContractError("decimation spacing must be >= 1");
  if (!(p >= 0)) throw ContractError("noise strength must be >= 0");
  return Transformation{Kind::NoisyDecimation, dim, b, p};
}

Transformation Transformation::noisyLayerProjection(double p) {
  if (!(p >= 0)) throw ContractError("noise strength must be >= 0");
  return Transformation{Kind::NoisyProjection, 2, 1, p};
}

int Transformation::imageDim() const {
  return (kind == Kind::Projection || kind == Kind::NoisyProjection) ? 1 : dim;
}

bool Transformation::deterministic() const {
  return kind == Kind::Decimation || kind == Kind::Projection || kind == Kind::Majority;
}

Region Transformation::blockFor(const Site& x) const {
  switch (kind) {
    case Kind::Decimation:
    case Kind::NoisyDecimation:
      if (dim == 1) return Region::ofSites(1, {site(spacing * x[0])});
      return Region::ofSites(2, {site(spacing * x[0], spacing * x[1])});
    case Kind::Projection:
    case Kind::NoisyProjection:
      return Region::ofSites(2, {site(x[0], 0)});
    case Kind::Kadanoff:
    case Kind::Majority: {
      std::vector<Site> sites;
      if (dim == 1) {
        for (int u = 0; u < spacing; ++u) sites.push_back(site(spacing * x[0] + u));
      } else {
        for (int u = 0; u < spacing; ++u)
          for (int v = 0; v < spacing; ++v)
            sites.push_back(site(spacing * x[0] + u, spacing * x[1] + v));
      }
      return Region::ofSites(dim, std::move(sites));
    }
  }
  throw ContractError("unknown transformation kind");
}

Region Transformation::sourceSitesFor(const Region& image) const {
  std::vector<Site> out;
  for (const Site& x : image.sites()) {
    const Region block = blockFor(x);
    for (const Site& s : block.sites()) out.push_back(s);
  }
  return dedupedRegion(dim, std::move(out));
}

Region Transformation::imageSitesTouching(const Region& source) const {
  std::vector<Site> out;
  switch (kind) {
    case Kind::Decimation:
    case Kind::NoisyDecimation:
      for (const Site& s : source.sites()) {
        if (mathMod(s[0], spacing) != 0) continue;
        if (dim == 2 && mathMod(s[1], spacing) != 0) continue;
        out.push_back(dim == 1 ? site(s[0] / spacing) : site(s[0] / spacing, s[1] / spacing));
      }
      break;
    case Kind::Projection:
    case Kind::NoisyProjection:
      for (const Site& s : source.sites())
        if (s[1] == 0) out.push_back(site(s[0]));
      break;
    case Kind::Kadanoff:
    case Kind::Majority:
      for (const Site& s : source.sites())
        out.push_back(dim == 1 ? site(floorDiv(s[0], spacing))
                               : site(floorDiv(s[0], spacing), floorDiv(s[1], spacing)));
      break;
  }
  return dedupedRegion(imageDim(), std::move(out));
}

double Transformation::alpha() const {
  if (kind == Kind::Projection || kind == Kind::NoisyProjection) return 0;
  return spacing;
}

std::string Transformation::describe() const {
  std::ostringstream ss;
  switch (kind) {
    case Kind::Decimation: ss << "decimation(b=" << spacing << ")"; break;
    case Kind::Projection: ss << "layer-projection"; break;
    case Kind::Kadanoff: ss << "kadanoff(l=" << spacing << ",p=" << p << ")"; break;
    case Kind::Majority: ss << "majority(l=" << spacing << ")"; break;
    case Kind::NoisyDecimation: ss << "noisy-decimation(b=" << spacing << ",p=" << p << ")"; break;
    case Kind::NoisyProjection: ss << "noisy-layer-projection(p=" << p << ")"; break;
  }
  return ss.str();
}

double singleSiteKernelProb(Transformation::Kind kind, double p, int blockSum, int imageSpin) {
  if (imageSpin != 1 && imageSpin != -1) throw ContractError("image spin must be +-1");
  switch (kind) {
    case Transformation::Kind::Kadanoff:
    case Transformation::Kind::NoisyDecimation:
    case Transformation::Kind::NoisyProjection:
      return 1.0 / (1.0 + std::exp(-2.0 * p * imageSpin * blockSum));
    case Transformation::Kind::Decimation:
    case Transformation::Kind::Projection:
      return imageSpin * blockSum > 0 ? 1.0 : 0.0;
    case Transformation::Kind::Majority:
      if (blockSum == 0) return 0.5;
      return imageSpin * blockSum > 0 ? 1.0 : 0.0;
  }
  throw ContractError("unknown transformation kind");
}

FiniteMeasure pushforward(const FiniteMeasure& mu, const Transformation& t, const Region& image) {
  const Region& src = mu.support();
  if (image.empty()) throw ContractError("pushforward: empty image");
  if (image.dim() != t.imageDim()) throw ContractError("pushforward: image dimension mismatch");
  const std::size_t nImg = image.size();
  if (src.size() + nImg > 24) throw EngineError("pushforward above the composite-state cap");

  std::vector<std::vector<int>> blockBits(nImg);
  for (std::size_t i = 0; i < nImg; ++i) {
    const Region block = t.blockFor(image.siteAt(i));
    for (const Site& s : block.sites()) {
      const auto bit = src.indexOf(s);
      if (!bit) throw ContractError("pushforward: block escapes the source window");
      blockBits[i].push_back(*bit);
    }
  }

  const std::uint64_t nOut = std::uint64_t{1} << nImg;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nOut));
  std::vector<double> pPlus(nImg);
  for (std::uint64_t c = 0; c < mu.size(); ++c) {
    const double pm = mu.prob(c);
    if (pm == 0) continue;
    for (std::size_t i = 0; i < nImg; ++i) {
      int sum = 0;
      for (int bit : blockBits[i]) sum += spinOfBit(c, bit);
      pPlus[i] = singleSiteKernelProb(t.kind, t.p, sum, +1);
    }
    for (std::uint64_t img = 0; img < nOut; ++img) {
      double w = pm;
      for (std::size_t i = 0; i < nImg && w != 0; ++i)
        w *= ((img >> i) & 1u) ? pPlus[i] : 1.0 - pPlus[i];
      out[static_cast<Eigen::Index>(img)] += w;
    }
  }
  return FiniteMeasure(image, out);
}

FiniteMeasure pushforward(const FiniteMeasure& mu, const Transformation& t) {
  std::vector<Site> keep;
  const Region candidates = t.imageSitesTouching(mu.support());
  for (const Site& x : candidates.sites())
    if (isSubset(t.blockFor(x), mu.support())) keep.push_back(x);
  if (keep.empty()) throw ContractError("pushforward: no block fits the source window");
  return pushforward(mu, t, Region::ofSites(t.imageDim(), std::move(keep)));
}

BlockSpinReport blockSpinCheck(const Transformation& t, const std::vector<Region>& probes) {
  BlockSpinReport r;
  r.strictLocality = t.imageDim() == t.dim;
  if (!r.strictLocality) {
    std::ostringstream ss;
    ss << "image dimension " << t.imageDim() << " differs from source dimension " << t.dim
       << ": preimage windows cannot track image windows";
    r.witness = ss.str();
  }

  double worst = 0;
  for (const Region& probe : probes) {
    if (probe.empty()) continue;
    int imgRadius = 0;
    for (const Site& x : probe.sites()) imgRadius = std::max(imgRadius, chebyshevNorm(x));
    int srcRadius = 0;
    const Region srcSites = t.sourceSitesFor(probe);
    for (const Site& s : srcSites.sites()) srcRadius = std::max(srcRadius, chebyshevNorm(s));
    if (imgRadius >= 1) worst = std::max(worst, static_cast<double>(srcRadius) / imgRadius);
  }
  r.alphaEstimate = worst > 0 ? worst : t.alpha();

  // factorization across probe pairs with disjoint source blocks; the joint
  // factor product runs in the union's canonical order
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      const Region& a = probes[i];
      const Region& b = probes[j];
      if (a.empty() || b.empty()) continue;
      const Region ua = t.sourceSitesFor(a);
      const Region ub = t.sourceSitesFor(b);
      if (!disjoint(ua, ub)) continue;
      const Region u = regionUnion(ua, ub);
      const Region ab = regionUnion(a, b);
      if (u.size() + a.size() + b.size() > 22) continue;

      std::vector<std::vector<int>> bits(ab.size());
      for (std::size_t k = 0; k < ab.size(); ++k) {
        const Region block = t.blockFor(ab.siteAt(k));
        for (const Site& s : block.sites()) bits[k].push_back(*u.indexOf(s));
      }
      // position k of the union probe -> (which probe, bit in that probe's pattern)
      std::vector<std::pair<int, int>> slotOf(ab.size());
      std::vector<int> posA, posB;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const int pos = *ab.indexOf(a.siteAt(k));
        posA.push_back(pos);
        slotOf[pos] = {0, static_cast<int>(k)};
      }
      for (std::size_t k = 0; k < b.size(); ++k) {
        const int pos = *ab.indexOf(b.siteAt(k));
        posB.push_back(pos);
        slotOf[pos] = {1, static_cast<int>(k)};
      }

      std::vector<double> pPlus(ab.size());
      for (std::uint64_t c = 0; c < (std::uint64_t{1} << u.size()); ++c) {
        for (std::size_t k = 0; k < ab.size(); ++k) {
          int sum = 0;
          for (int bit : bits[k]) sum += spinOfBit(c, bit);
          pPlus[k] = singleSiteKernelProb(t.kind, t.p, sum, +1);
        }
        for (std::uint64_t pa = 0; pa < (std::uint64_t{1} << a.size()); ++pa) {
          for (std::uint64_t pb = 0; pb < (std::uint64_t{1} << b.size()); ++pb) {
            double joint = 1;
            for (std::size_t k = 0; k < ab.size(); ++k) {
              const auto& [probe, bit] = slotOf[k];
              const int spin = probe == 0 ? spinOfBit(pa, bit) : spinOfBit(pb, bit);
              joint *= spin > 0 ? pPlus[k] : 1.0 - pPlus[k];
            }
            double pA = 1;
            for (std::size_t k = 0; k < posA.size(); ++k)
              pA *= spinOfBit(pa, static_cast<int>(k)) > 0 ? pPlus[posA[k]] : 1.0 - pPlus[posA[k]];
            double pB = 1;
            for (std::size_t k = 0; k < posB.size(); ++k)
              pB *= spinOfBit(pb, static_cast<int>(k)) > 0 ? pPlus[posB[k]] : 1.0 - pPlus[posB[k]];
            const double res = std::abs(joint - pA * pB);
            if (res > r.factorizationResidual) {
              r.factorizationResidual = res;
              if (res > 1e-12) {
                r.factorization = false;
                std::ostringstream ss;
                ss << "probe pair (" << i << "," << j << ") patterns (" << pa << "," << pb
                   << ") source " << c;
                r.witness = ss.str();
              }
            }
          }
        }
      }
    }
  }
  return r;
}

JointRow jointKernel(const KernelRecipe& gamma, const Transformation& t, const Region& imageVolume,
                     const TailedConfiguration& sourceBoundary,
                     const TailedConfiguration& imageBoundary, int maxBits) {
  const Region lam = gamma.volume();
  const int srcBits = static_cast<int>(lam.size());
  const int imgBits = static_cast<int>(imageVolume.size());
  if (srcBits + imgBits > maxBits) throw EngineError("jointKernel above the state cap");
  if (!imageVolume.empty() && imageVolume.dim() != t.imageDim())
    throw ContractError("jointKernel: image volume dimension mismatch");

  const Region touching = t.imageSitesTouching(lam);
  const Region factors = imageVolume.empty() ? touching : regionUnion(imageVolume, touching);

  const FiniteMeasure base = gamma.row(sourceBoundary);

  struct SourceRead {
    int bit = -1;
    int spin = 0;
  };
  std::vector<std::vector<SourceRead>> blockReads(factors.size());
  std::vector<int> imageBit(factors.size(), -1);
  std::vector<int> imageFixed(factors.size(), 0);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Site& x = factors.siteAt(k);
    const Region block = t.blockFor(x);
    for (const Site& s : block.sites()) {
      SourceRead read;
      if (const auto bit = lam.indexOf(s))
        read.bit = *bit;
      else
        read.spin = sourceBoundary.spin(s);
      blockReads[k].push_back(read);
    }
    if (const auto bit = imageVolume.indexOf(x))
      imageBit[k] = *bit;
    else
      imageFixed[k] = imageBoundary.spin(x);
  }

  const std::uint64_t nSrc = std::uint64_t{1} << srcBits;
  const std::uint64_t nImg = std::uint64_t{1} << imgBits;
  Eigen::VectorXd w(static_cast<Eigen::Index>(nSrc * nImg));
  std::vector<int> blockSum(factors.size());
  for (std::uint64_t src = 0; src < nSrc; ++src) {
    const double pg = base.prob(src);
    for (std::size_t k = 0; k < factors.size(); ++k) {
      int sum = 0;
      for (const auto& read : blockReads[k])
        sum += read.bit >= 0 ? spinOfBit(src, read.bit) : read.spin;
      blockSum[k] = sum;
    }
    for (std::uint64_t img = 0; img < nImg; ++img) {
      double wt = pg;
      for (std::size_t k = 0; k < factors.size() && wt != 0; ++k) {
        const int spin = imageBit[k] >= 0 ? spinOfBit(img, imageBit[k]) : imageFixed[k];
        wt *= singleSiteKernelProb(t.kind, t.p, blockSum[k], spin);
      }
      w[static_cast<Eigen::Index>(src | (img << srcBits))] = wt;
    }
  }
  const double total = w.sum();
  if (!(total > 0)) throw EngineError("jointKernel: row has no mass");
  return JointRow{lam, imageVolume, w / total};
}

JointKernelTable jointKernelTable(const KernelRecipe& gamma, const Transformation& t,
                                  const Region& imageVolume, int maxStateBits,
                                  int maxBoundaryBits) {
  const Region lam = gamma.volume();
  const Region touching = t.imageSitesTouching(lam);
  const Region factors = imageVolume.empty() ? touching : regionUnion(imageVolume, touching);

  JointKernelTable out;
  out.sourceVolume = lam;
  out.imageVolume = imageVolume;
  out.sourceDep =
      regionMinus(regionUnion(gamma.dependenceSet(), t.sourceSitesFor(factors)), lam);
  out.imageDep = regionMinus(factors, imageVolume);

  if (static_cast<int>(lam.size() + imageVolume.size()) > maxStateBits)
    throw EngineError("jointKernelTable above the state cap");
  if (static_cast<int>(out.sourceDep.size() + out.imageDep.size()) > maxBoundaryBits)
    throw EngineError("jointKernelTable above the boundary cap");

  const std::uint64_t nSrcB = std::uint64_t{1} << out.sourceDep.size();
  const std::uint64_t nImgB = std::uint64_t{1} << out.imageDep.size();
  out.rows.reserve(nSrcB * nImgB);
  // appended index ib * nSrcB + sb equals sb | ib << |sourceDep|
  for (std::uint64_t ib = 0; ib < nImgB; ++ib) {
    for (std::uint64_t sb = 0; sb < nSrcB; ++sb) {
      out.rows.push_back(jointKernel(gamma, t, imageVolume,
                                     fromIndex(out.sourceDep, sb, Tail::allPlus()),
                                     fromIndex(out.imageDep, ib, Tail::allPlus()),
                                     maxStateBits));
    }
  }
  return out;
}

SlotKernel toSlotKernel(const JointKernelTable& table) {
  SlotKernel slot;
  slot.stateBits = static_cast<int>(table.sourceVolume.size() + table.imageVolume.size());
  slot.boundaryBits = static_cast<int>(table.sourceDep.size() + table.imageDep.size());
  slot.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) slot.rows.push_back(r.p);
  return slot;
}

namespace {

using Kind = Transformation::Kind;

struct Pins {
  std::vector<Site> sites;  // image sites, sorted
  std::vector<int8_t> spins;
  int maxRadius = 0;
};

Pins buildPins(const RenormScenario& s) {
  const int idim = s.t.imageDim();
  const Region& win = s.condition.window();
  if (!win.empty() && win.dim() != idim)
    throw ContractError("renormalizedConditional: condition window dimension mismatch");
  if (!win.empty() && !disjoint(win, s.imageVolume))
    throw ContractError("renormalizedConditional: condition window overlaps the image volume");

  Region fill = s.fillRegion;
  if (fill.empty()) {
    int outer = 0;
    for (const Site& x : win.sites()) outer = std::max(outer, chebyshevNorm(x));
    for (const Site& x : s.imageVolume.sites()) outer = std::max(outer, chebyshevNorm(x));
    fill = Region::cube(idim, outer + s.fillDepth);
  }

  std::vector<Site> sites;
  for (const Site& x : win.sites()) sites.push_back(x);
  for (const Site& x : fill.sites()) sites.push_back(x);
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  Pins out;
  for (const Site& x : sites) {
    if (s.imageVolume.contains(x)) continue;
    out.sites.push_back(x);
    out.spins.push_back(static_cast<int8_t>(s.condition.spin(x)));
    out.maxRadius = std::max(out.maxRadius, chebyshevNorm(x));
  }
  return out;
}

ConditionalEstimate chainRoute(const RenormScenario& s, const Pins& pins) {
  const Chain2 image = Chain2::gibbs(s.phi).decimate(s.t.spacing);
  const Region& vol = s.imageVolume;
  if (vol.size() > 20) throw EngineError("chain route above 2^20 volume states");

  struct Slot {
    int x;
    int volBit;  // -1 when pinned
    int spin;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < vol.size(); ++i)
    slots.push_back({vol.siteAt(i)[0], static_cast<int>(i), 0});
  for (std::size_t i = 0; i < pins.sites.size(); ++i)
    slots.push_back({pins.sites[i][0], -1, pins.spins[i]});
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.x < b.x; });

  std::map<int, Eigen::Matrix2d> hop;
  for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
    const int gap = slots[i + 1].x - slots[i].x;
    if (!hop.count(gap)) hop.emplace(gap, image.power(gap));
  }

  const std::vector<int> emb = embedding(s.fImage.support(), vol);
  const std::uint64_t nVol = std::uint64_t{1} << vol.size();
  double num = 0, den = 0, maxLog = kNegInf;
  std::vector<double> logw(nVol);
  for (std::uint64_t v = 0; v < nVol; ++v) {
    double lw = 0;
    int prev = -1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const int a = slots[i].volBit >= 0 ? ((v >> slots[i].volBit) & 1u) : (slots[i].spin > 0);
      if (i == 0)
        lw += std::log(image.pi[a]);
      else
        lw += std::log(hop.at(slots[i].x - slots[i - 1].x)(prev, a));
      prev = a;
    }
    logw[v] = lw;
    maxLog = std::max(maxLog, lw);
  }
  if (maxLog == kNegInf) throw EngineError("conditioning event has zero probability");
  for (std::uint64_t v = 0; v < nVol; ++v) {
    const double w = std::exp(logw[v] - maxLog);
    den += w;
    num += w * s.fImage.atIndex(extractIndex(v, emb));
  }
  return ConditionalEstimate{num / den, 0, true, "chain-exact"};
}

double emissionConditional(const MeasureRecipe& recipe, const RenormScenario& s,
                           const std::vector<Site>& pinSites,
                           const std::vector<int8_t>& pinSpins) {
  std::vector<Site> all;
  for (const Site& x : s.imageVolume.sites()) all.push_back(x);
  for (const Site& x : pinSites) all.push_back(x);
  const Region r = dedupedRegion(1, std::move(all));
  if (s.imageVolume.size() > 16) throw EngineError("emission route above 2^16 volume states");

  std::uint64_t baseIdx = 0;
  for (std::size_t i = 0; i < pinSites.size(); ++i)
    if (pinSpins[i] > 0) baseIdx |= std::uint64_t{1} << *r.indexOf(pinSites[i]);
  std::vector<int> volBit(s.imageVolume.size());
  for (std::size_t i = 0; i < s.imageVolume.size(); ++i)
    volBit[i] = *r.indexOf(s.imageVolume.siteAt(i));

  const std::vector<int> emb = embedding(s.fImage.support(), s.imageVolume);
  const std::uint64_t nVol = std::uint64_t{1} << s.imageVolume.size();
  std::vector<double> logw(nVol);
  double maxLog = kNegInf;
  for (std::uint64_t v = 0; v < nVol; ++v) {
    std::uint64_t idx = baseIdx;
    for (std::size_t i = 0; i < volBit.size(); ++i)
      if ((v >> i) & 1u) idx |= std::uint64_t{1} << volBit[i];
    logw[v] = recipe.logMass(r, idx);
    maxLog = std::max(maxLog, logw[v]);
  }
  if (maxLog == kNegInf) throw EngineError("conditioning event has zero probability");
  double num = 0, den = 0;
  for (std::uint64_t v = 0; v < nVol; ++v) {
    const double w = std::exp(logw[v] - maxLog);
    den += w;
    num += w * s.fImage.atIndex(extractIndex(v, emb));
  }
  return num / den;
}

ConditionalEstimate emissionRoute(const RenormScenario& s, const Pins& pins) {
  const Chain2 source = Chain2::gibbs(s.phi);
  const double ePlusGivenPlus = singleSiteKernelProb(Kind::NoisyDecimation, s.t.p, +1, +1);
  const double ePlusGivenMinus = singleSiteKernelProb(Kind::NoisyDecimation, s.t.p, -1, +1);
  const RecipePtr recipe =
      emissionChainRecipe(source, s.t.spacing, ePlusGivenMinus, ePlusGivenPlus, "image");

  const double value = emissionConditional(*recipe, s, pins.sites, pins.spins);

  // fill-depth sensitivity: drop the outermost pinned shell and recompute
  std::vector<Site> inner;
  std::vector<int8_t> innerSpins;
  for (std::size_t i = 0; i < pins.sites.size(); ++i) {
    if (chebyshevNorm(pins.sites[i]) == pins.maxRadius) continue;
    inner.push_back(pins.sites[i]);
    innerSpins.push_back(pins.spins[i]);
  }
  double err = 0;
  if (inner.size() < pins.sites.size() && !pins.sites.empty())
    err = std::abs(value - emissionConditional(*recipe, s, inner, innerSpins));
  return ConditionalEstimate{value, err, true, "emission-exact"};
}

Site mapToSource(const Transformation& t, const Site& x) {
  if (t.kind == Kind::Decimation) return t.dim == 1 ? site(t.spacing * x[0])
                                                    : site(t.spacing * x[0], t.spacing * x[1]);
  return site(x[0], 0);  // layer projection
}

ConditionalEstimate stripRoute(const RenormScenario& s, const Pins& pins) {
  std::vector<std::pair<Site, int8_t>> constraints;
  std::vector<Site> touched;
  for (std::size_t i = 0; i < pins.sites.size(); ++i) {
    const Site src = mapToSource(s.t, pins.sites[i]);
    constraints.emplace_back(src, pins.spins[i]);
    touched.push_back(src);
  }
  std::vector<Site> fSites;
  for (const Site& x : s.fImage.support().sites()) {
    fSites.push_back(mapToSource(s.t, x));
    touched.push_back(fSites.back());
  }
  // the source map is increasing in the site order, so the table carries over
  const LocalFunction fSrc(Region::ofSites(2, fSites), s.fImage.table());

  int xLo = touched.front()[0], xHi = xLo, yLo = touched.front()[1], yHi = yLo;
  for (const Site& v : touched) {
    xLo = std::min(xLo, v[0]);
    xHi = std::max(xHi, v[0]);
    yLo = std::min(yLo, v[1]);
    yHi = std::max(yHi, v[1]);
  }
  bool below = true;
  while (yHi - yLo + 1 < s.stripWidth) {
    if (below) --yLo; else ++yHi;
    below = !below;
  }
  Strip strip{s.phi, xLo - s.fillDepth, xHi + s.fillDepth, yLo, yHi - yLo + 1,
              std::nullopt, std::move(constraints)};
  return ConditionalEstimate{expectation(strip, fSrc), 0, true, "strip-exact"};
}

// source window: bounding box of every needed block, dilated by the fill depth
Region sourceBox(const RenormScenario& s, const Pins& pins) {
  std::vector<Site> image;
  for (const Site& x : s.imageVolume.sites()) image.push_back(x);
  for (const Site& x : pins.sites) image.push_back(x);
  const Region needed = s.t.sourceSitesFor(dedupedRegion(s.t.imageDim(), std::move(image)));
  int xLo = needed.siteAt(0)[0], xHi = xLo, yLo = needed.siteAt(0)[1], yHi = yLo;
  for (const Site& v : needed.sites()) {
    xLo = std::min(xLo, v[0]);
    xHi = std::max(xHi, v[0]);
    yLo = std::min(yLo, v[1]);
    yHi = std::max(yHi, v[1]);
  }
  std::vector<Site> box;
  if (s.t.dim == 1) {
    for (int x = xLo - s.fillDepth; x <= xHi + s.fillDepth; ++x) box.push_back(site(x));
  } else {
    for (int x = xLo - s.fillDepth; x <= xHi + s.fillDepth; ++x)
      for (int y = yLo - s.fillDepth; y <= yHi + s.fillDepth; ++y) box.push_back(site(x, y));
  }
  return Region::ofSites(s.t.dim, std::move(box));
}

// E[fImage | source spins]: the image volume spins stay random under noisy kinds
LocalFunction volumeAverager(const RenormScenario& s, const Region& window) {
  const Region support = s.t.sourceSitesFor(s.fImage.support());
  if (support.size() > 16) throw EngineError("image blocks above 2^16 source states");
  if (!isSubset(support, window)) throw ContractError("image blocks escape the source window");

  std::vector<std::vector<int>> blockBits(s.fImage.support().size());
  for (std::size_t i = 0; i < s.fImage.support().size(); ++i) {
    const Region block = s.t.blockFor(s.fImage.support().siteAt(i));
    for (const Site& v : block.sites()) blockBits[i].push_back(*support.indexOf(v));
  }

  const std::uint64_t n = std::uint64_t{1} << support.size();
  const std::uint64_t nF = std::uint64_t{1} << s.fImage.support().size();
  std::vector<double> table(n);
  std::vector<double> pPlus(blockBits.size());
  for (std::uint64_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < blockBits.size(); ++i) {
      int sum = 0;
      for (int bit : blockBits[i]) sum += spinOfBit(c, bit);
      pPlus[i] = singleSiteKernelProb(s.t.kind, s.t.p, sum, +1);
    }
    double acc = 0;
    for (std::uint64_t v = 0; v < nF; ++v) {
      double w = 1;
      for (std::size_t i = 0; i < blockBits.size() && w != 0; ++i)
        w *= ((v >> i) & 1u) ? pPlus[i] : 1.0 - pPlus[i];
      if (w != 0) acc += w * s.fImage.atIndex(v);
    }
    table[c] = acc;
  }
  return LocalFunction(support, std::move(table));
}

ConditionalEstimate enumerateRoute(const RenormScenario& s, const Pins& pins) {
  const Region window = sourceBox(s, pins);
  if (window.size() > 24) throw EngineError("enumerate route above 2^24 source states");

  const FiniteMeasure base = enumerateMeasure(SpinSystem{s.phi, window, std::nullopt, {}, false});
  const LocalFunction g = volumeAverager(s, window);
  const std::vector<int> embG = embedding(g.support(), window);

  std::vector<std::vector<int>> pinBits(pins.sites.size());
  for (std::size_t i = 0; i < pins.sites.size(); ++i) {
    const Region block = s.t.blockFor(pins.sites[i]);
    for (const Site& v : block.sites()) {
      const auto bit = window.indexOf(v);
      if (!bit) throw ContractError("pinned block escapes the source window");
      pinBits[i].push_back(*bit);
    }
  }

  double num = 0, den = 0;
  for (std::uint64_t c = 0; c < base.size(); ++c) {
    double w = base.prob(c);
    if (w == 0) continue;
    for (std::size_t i = 0; i < pinBits.size() && w != 0; ++i) {
      int sum = 0;
      for (int bit : pinBits[i]) sum += spinOfBit(c, bit);
      w *= singleSiteKernelProb(s.t.kind, s.t.p, sum, pins.spins[i]);
    }
    if (w == 0) continue;
    den += w;
    num += w * g.atIndex(extractIndex(c, embG));
  }
  if (!(den > 0)) throw EngineError("conditioning event has zero probability");
  return ConditionalEstimate{num / den, 0, true, "enumerate-exact"};
}

ConditionalEstimate mcRoute(const RenormScenario& s, const Pins& pins) {
  const Region window = sourceBox(s, pins);
  if (window.size() > 64) throw EngineError("mc route above 64 source sites");

  SpinSystem sys{s.phi, window, std::nullopt, {}, false};
  std::vector<std::size_t> soft;
  for (std::size_t i = 0; i < pins.sites.size(); ++i) {
    const Region block = s.t.blockFor(pins.sites[i]);
    if (block.size() == 1 && s.t.deterministic()) {
      sys.constraints.emplace_back(block.siteAt(0), pins.spins[i]);
    } else {
      soft.push_back(i);
    }
  }

  SampleStream stream = mcSample(sys, s.mc);

  if (!soft.empty()) {
    std::vector<std::vector<int>> bits(soft.size());
    for (std::size_t k = 0; k < soft.size(); ++k) {
      const Region block = s.t.blockFor(pins.sites[soft[k]]);
      for (const Site& v : block.sites()) bits[k].push_back(*window.indexOf(v));
    }
    double best = kNegInf;
    stream.logWeights.resize(stream.samples.size());
    for (std::size_t c = 0; c < stream.samples.size(); ++c) {
      stream.logWeights[c].resize(stream.samples[c].size());
      for (std::size_t i = 0; i < stream.samples[c].size(); ++i) {
        double lw = 0;
        for (std::size_t k = 0; k < soft.size(); ++k) {
          int sum = 0;
          for (int bit : bits[k]) sum += spinOfBit(stream.samples[c][i], bit);
          const double pr = singleSiteKernelProb(s.t.kind, s.t.p, sum, pins.spins[soft[k]]);
          lw += pr > 0 ? std::log(pr) : kNegInf;
        }
        stream.logWeights[c][i] = lw;
        best = std::max(best, lw);
      }
    }
    if (best == kNegInf) throw EngineError("conditioning event never sampled");
  }

  const McEstimate est = empiricalEstimate(stream, volumeAverager(s, window));
  return ConditionalEstimate{est.mean, est.standardError, false, "mc-reweighted"};
}

}  // namespace

ConditionalEstimate renormalizedConditional(const RenormScenario& s) {
  if (s.imageVolume.empty()) throw ContractError("renormalizedConditional: empty image volume");
  if (!isSubset(s.fImage.support(), s.imageVolume))
    throw ContractError("renormalizedConditional: fImage outside the image volume");
  const Pins pins = buildPins(s);

  const bool chainOk = s.t.dim == 1 && s.t.kind == Kind::Decimation;
  const bool emissionOk = s.t.dim == 1 && s.t.kind == Kind::NoisyDecimation;
  const bool stripOk =
      s.t.dim == 2 && (s.t.kind == Kind::Decimation || s.t.kind == Kind::Projection);

  if (s.engine == "chain") {
    if (!chainOk) throw EngineError("chain engine needs 1-D decimation");
    return chainRoute(s, pins);
  }
  if (s.engine == "emission") {
    if (!emissionOk) throw EngineError("emission engine needs 1-D noisy decimation");
    return emissionRoute(s, pins);
  }
  if (s.engine == "strip") {
    if (!stripOk) throw EngineError("strip engine needs a 2-D deterministic single-site kind");
    return stripRoute(s, pins);
  }
  if (s.engine == "enumerate") return enumerateRoute(s, pins);
  if (s.engine == "mc") return mcRoute(s, pins);
  if (s.engine != "auto") throw ContractError("unknown engine '" + s.engine + "'");

  if (chainOk) return chainRoute(s, pins);
  if (emissionOk) return emissionRoute(s, pins);
  if (stripOk) return stripRoute(s, pins);
  if (sourceBox(s, pins).size() <= 22) return enumerateRoute(s, pins);
  return mcRoute(s, pins);
}

namespace {

class RenormKernel final : public KernelRecipe {
public:
  explicit RenormKernel(RenormScenario base) : base_(std::move(base)) {
    const Region vol = base_.imageVolume;
    if (vol.size() == 0 || vol.size() > 20)
      throw ContractError("image volume must hold 1..20 sites");
    const Region window = base_.condition.window();
    for (const Site& s : window.sites())
      if (vol.contains(s)) throw ContractError("conditioning window overlaps the image volume");
  }

  Region volume() const override { return base_.imageVolume; }
  Region dependenceSet() const override { return base_.condition.window(); }

  FiniteMeasure row(const TailedConfiguration& omega) const override {
    const Region window = base_.condition.window();
    const std::uint64_t key = omega.windowIndex(window);
    {
      std::lock_guard<std::mutex> lock(cacheMutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }

    RenormScenario s = base_;
    std::vector<int8_t> values;
    values.reserve(window.size());
    for (const Site& site : window.sites()) values.push_back(static_cast<int8_t>(omega.spin(site)));
    s.condition = TailedConfiguration(window, std::move(values), base_.condition.tail());

    const std::uint64_t nConfigs = std::uint64_t{1} << base_.imageVolume.size();
    Eigen::VectorXd weights(static_cast<Eigen::Index>(nConfigs));
    for (std::uint64_t idx = 0; idx < nConfigs; ++idx) {
      std::vector<double> table(nConfigs, 0.0);
      table[idx] = 1.0;
      s.fImage = LocalFunction(base_.imageVolume, std::move(table));
      // mc estimates of indicator means can dip below zero only by roundoff
      weights[static_cast<Eigen::Index>(idx)] = std::max(0.0, renormalizedConditional(s).value);
    }
    FiniteMeasure result = FiniteMeasure::fromWeights(base_.imageVolume, weights);
    std::lock_guard<std::mutex> lock(cacheMutex_);
    return cache_.emplace(key, std::move(result)).first->second;
  }

  std::string describe() const override {
    return "image conditional of " + base_.t.describe() + " via engine '" + base_.engine + "'";
  }

private:
  RenormScenario base_;
  // rows are pure in the window spins, so repeat boundaries hit the cache
  mutable std::mutex cacheMutex_;
  mutable std::unordered_map<std::uint64_t, FiniteMeasure> cache_;
};

}  // namespace

KernelPtr renormKernelRecipe(RenormScenario base) {
  return std::make_shared<RenormKernel>(std::move(base));
}

}  // namespace spinlab
