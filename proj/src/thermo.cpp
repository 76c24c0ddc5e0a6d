#include <spinlab/thermo.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <spinlab/transfer1d.hpp>

namespace spinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bernoulliRelEntropy(double p, double q) {
  double acc = 0;
  if (p > 0) {
    if (q <= 0) return kInf;
    acc += p * std::log(p / q);
  }
  if (p < 1) {
    if (q >= 1) return kInf;
    acc += (1 - p) * std::log((1 - p) / (1 - q));
  }
  return acc;
}

}  // namespace

double relativeEntropy(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  if (!(mu.support() == nu.support()))
    throw ContractError("relative entropy needs matching supports");
  double acc = 0;
  for (std::uint64_t c = 0; c < mu.size(); ++c) {
    const double p = mu.prob(c);
    if (p <= 0) continue;
    const double q = nu.prob(c);
    if (q <= 0) return kInf;
    acc += p * std::log(p / q);
  }
  return std::max(acc, 0.0);
}

EntropySeries entropyDensitySeries(const MeasureRecipe& mu, const MeasureRecipe& nu, int nMax) {
  if (nMax < 0) throw ContractError("entropy series needs nMax >= 0");
  if (mu.dim() != nu.dim()) throw ContractError("entropy series needs matching dimensions");
  EntropySeries out;

  const auto chainMu = mu.asChain();
  const auto chainNu = nu.asChain();
  if (chainMu && chainNu) {
    out.method = "chain-closed-form";
    const double head = bernoulliRelEntropy(chainMu->pi[1], chainNu->pi[1]);
    const double rate = relEntropyRate(*chainMu, *chainNu);
    for (int n = 0; n <= nMax; ++n) {
      const int sites = 2 * n + 1;
      out.n.push_back(n);
      out.h.push_back(head + (sites - 1) * rate);
      out.perSite.push_back(out.h.back() / sites);
      out.increment.push_back(n == 0 ? out.h.back() : (out.h.back() - out.h[n - 1]) / 2.0);
    }
  } else {
    out.method = "marginal-enumeration";
    int prevSites = 0;
    for (int n = 0; n <= nMax; ++n) {
      const Region window = Region::cube(mu.dim(), n);
      if (window.size() > 20) {
        if (out.n.empty()) throw EngineError("entropy window above 2^20 states");
        break;
      }
      const double h = relativeEntropy(mu.marginal(window), nu.marginal(window));
      const int sites = static_cast<int>(window.size());
      out.n.push_back(n);
      out.h.push_back(h);
      out.perSite.push_back(h / sites);
      out.increment.push_back(n == 0 ? h : (h - out.h[out.h.size() - 2]) / (sites - prevSites));
      prevSites = sites;
    }
  }
  out.lastPerSite = out.perSite.back();
  out.lastIncrement = out.increment.back();
  return out;
}

PressureSeries pressureEstimate(const LocalFunction& f, const MeasureRecipe& nu, int nMax) {
  if (nMax < 0) throw ContractError("pressure series needs nMax >= 0");
  PressureSeries out;

  const auto chain = nu.asChain();
  if (chain && nu.dim() == 1 && f.support().dim() == 1) {
    out.method = "tilted-ring";
    int span = 0;
    if (!f.support().empty())
      span = f.support().siteAt(f.support().size() - 1)[0] - f.support().siteAt(0)[0];
    for (int n = 0; n <= nMax; ++n) {
      const int sites = 2 * n + 1;
      if (sites < span + 1) continue;
      out.n.push_back(n);
      out.value.push_back(tiltedRingLogSum(*chain, f, sites) / sites);
    }
    if (out.n.empty()) throw EngineError("ring shorter than the function block at every n");
    out.extrapolated = tiltedLogLambda(*chain, f);
    return out;
  }

  out.method = "marginal-enumeration";
  double prevLog = 0;
  int prevSites = 0;
  for (int n = 0; n <= nMax; ++n) {
    const Region volume = Region::cube(nu.dim(), n);
    Region window = translate(f.support(), volume.siteAt(0));
    for (std::size_t i = 1; i < volume.size(); ++i)
      window = regionUnion(window, translate(f.support(), volume.siteAt(i)));
    if (window.size() > 20) {
      if (out.n.empty()) throw EngineError("tilted window above 2^20 states");
      break;
    }
    const FiniteMeasure m = nu.marginal(window);

    std::vector<std::vector<int>> embeddings;
    for (std::size_t i = 0; i < volume.size(); ++i)
      embeddings.push_back(embedding(translate(f.support(), volume.siteAt(i)), window));

    // log-sum-exp over configurations of nu(c) exp(sum of translates)
    std::vector<double> tilt(m.size());
    double tiltMax = -kInf;
    for (std::uint64_t c = 0; c < m.size(); ++c) {
      double s = 0;
      for (const auto& emb : embeddings) s += f.atIndex(extractIndex(c, emb));
      tilt[c] = s;
      if (m.prob(c) > 0) tiltMax = std::max(tiltMax, s);
    }
    double acc = 0;
    for (std::uint64_t c = 0; c < m.size(); ++c)
      if (m.prob(c) > 0) acc += m.prob(c) * std::exp(tilt[c] - tiltMax);
    const int sites = static_cast<int>(volume.size());
    const double logSum = tiltMax + std::log(acc);
    out.n.push_back(n);
    out.value.push_back(logSum / sites);
    out.extrapolated = out.n.size() == 1 ? out.value.back()
                                         : (logSum - prevLog) / (sites - prevSites);
    prevLog = logSum;
    prevSites = sites;
  }
  return out;
}

double csiszarGap(const MeasureRecipe& mu, const MeasureRecipe& nu, const Region& delta,
                  const Region& deltaPrime) {
  if (delta.empty()) throw ContractError("csiszar gap needs a nonempty window");
  if (!isSubset(deltaPrime, delta))
    throw ContractError("csiszar gap needs deltaPrime inside delta");
  if (delta.size() > 20) throw EngineError("csiszar window above 2^20 states");

  const FiniteMeasure muD = mu.marginal(delta);
  const FiniteMeasure nuD = nu.marginal(delta);
  const double hD = relativeEntropy(muD, nuD);
  if (!std::isfinite(hD)) throw EngineError("relative entropy infinite on the window");

  if (deltaPrime.empty()) {
    double l1 = 0;
    for (std::uint64_t c = 0; c < muD.size(); ++c) l1 += std::abs(muD.prob(c) - nuD.prob(c));
    return hD - 0.5 * l1 * l1;
  }

  const FiniteMeasure muP = mu.marginal(deltaPrime);
  const FiniteMeasure nuP = nu.marginal(deltaPrime);
  const double hP = relativeEntropy(muP, nuP);
  if (!std::isfinite(hP)) throw EngineError("relative entropy infinite on the inner window");

  const auto emb = embedding(deltaPrime, delta);
  double l1 = 0;
  for (std::uint64_t c = 0; c < muD.size(); ++c) {
    const double q = nuD.prob(c);
    if (q <= 0) continue;
    const double gD = muD.prob(c) / q;
    const std::uint64_t r = extractIndex(c, emb);
    const double qP = nuP.prob(r);
    const double gP = qP > 0 ? muP.prob(r) / qP : 0;
    l1 += q * std::abs(gD - gP);
  }
  return (hD - hP) - 0.5 * l1 * l1;
}

DecouplingReport decouplingConstant(const MeasureRecipe& nu, int n, int gap,
                                    const std::vector<std::pair<Cylinder, Cylinder>>& family) {
  if (n < 0 || gap < 0) throw ContractError("decoupling needs n >= 0 and gap >= 0");
  const Region inner = Region::cube(nu.dim(), n);
  const Region guarded = Region::cube(nu.dim(), n + gap);
  DecouplingReport out;
  for (const auto& [a, b] : family) {
    if (a.region.empty() || b.region.empty()) throw ContractError("empty cylinder");
    if (!isSubset(a.region, inner)) throw ContractError("cylinder A leaves the inner cube");
    if (!disjoint(b.region, guarded)) throw ContractError("cylinder B meets the guarded cube");

    if (nu.independentAcross(a.region, b.region)) {
      ++out.evaluated;
      continue;  // exact factorization, zero contribution
    }
    const double pa = nu.marginal(a.region).prob(a.values);
    const double pb = nu.marginal(b.region).prob(b.values);
    if (pa <= 0 || pb <= 0) {
      ++out.skipped;
      continue;
    }
    const Region u = regionUnion(a.region, b.region);
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < a.region.size(); ++i)
      if ((a.values >> i) & 1u) idx |= std::uint64_t{1} << *u.indexOf(a.region.siteAt(i));
    for (std::size_t i = 0; i < b.region.size(); ++i)
      if ((b.values >> i) & 1u) idx |= std::uint64_t{1} << *u.indexOf(b.region.siteAt(i));
    const double pab = nu.marginal(u).prob(idx);
    if (pab <= 0) {
      ++out.skipped;
      continue;
    }
    ++out.evaluated;
    out.constant = std::max(out.constant, std::abs(std::log(pab / (pa * pb))));
  }
  return out;
}

std::vector<std::pair<Cylinder, Cylinder>> singleSiteCylinderFamily(int dim, int n, int gap) {
  const Region inner = Region::cube(dim, n);
  std::vector<Site> outerSites;
  const int r = n + gap + 1;
  if (dim == 1) {
    outerSites = {site(-r), site(r)};
  } else {
    outerSites = {site(-r, 0), site(r, 0), site(0, -r), site(0, r)};
  }
  std::vector<std::pair<Cylinder, Cylinder>> family;
  for (const Site& x : inner.sites()) {
    for (std::uint64_t va = 0; va < 2; ++va) {
      for (const Site& y : outerSites) {
        for (std::uint64_t vb = 0; vb < 2; ++vb) {
          family.push_back({Cylinder{Region::ofSites(dim, {x}), va},
                            Cylinder{Region::ofSites(dim, {y}), vb}});
        }
      }
    }
  }
  return family;
}

namespace {

double trialScore(const Chain2& trial, const Chain2& nu, const LocalFunction& f) {
  const double rate = relEntropyRate(trial, nu);
  if (!std::isfinite(rate)) return -kInf;
  return trial.expectation(f) - rate;
}

}  // namespace

LegendreReport legendreGap(const LocalFunction& f, const MeasureRecipe& nu, TrialFamily family,
                           int nMax) {
  const auto chain = nu.asChain();
  if (!chain || nu.dim() != 1)
    throw EngineError("trial families have closed-form entropy rates only for chain measures");
  LegendreReport out;
  out.pressure = pressureEstimate(f, nu, nMax).extrapolated;
  out.familyLimited = family == TrialFamily::ProductOnly;

  // nu itself is always admissible: score nu(f) with zero entropy rate
  out.bestValue = chain->expectation(f);
  out.bestA = chain->P(1, 1);
  out.bestB = chain->P(0, 0);

  const int grid = 21;
  double centerA = 0.5, centerB = 0.5, width = 0.5;
  for (int round = 0; round < 4; ++round) {
    for (int i = 0; i < grid; ++i) {
      const double a =
          std::clamp(centerA + width * (2.0 * i / (grid - 1) - 1.0), 1e-6, 1.0 - 1e-6);
      if (family == TrialFamily::ProductOnly) {
        const double s = trialScore(Chain2::iid(a), *chain, f);
        if (s > out.bestValue) {
          out.bestValue = s;
          out.bestA = a;
          out.bestB = 1 - a;
        }
        continue;
      }
      for (int j = 0; j < grid; ++j) {
        const double b =
            std::clamp(centerB + width * (2.0 * j / (grid - 1) - 1.0), 1e-6, 1.0 - 1e-6);
        const double s = trialScore(Chain2::ofPersistence(a, b), *chain, f);
        if (s > out.bestValue) {
          out.bestValue = s;
          out.bestA = a;
          out.bestB = b;
        }
      }
    }
    centerA = out.bestA;
    centerB = family == TrialFamily::ProductOnly ? 1 - out.bestA : out.bestB;
    width *= 0.15;
  }

  out.gap = out.pressure - out.bestValue;
  if (out.familyLimited) {
    out.certificate = "family-limited search (independent trials only)";
  } else if (std::abs(out.gap) < 1e-6) {
    out.certificate = "order-1 trial attains the tilted pressure";
  } else {
    out.certificate = "no equality certificate at this tolerance";
  }
  return out;
}

namespace {

double densityAt(const FiniteMeasure& num, const FiniteMeasure& den, std::uint64_t c) {
  const double q = den.prob(c);
  const double p = num.prob(c);
  if (q <= 0) {
    if (p > 0) throw EngineError("density undefined: absolute continuity fails");
    return 0;
  }
  return p / q;
}

}  // namespace

CmBreakdown cmTerm(const MeasureRecipe& mu, const MeasureRecipe& nu, const KernelRecipe& gamma,
                   const Region& lambda, int M, const Tail& theta, const LocalFunction& f,
                   int mRef) {
  if (lambda.empty()) throw ContractError("cm term needs a nonempty volume");
  if (mRef <= M) throw ContractError("the reference radius must exceed M");
  if (!(gamma.volume() == lambda)) throw ContractError("kernel volume mismatch");
  if (!isSubset(f.support(), lambda))
    throw ContractError("cm term needs f supported in the volume");
  const int dim = lambda.dim();
  const Region lamM = Region::cube(dim, M);
  const Region lamRef = Region::cube(dim, mRef);
  if (!isSubset(lambda, lamM)) throw ContractError("the M cube must contain the volume");
  const Region ann = regionMinus(lamM, lambda);
  const Region annRef = regionMinus(lamRef, lambda);
  if (ann.empty()) throw ContractError("the annulus is empty at this M");
  if (annRef.size() > 20) throw EngineError("annulus enumeration above 2^20 states");
  const Region dep = gamma.dependenceSet();
  if (!disjoint(dep, lambda)) throw ContractError("kernel depends on its own volume");
  if (dep.size() > 63) throw EngineError("kernel dependence set too wide to key");

  const FiniteMeasure nuRef = nu.marginal(annRef);
  const FiniteMeasure muRef = mu.marginal(annRef);
  const FiniteMeasure nuAnn = nu.marginal(ann);
  const FiniteMeasure muAnn = mu.marginal(ann);
  const FiniteMeasure nuFull = nu.marginal(lamM);
  const FiniteMeasure muFull = mu.marginal(lamM);

  // rows depend only on the dependence-set spins; cache expectation values
  std::unordered_map<std::uint64_t, double> rowCache;
  const auto truncatedGammaF = [&](std::uint64_t a, bool ref) {
    const Region& window = ref ? annRef : ann;
    std::uint64_t key = 0;
    std::vector<int8_t> spins(dep.size());
    for (std::size_t k = 0; k < dep.size(); ++k) {
      const Site& s = dep.siteAt(k);
      int spin;
      if (window.contains(s)) {
        // the annulus is a sub-region of annRef, so index through annRef
        const auto refBit = annRef.indexOf(s);
        spin = ((a >> *refBit) & 1u) ? +1 : -1;
      } else {
        spin = theta.spin(s);
      }
      spins[k] = static_cast<int8_t>(spin);
      if (spin > 0) key |= std::uint64_t{1} << k;
    }
    const auto hit = rowCache.find(key);
    if (hit != rowCache.end()) return hit->second;
    const double value = gamma.row(TailedConfiguration(dep, spins, theta)).expectation(f);
    rowCache.emplace(key, value);
    return value;
  };

  CmBreakdown out;
  const auto embAnn = embedding(ann, annRef);
  for (std::uint64_t a = 0; a < nuRef.size(); ++a) {
    const double gM = truncatedGammaF(a, false);
    const double gRef = truncatedGammaF(a, true);
    const double gAnn = densityAt(muAnn, nuAnn, extractIndex(a, embAnn));
    out.cM += nuRef.prob(a) * gAnn * (gM - gRef);
    out.aM += muRef.prob(a) * (gRef - gM);
    out.muGammaF += muRef.prob(a) * gRef;
  }

  const auto embAnnFull = embedding(ann, lamM);
  const auto embLam = embedding(lambda, lamM);
  for (std::uint64_t c = 0; c < nuFull.size(); ++c) {
    const double fVal = f.atIndex(extractIndex(c, embLam));
    const double pMu = muFull.prob(c);
    if (nuFull.prob(c) <= 0 && pMu > 0)
      throw EngineError("density undefined: absolute continuity fails");
    const double gAnn = densityAt(muAnn, nuAnn, extractIndex(c, embAnnFull));
    out.bM += nuFull.prob(c) * gAnn * fVal - pMu * fVal;
    out.muF += pMu * fVal;
  }

  std::ostringstream flags;
  flags << "gamma approximated by its truncation at mRef=" << mRef;
  out.flags = flags.str();
  return out;
}

}  // namespace spinlab
