#include <spinlab/experiment.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include <json.hpp>

#include <spinlab/config.hpp>
#include <spinlab/csv.hpp>
#include <spinlab/enumerate.hpp>
#include <spinlab/quasilocality.hpp>
#include <spinlab/recipes.hpp>
#include <spinlab/renormalization.hpp>
#include <spinlab/specification.hpp>
#include <spinlab/strip.hpp>
#include <spinlab/thermo.hpp>
#include <spinlab/transfer1d.hpp>

namespace spinlab {

namespace {

using nlohmann::json;
using Schema = std::map<std::string, std::set<std::string>>;

struct Ctx {
  Config cfg;
  std::string subcommand;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::string> violations;
  json results;

  void table(std::string file, CsvTable t) { tables.emplace_back(std::move(file), std::move(t)); }
  void violation(std::string msg) { violations.push_back(std::move(msg)); }
};

// free-form text entering a data row; ',' is the delimiter, so swap it out
std::string cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

std::string cellBool(bool b) { return b ? "1" : "0"; }

// ---- config -> library objects ----

int dimFrom(const Config& cfg, const std::string& section) {
  int d = cfg.getInt(section, "dim", 1);
  if (d != 1 && d != 2) throw ConfigError(section + ".dim must be 1 or 2");
  return d;
}

Interaction modelFrom(const Config& cfg, const std::string& section) {
  return Interaction(cfg.getDouble(section, "j", 1.0), cfg.getDouble(section, "h", 0.0),
                     cfg.requireDouble(section, "beta"));
}

Tail tailFrom(const std::string& name, int dim, const std::string& where) {
  if (name == "plus") return Tail::allPlus();
  if (name == "minus") return Tail::allMinus();
  if (name == "alternating") return Tail::alternating(dim);
  if (name.rfind("chi:", 0) == 0) {
    if (dim != 1) throw ConfigError(where + ": chi tails are one-dimensional");
    int m = 0;
    try {
      m = std::stoi(name.substr(4));
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad tail '" + name + "'");
    }
    if (m < 1) throw ConfigError(where + ": chi index must be >= 1");
    return TailFamily{}.chi(m);
  }
  throw ConfigError(where + ": unknown tail '" + name + "' (plus, minus, alternating, chi:<m>)");
}

const std::set<std::string>& recipeKeys() {
  static const std::set<std::string> keys = {
      "kind", "dim", "pplus", "beta",  "j", "h",
      "a",    "b",   "spacing", "noise", "emitplusgivenminus", "emitplusgivenplus"};
  return keys;
}

RecipePtr recipeFrom(const Config& cfg, const std::string& section) {
  const std::string kind = cfg.require(section, "kind");
  if (kind == "product") return productRecipe(dimFrom(cfg, section), cfg.requireDouble(section, "pplus"));
  if (kind == "gibbs-chain") return gibbsChainRecipe(modelFrom(cfg, section));
  if (kind == "persistence") {
    double a = cfg.requireDouble(section, "a");
    double b = cfg.requireDouble(section, "b");
    return chainRecipe(Chain2::ofPersistence(a, b),
                       "persistence chain a=" + csvNum(a) + " b=" + csvNum(b));
  }
  if (kind == "decimated-chain")
    return decimatedChainRecipe(modelFrom(cfg, section), cfg.getInt(section, "spacing", 2));
  if (kind == "emission-chain") {
    const Chain2 source = Chain2::gibbs(modelFrom(cfg, section));
    const int spacing = cfg.getInt(section, "spacing", 2);
    double eMinus, ePlus;
    if (cfg.has(section, "noise")) {
      double p = cfg.requireDouble(section, "noise");
      eMinus = 1.0 / (1.0 + std::exp(2.0 * p));
      ePlus = 1.0 / (1.0 + std::exp(-2.0 * p));
    } else {
      eMinus = cfg.requireDouble(section, "emitplusgivenminus");
      ePlus = cfg.requireDouble(section, "emitplusgivenplus");
    }
    return emissionChainRecipe(source, spacing, eMinus, ePlus, "noisy decimated chain");
  }
  throw ConfigError(section + ".kind: unknown measure '" + kind +
                    "' (product, gibbs-chain, persistence, decimated-chain, emission-chain)");
}

const std::set<std::string>& observableKeys() {
  static const std::set<std::string> keys = {"kind", "scale", "value", "x", "y", "x2", "y2", "radius"};
  return keys;
}

LocalFunction observableFrom(const Config& cfg, const std::string& section, int dim) {
  const std::string kind = cfg.get(section, "kind", "zero");
  LocalFunction f;
  if (kind == "zero") {
    f = LocalFunction::constant(dim, 0.0);
  } else if (kind == "constant") {
    f = LocalFunction::constant(dim, cfg.requireDouble(section, "value"));
  } else if (kind == "spin") {
    f = LocalFunction::spinAt(dim, site(cfg.getInt(section, "x", 0), cfg.getInt(section, "y", 0)));
  } else if (kind == "pair") {
    f = LocalFunction::pairProduct(
        dim, site(cfg.getInt(section, "x", 0), cfg.getInt(section, "y", 0)),
        site(cfg.getInt(section, "x2", 1), cfg.getInt(section, "y2", 0)));
  } else if (kind == "magnetization") {
    f = LocalFunction::magnetization(Region::cube(dim, cfg.getInt(section, "radius", 1)));
  } else if (kind == "indicator-plus") {
    f = LocalFunction::indicatorAllPlus(Region::cube(dim, cfg.getInt(section, "radius", 0)));
  } else {
    throw ConfigError(section + ".kind: unknown observable '" + kind + "'");
  }
  const double scale = cfg.getDouble(section, "scale", 1.0);
  if (scale == 1.0) return f;
  std::vector<double> table = f.table();
  for (double& v : table) v *= scale;
  return LocalFunction(f.support(), std::move(table));
}

const std::set<std::string>& transformKeys() {
  static const std::set<std::string> keys = {"kind", "spacing", "p", "imageradius"};
  return keys;
}

Transformation transformFrom(const Config& cfg, const std::string& section, int dim) {
  const std::string kind = cfg.require(section, "kind");
  const int spacing = cfg.getInt(section, "spacing", 2);
  if (kind == "decimation") return Transformation::decimation(dim, spacing);
  if (kind == "kadanoff")
    return Transformation::kadanoff(dim, spacing, cfg.requireDouble(section, "p"));
  if (kind == "majority") return Transformation::majority(dim, spacing);
  if (kind == "noisy-decimation")
    return Transformation::noisyDecimation(dim, spacing, cfg.requireDouble(section, "p"));
  if (kind == "projection") {
    if (dim != 2) throw ConfigError(section + ": projection needs a two-dimensional model");
    return Transformation::layerProjection();
  }
  if (kind == "noisy-projection") {
    if (dim != 2) throw ConfigError(section + ": projection needs a two-dimensional model");
    return Transformation::noisyLayerProjection(cfg.requireDouble(section, "p"));
  }
  throw ConfigError(section + ".kind: unknown transformation '" + kind + "'");
}

std::vector<int> increasingList(const Config& cfg, const std::string& section,
                                const std::string& key, std::vector<int> fallback) {
  std::vector<int> v = cfg.getIntList(section, key, fallback);
  if (v.empty()) throw ConfigError(section + "." + key + ": empty list");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) throw ConfigError(section + "." + key + ": must increase strictly");
  return v;
}

// ---- handlers ----

void runPressure(Ctx& c) {
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const LocalFunction f = observableFrom(c.cfg, "observable", nu->dim());
  const int nMax = c.cfg.getInt("series", "nmax", 10);

  PressureSeries s = pressureEstimate(f, *nu, nMax);
  CsvTable t("tilted log-sum growth under " + nu->describe() + "; method=" + s.method,
             {"n", "value"});
  for (std::size_t i = 0; i < s.n.size(); ++i)
    t.addRow({csvNum(s.n[i]), csvNum(s.value[i])});
  c.table("pressure.csv", std::move(t));
  c.results["extrapolated"] = s.extrapolated;
  c.results["method"] = s.method;
}

void runEntropyDensity(Ctx& c) {
  RecipePtr mu = recipeFrom(c.cfg, "mu");
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const int nMax = c.cfg.getInt("series", "nmax", 8);

  EntropySeries es = entropyDensitySeries(*mu, *nu, nMax);
  CsvTable t("window relative entropy of " + mu->describe() + " against " + nu->describe() +
                 "; method=" + es.method,
             {"n", "h", "persite", "increment"});
  for (std::size_t i = 0; i < es.n.size(); ++i)
    t.addRow({csvNum(es.n[i]), csvNum(es.h[i]), csvNum(es.perSite[i]), csvNum(es.increment[i])});
  c.table("entropy.csv", std::move(t));
  c.results["lastPerSite"] = es.lastPerSite;
  c.results["lastIncrement"] = es.lastIncrement;

  if (c.cfg.has("csiszar", "deltaradius")) {
    const int dr = c.cfg.requireInt("csiszar", "deltaradius");
    const int dpr = c.cfg.requireInt("csiszar", "deltaprimeradius");
    if (dpr > dr) throw ConfigError("csiszar.deltaprimeradius must not exceed deltaradius");
    const double gap = csiszarGap(*mu, *nu, Region::cube(mu->dim(), dr),
                                  Region::cube(mu->dim(), dpr));
    CsvTable ct("entropy gap minus half squared L1 distance of the window densities",
                {"deltaradius", "deltaprimeradius", "gap"});
    ct.addRow({csvNum(dr), csvNum(dpr), csvNum(gap)});
    c.table("csiszar.csv", std::move(ct));
    c.results["csiszarGap"] = gap;
    if (gap < -1e-12)
      c.violation("entropy gap fell below the half squared distance: gap=" + csvNum(gap));
  }
}

void runVariationalCheck(Ctx& c) {
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const LocalFunction f = observableFrom(c.cfg, "observable", nu->dim());
  const int nMax = c.cfg.getInt("trials", "nmax", 10);
  const std::string fam = c.cfg.get("trials", "family", "markov1");
  TrialFamily family;
  if (fam == "markov1")
    family = TrialFamily::Markov1;
  else if (fam == "product")
    family = TrialFamily::ProductOnly;
  else
    throw ConfigError("trials.family must be markov1 or product");

  LegendreReport r = legendreGap(f, *nu, family, nMax);
  CsvTable t("tilted pressure against the best trial law; reference " + nu->describe(),
             {"pressure", "bestvalue", "gap", "besta", "bestb", "familylimited", "certificate"});
  t.addRow({csvNum(r.pressure), csvNum(r.bestValue), csvNum(r.gap), csvNum(r.bestA),
            csvNum(r.bestB), cellBool(r.familyLimited), cell(r.certificate)});
  c.table("variational.csv", std::move(t));
  c.results["gap"] = r.gap;
  c.results["familyLimited"] = r.familyLimited;
  if (r.gap < -1e-9)
    c.violation("trial value exceeded the pressure: gap=" + csvNum(r.gap));
}

void runDecoupling(Ctx& c) {
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const int n = c.cfg.getInt("scan", "n", 2);
  const std::vector<int> gaps = increasingList(c.cfg, "scan", "gaps", {1, 2, 3, 4});

  CsvTable t("log correlation bound between the inner cube and far single sites under " +
                 nu->describe(),
             {"n", "gap", "constant", "evaluated", "skipped"});
  const bool productLaw = c.cfg.require("nu", "kind") == "product";
  for (int gap : gaps) {
    if (gap < 1) throw ConfigError("scan.gaps: gaps must be >= 1");
    auto family = singleSiteCylinderFamily(nu->dim(), n, gap);
    DecouplingReport r = decouplingConstant(*nu, n, gap, family);
    t.addRow({csvNum(n), csvNum(gap), csvNum(r.constant), csvNum(r.evaluated),
              csvNum(r.skipped)});
    if (productLaw && r.constant != 0.0)
      c.violation("product law must decouple exactly; gap=" + csvNum(gap) +
                  " constant=" + csvNum(r.constant));
  }
  c.table("decoupling.csv", std::move(t));
}

void runKernelCheck(Ctx& c) {
  const int dim = dimFrom(c.cfg, "model");
  const Interaction phi = modelFrom(c.cfg, "model");
  const int outer = c.cfg.getInt("check", "outerradius", dim == 1 ? 3 : 1);
  const double tol = c.cfg.getDouble("check", "tolerance", 1e-10);
  if (outer < 1) throw ConfigError("check.outerradius must be >= 1");
  const std::vector<std::string> tails =
      c.cfg.getStringList("check", "boundaries", {"plus", "minus", "alternating"});

  CsvTable t("kernel axioms for the nearest-neighbor model beta=" + csvNum(phi.beta) +
                 " j=" + csvNum(phi.j) + " h=" + csvNum(phi.h),
             {"check", "detail", "value", "pass"});
  bool allPass = true;
  auto row = [&](const std::string& check, const std::string& detail, double value, bool pass) {
    t.addRow({check, cell(detail), csvNum(value), cellBool(pass)});
    allPass = allPass && pass;
  };

  std::vector<KernelPtr> kernels;
  for (int r = 0; r <= outer; ++r) kernels.push_back(gibbsKernelRecipe(phi, Region::cube(dim, r)));

  for (int r = 0; r <= outer; ++r) {
    const Site probe = dim == 1 ? site(r + 2) : site(r + 2, 0);
    const LocalFunction b = LocalFunction::indicatorAllPlus(Region::ofSites(dim, {probe}));
    for (const std::string& name : tails) {
      const TailedConfiguration omega =
          TailedConfiguration::ofTail(dim, tailFrom(name, dim, "check.boundaries"));
      const double v = propernessCheck(*kernels[r], b, omega);
      row("properness", "radius=" + std::to_string(r) + " tail=" + name, v, v == 0.0);
    }
  }

  for (int ri = 0; ri < outer; ++ri) {
    for (int ro = ri + 1; ro <= outer; ++ro) {
      const Region dep = kernels[ro]->dependenceSet();
      if (dep.size() > 16)
        throw EngineError("consistency scan needs <= 16 boundary sites, got " +
                          std::to_string(dep.size()));
      double worst = 0;
      const std::uint64_t nBoundary = std::uint64_t{1} << dep.size();
      for (std::uint64_t idx = 0; idx < nBoundary; ++idx) {
        const TailedConfiguration boundary = fromIndex(dep, idx, Tail::allPlus());
        worst = std::max(worst, consistencyCheck(*kernels[ro], *kernels[ri], boundary));
      }
      row("consistency",
          "inner=" + std::to_string(ri) + " outer=" + std::to_string(ro) +
              " boundaries=" + std::to_string(nBoundary),
          worst, worst < tol);
    }
  }

  {
    SpinSystem sys{phi, Region::cube(dim, outer),
                   TailedConfiguration::ofTail(dim, Tail::allPlus()), {}, false};
    const FiniteMeasure mu = enumerateMeasure(sys);
    for (int r = 0; r < outer; ++r) {
      const double v = dlrResidual(mu, *kernels[r]);
      row("dlr", "window=" + std::to_string(outer) + " kernel=" + std::to_string(r), v, v < tol);
    }
  }

  if (c.cfg.has("transform", "kind")) {
    const Transformation tr = transformFrom(c.cfg, "transform", dim);
    const Region imageVol =
        Region::cube(tr.imageDim(), c.cfg.getInt("transform", "imageradius", 0));
    const KernelPtr gamma = gibbsKernelRecipe(phi, tr.sourceSitesFor(imageVol));
    const JointKernelTable table = jointKernelTable(*gamma, tr, imageVol);
    const MonotonicityReport rep = checkMonotonicity(toSlotKernel(table));
    row("monotonicity",
        rep.exhaustive ? "exhaustive up-sets" : ("catalogue event " + rep.eventLabel),
        rep.preserving ? 0.0 : rep.lowerValue - rep.upperValue, rep.preserving);
  }

  c.table("kernelcheck.csv", std::move(t));
  c.results["allPass"] = allPass;
  if (!allPass) c.violation("a kernel axiom row failed; see kernelcheck.csv");
}

void runDecimate(Ctx& c) {
  const int dim = dimFrom(c.cfg, "model");
  const Interaction phi = modelFrom(c.cfg, "model");
  const Transformation tr = transformFrom(c.cfg, "transform", dim);
  const int radius = c.cfg.getInt("window", "radius", 2);
  const std::string boundary = c.cfg.get("window", "boundary", "free");

  SpinSystem sys{phi, Region::cube(dim, radius), std::nullopt, {}, false};
  if (boundary != "free")
    sys.exterior = TailedConfiguration::ofTail(dim, tailFrom(boundary, dim, "window.boundary"));
  const FiniteMeasure mu = enumerateMeasure(sys);
  const FiniteMeasure img = pushforward(mu, tr);
  if (img.support().empty())
    throw ConfigError("window.radius leaves no complete block; enlarge the window");

  CsvTable t("image law of " + tr.describe() + " pushed from a radius-" + std::to_string(radius) +
                 " window",
             {"index", "config", "probability"});
  const std::size_t nSites = img.support().size();
  for (std::uint64_t idx = 0; idx < img.size(); ++idx) {
    std::string conf(nSites, '+');
    for (std::size_t i = 0; i < nSites; ++i)
      if (spinOfBit(idx, static_cast<int>(i)) < 0) conf[i] = '-';
    t.addRow({csvNum(idx), conf, csvNum(img.prob(idx))});
  }
  c.table("image.csv", std::move(t));

  std::vector<Region> probes = {Region::cube(tr.imageDim(), 0), Region::cube(tr.imageDim(), 1)};
  BlockSpinReport rep = blockSpinCheck(tr, probes);
  CsvTable bt("single-site block structure of " + tr.describe(),
              {"strictlocality", "alphadeclared", "alphaestimate", "factorization",
               "residual", "witness"});
  bt.addRow({cellBool(rep.strictLocality), csvNum(tr.alpha()), csvNum(rep.alphaEstimate),
             cellBool(rep.factorization), csvNum(rep.factorizationResidual), cell(rep.witness)});
  c.table("blockcheck.csv", std::move(bt));

  const Site imageOrigin = tr.imageDim() == 1 ? site(0) : site(0, 0);
  const int blockSize = static_cast<int>(tr.blockFor(imageOrigin).size());
  CsvTable kt("image-spin probability given the block sum", {"blocksum", "pplus", "pminus"});
  for (int s = -blockSize; s <= blockSize; s += 2)
    kt.addRow({csvNum(s), csvNum(singleSiteKernelProb(tr.kind, tr.p, s, +1)),
               csvNum(singleSiteKernelProb(tr.kind, tr.p, s, -1))});
  c.table("kernel.csv", std::move(kt));

  c.results["imageSites"] = nSites;
  c.results["factorization"] = rep.factorization;
  if (!rep.factorization)
    c.violation("block factorization failed: " + rep.witness);
}

// shared by quasilocality-scan and the strip-backed image recipes
Strip stripFrom(const Config& cfg, const Interaction& phi, int halfColumns) {
  const int width = cfg.getInt("strip", "width", 3);
  const std::string boundary = cfg.get("strip", "boundary", "plus");
  Strip strip;
  strip.phi = phi;
  strip.x0 = -halfColumns;
  strip.x1 = halfColumns;
  strip.y0 = -(width - 1) / 2;
  strip.width = width;
  if (boundary != "free")
    strip.exterior = TailedConfiguration::ofTail(2, tailFrom(boundary, 2, "strip.boundary"));
  return strip;
}

void runQuasilocalityScan(Ctx& c) {
  const int dim = dimFrom(c.cfg, "model");
  const Interaction phi = modelFrom(c.cfg, "model");
  const Transformation tr = transformFrom(c.cfg, "transform", dim);

  const std::vector<int> ms = increasingList(c.cfg, "scan", "ms", {1, 2, 3, 4, 5, 6, 7, 8});
  const int mRef = c.cfg.getInt("scan", "mref", ms.back() + 1);
  if (mRef <= ms.back()) throw ConfigError("scan.mref must exceed every scanned m");
  const double epsilon = c.cfg.getDouble("scan", "epsilon", 0.01);
  const std::uint64_t budget = c.cfg.getU64("scan", "budget", std::uint64_t{1} << 18);
  const double alphaScale = c.cfg.getDouble("scan", "alphascale", 1.0);
  const Tail theta = tailFrom(c.cfg.get("scan", "theta", "minus"), 1, "scan.theta");
  const TailedConfiguration omega =
      TailedConfiguration::ofTail(1, tailFrom(c.cfg.get("scan", "omega", "plus"), 1, "scan.omega"));

  RenormScenario s;
  s.phi = phi;
  s.t = tr;
  s.imageVolume = Region::ofSites(1, {site(0)});
  s.fImage = LocalFunction::spinAt(1, site(0));
  s.condition = TailedConfiguration(
      regionMinus(Region::cube(1, mRef), s.imageVolume),
      std::vector<int8_t>(static_cast<std::size_t>(2 * mRef), int8_t{1}), theta);
  s.fillDepth = c.cfg.getInt("scan", "fillpad", 4);
  s.stripWidth = c.cfg.getInt("strip", "width", 3);
  s.engine = c.cfg.get("scan", "engine", "auto");
  s.mc = McSchedule{c.cfg.getInt("scan", "mcchains", 4), c.cfg.getInt("scan", "mcsweeps", 4096),
                    c.cfg.getInt("scan", "mcburnin", 512), 1, c.seed, c.threads};

  RecipePtr imageLaw;
  if (tr.kind == Transformation::Kind::Decimation && dim == 1) {
    imageLaw = decimatedChainRecipe(phi, tr.spacing);
  } else if (tr.kind == Transformation::Kind::NoisyDecimation && dim == 1) {
    const double eMinus = 1.0 / (1.0 + std::exp(2.0 * tr.p));
    const double ePlus = 1.0 / (1.0 + std::exp(-2.0 * tr.p));
    imageLaw = emissionChainRecipe(Chain2::gibbs(phi), tr.spacing, eMinus, ePlus,
                                   "noisy decimated chain");
  } else if (tr.kind == Transformation::Kind::Projection && dim == 2) {
    const int half = c.cfg.getInt("strip", "halfcolumns", mRef + s.fillDepth);
    if (half < mRef) throw ConfigError("strip.halfcolumns must cover scan.mref");
    imageLaw = stripRowRecipe(stripFrom(c.cfg, phi, half), 0, "projected layer row");
  } else {
    throw ConfigError(
        "quasilocality-scan supports decimation, noisy-decimation (d=1) and projection (d=2)");
  }

  const ConfigFunctionPtr F =
      kernelExpectationFunction(renormKernelRecipe(s), LocalFunction::spinAt(1, site(0)));

  const bool crossCheck = c.cfg.getBool("scan", "crosscheck", false);
  ConfigFunctionPtr oracle;
  if (crossCheck) {
    RenormScenario s2 = s;
    s2.engine = c.cfg.get("scan", "crosscheckengine", "enumerate");
    oracle = kernelExpectationFunction(renormKernelRecipe(s2), LocalFunction::spinAt(1, site(0)));
  }

  std::vector<std::string> cols = {"m",     "delta",     "atm",  "atref",
                                   "badset", "evaluated", "alpha", "rateentry"};
  if (crossCheck) cols.push_back("crosscheckdelta");
  CsvTable t("one-site image conditional of " + tr.describe() + "; reference splice mref=" +
                 std::to_string(mRef) + " direction " + c.cfg.get("scan", "theta", "minus"),
             cols);

  BadSetRecord record;
  record.theta = theta;
  record.functionLabel = F->describe();
  record.epsilon = epsilon;
  record.mRef = mRef;
  std::vector<double> alpha;
  std::vector<DirectionalReport> deltas;
  for (int m : ms) {
    deltas.push_back(directionalDelta(*F, omega, theta, m, mRef));
    record.points.push_back(badSetProbability(*imageLaw, *F, theta, epsilon, m, mRef, budget));
    alpha.push_back(alphaScale * m);
  }
  const RateSeries rate = continuityRate(record, alpha);

  for (std::size_t i = 0; i < ms.size(); ++i) {
    std::vector<std::string> rowCells = {
        csvNum(ms[i]),           csvNum(deltas[i].value),
        csvNum(deltas[i].atM),   csvNum(deltas[i].atRef),
        csvNum(record.points[i].probability), csvNum(record.points[i].evaluated),
        csvNum(alpha[i]),        csvNum(rate.entries[i])};
    if (crossCheck) {
      const DirectionalReport d2 = directionalDelta(*oracle, omega, theta, ms[i], mRef);
      rowCells.push_back(csvNum(d2.value));
    }
    t.addRow(std::move(rowCells));
  }
  c.table("quasiscan.csv", std::move(t));
  c.results["limsupEstimate"] = rate.limsupEstimate;
  c.results["imageLaw"] = imageLaw->describe();
}

void runCmTerm(Ctx& c) {
  RecipePtr mu = recipeFrom(c.cfg, "mu");
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const Interaction phi = modelFrom(c.cfg, "model");
  const int radius = c.cfg.getInt("kernel", "radius", 0);
  const Region lambda = Region::cube(1, radius);
  const KernelPtr gamma = gibbsKernelRecipe(phi, lambda);
  const LocalFunction f = observableFrom(c.cfg, "observable", 1);
  if (!isSubset(f.support(), lambda))
    throw ConfigError("observable must live inside the kernel volume");

  const std::vector<int> ms =
      increasingList(c.cfg, "scan", "ms", {radius + 1, radius + 2, radius + 3, radius + 4});
  const int mRef = c.cfg.getInt("scan", "mref", ms.back() + 2);
  if (ms.front() <= radius) throw ConfigError("scan.ms must start beyond kernel.radius");
  if (mRef <= ms.back()) throw ConfigError("scan.mref must exceed every scanned m");
  const Tail theta = tailFrom(c.cfg.get("scan", "theta", "minus"), 1, "scan.theta");

  CsvTable t("splice correction terms for " + mu->describe() + " against " + nu->describe(),
             {"m", "cm", "am", "bm", "mugammaf", "muf", "telescope", "flags"});
  for (int m : ms) {
    CmBreakdown b = cmTerm(*mu, *nu, *gamma, lambda, m, theta, f, mRef);
    const double telescope = b.aM + b.bM + b.cM - (b.muGammaF - b.muF);
    t.addRow({csvNum(m), csvNum(b.cM), csvNum(b.aM), csvNum(b.bM), csvNum(b.muGammaF),
              csvNum(b.muF), csvNum(telescope), cell(b.flags)});
  }
  c.table("cmterm.csv", std::move(t));
}

void runProp1Bound(Ctx& c) {
  RecipePtr mu = recipeFrom(c.cfg, "mu");
  RecipePtr nu = recipeFrom(c.cfg, "nu");
  const int mMax = c.cfg.getInt("series", "mmax", 8);
  const double cRate = c.cfg.requireDouble("bound", "c");
  const double delta = c.cfg.requireDouble("bound", "delta");
  const double alphaScale = c.cfg.getDouble("bound", "alphascale", 1.0);
  if (!(cRate > 0) || !(delta > 0) || !(delta < cRate))
    throw ConfigError("bound: need c > 0 and 0 < delta < c");

  EntropySeries es = entropyDensitySeries(*mu, *nu, mMax);
  std::vector<double> h, alpha;
  std::vector<int> m;
  for (std::size_t i = 0; i < es.n.size(); ++i) {
    if (es.n[i] < 1) continue;  // the bound needs positive alpha
    m.push_back(es.n[i]);
    h.push_back(es.h[i]);
    alpha.push_back(alphaScale * es.n[i]);
  }
  const std::vector<double> bound = prop1Bound(h, alpha, cRate, delta);

  CsvTable t("concentration bound from window entropies; c=" + csvNum(cRate) +
                 " delta=" + csvNum(delta),
             {"m", "h", "alpha", "bound"});
  for (std::size_t i = 0; i < m.size(); ++i)
    t.addRow({csvNum(m[i]), csvNum(h[i]), csvNum(alpha[i]), csvNum(bound[i])});
  c.table("prop1bound.csv", std::move(t));
}

std::string directionColumn(const std::string& preset) {
  std::string out = "dir_";
  for (char ch : preset)
    if (ch != ':') out += ch;
  return out;
}

void runCounterexample(Ctx& c) {
  const int mMax = c.cfg.getInt("family", "mmax", 20);
  if (mMax < 1) throw ConfigError("family.mmax must be >= 1");
  const std::vector<int> ns =
      increasingList(c.cfg, "scan", "ns", {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000});
  const std::vector<std::string> presets =
      c.cfg.getStringList("directions", "presets", {"minus", "alternating", "chi:1", "chi:7"});

  TailFamily family;
  const TailedConfiguration base = family.base();
  std::vector<Tail> dirs;
  std::vector<std::string> cols = {"n", "variation", "expected", "probes", "exact"};
  for (const std::string& p : presets) {
    dirs.push_back(tailFrom(p, 1, "directions.presets"));
    cols.push_back(directionColumn(p));
  }

  CsvTable t("ladder observable probed around the all-plus configuration; mmax=" +
                 std::to_string(mMax),
             cols);
  for (int n : ns) {
    const ConfigFunctionPtr F = counterexampleFunction(family, n, mMax);
    const VariationReport v = variationAt(*F, base, n, mMax);
    const double expected = static_cast<double>(mMax) / (n + mMax);
    std::vector<std::string> rowCells = {csvNum(n), csvNum(v.value), csvNum(expected),
                                         csvNum(v.probes), cellBool(v.exact)};
    for (const Tail& d : dirs) rowCells.push_back(csvNum((*F)(spliceAt(base, n, d))));
    t.addRow(std::move(rowCells));
    if (v.value != expected)
      c.violation("variation at n=" + std::to_string(n) + " is " + csvNum(v.value) +
                  ", ladder value " + csvNum(expected));
  }
  c.table("counterexample.csv", std::move(t));
  c.results["mmax"] = mMax;
}

// ---- registry ----

struct Entry {
  std::string name;
  std::string summary;
  void (*fn)(Ctx&);
  Schema schema;
  std::vector<std::string> ops;
};

std::vector<Entry> buildRegistry() {
  const std::set<std::string> model = {"dim", "beta", "j", "h"};
  const std::set<std::string> series = {"nmax"};
  std::vector<Entry> entries;

  entries.push_back({"kernel-check",
                     "properness, consistency and invariance residuals of the finite-volume kernels",
                     runKernelCheck,
                     {{"model", model},
                      {"check", {"outerradius", "tolerance", "boundaries"}},
                      {"transform", transformKeys()}},
                     {"gibbsKernelRecipe", "propernessCheck", "consistencyCheck", "dlrResidual",
                      "jointKernelTable", "toSlotKernel", "checkMonotonicity"}});
  entries.push_back({"decimate",
                     "push a finite window through a block transformation and report its structure",
                     runDecimate,
                     {{"model", model},
                      {"transform", transformKeys()},
                      {"window", {"radius", "boundary"}}},
                     {"enumerateMeasure", "pushforward", "blockSpinCheck",
                      "singleSiteKernelProb"}});
  entries.push_back({"pressure",
                     "growth rate of tilted partition sums for a local observable",
                     runPressure,
                     {{"nu", recipeKeys()}, {"observable", observableKeys()}, {"series", series}},
                     {"pressureEstimate"}});
  entries.push_back({"entropy-density",
                     "window relative entropy series with the optional quadratic lower bound",
                     runEntropyDensity,
                     {{"mu", recipeKeys()},
                      {"nu", recipeKeys()},
                      {"series", series},
                      {"csiszar", {"deltaradius", "deltaprimeradius"}}},
                     {"entropyDensitySeries", "relativeEntropy", "csiszarGap"}});
  entries.push_back({"variational-check",
                     "tilted pressure against the best trial law from a parametric family",
                     runVariationalCheck,
                     {{"nu", recipeKeys()},
                      {"observable", observableKeys()},
                      {"trials", {"family", "nmax"}}},
                     {"legendreGap"}});
  entries.push_back({"decoupling",
                     "log correlation bounds between a cube and far cylinders",
                     runDecoupling,
                     {{"nu", recipeKeys()}, {"scan", {"n", "gaps"}}},
                     {"decouplingConstant", "singleSiteCylinderFamily"}});
  entries.push_back({"quasilocality-scan",
                     "directional sensitivity and bad-set mass of a renormalized conditional",
                     runQuasilocalityScan,
                     {{"model", model},
                      {"transform", transformKeys()},
                      {"strip", {"width", "halfcolumns", "boundary"}},
                      {"scan",
                       {"ms", "mref", "epsilon", "budget", "alphascale", "theta", "omega",
                        "fillpad", "engine", "crosscheck", "crosscheckengine", "mcchains",
                        "mcsweeps", "mcburnin"}}},
                     {"renormKernelRecipe", "renormalizedConditional", "kernelExpectationFunction",
                      "directionalDelta", "badSetProbability", "continuityRate"}});
  entries.push_back({"cm-term",
                     "splice correction terms of a truncated kernel between two laws",
                     runCmTerm,
                     {{"mu", recipeKeys()},
                      {"nu", recipeKeys()},
                      {"model", model},
                      {"kernel", {"radius"}},
                      {"observable", observableKeys()},
                      {"scan", {"ms", "mref", "theta"}}},
                     {"cmTerm"}});
  entries.push_back({"prop1-bound",
                     "concentration bound assembled from window entropies and scale factors",
                     runProp1Bound,
                     {{"mu", recipeKeys()},
                      {"nu", recipeKeys()},
                      {"series", {"mmax"}},
                      {"bound", {"c", "delta", "alphascale"}}},
                     {"prop1Bound", "entropyDensitySeries"}});
  entries.push_back({"counterexample",
                     "ladder observable whose oscillation survives every finite window",
                     runCounterexample,
                     {{"family", {"mmax"}},
                      {"scan", {"ns"}},
                      {"directions", {"presets"}}},
                     {"counterexampleFunction", "counterexampleF", "variationAt", "spliceAt"}});
  return entries;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = buildRegistry();
  return entries;
}

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

void runExperiment(const std::string& subcommand, const RunOptions& options) {
  const Entry* entry = nullptr;
  for (const Entry& e : registry())
    if (e.name == subcommand) entry = &e;
  if (!entry) throw ConfigError("unknown subcommand '" + subcommand + "'");

  Ctx c;
  c.cfg = Config::parseFile(options.configPath);
  Schema schema = entry->schema;
  schema["output"].insert("directory");
  schema["engine"].insert("seed");
  schema["engine"].insert("threads");
  c.cfg.validate(schema);

  c.subcommand = subcommand;
  c.seed = options.seed.value_or(c.cfg.getU64("engine", "seed", 1));
  int threads = c.cfg.getInt("engine", "threads", 1);
  if (const char* env = std::getenv("SPINLAB_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("SPINLAB_THREADS must be an integer");
    }
  }
  if (options.threads) threads = *options.threads;
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  c.threads = threads;

  const std::string outDir = !options.outDir.empty()
                                 ? options.outDir
                                 : c.cfg.get("output", "directory", "out-" + subcommand);

  const auto t0 = std::chrono::steady_clock::now();
  entry->fn(c);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(outDir);
  json manifest;
  manifest["tool"] = "spinlab";
  manifest["subcommand"] = subcommand;
  manifest["seed"] = c.seed;
  manifest["threads"] = c.threads;
  manifest["config"] = json::object();
  for (const auto& [section, keys] : c.cfg.sections()) {
    json sec = json::object();
    for (const auto& [k, v] : keys) sec[k] = v;
    manifest["config"][section.empty() ? "(top)" : section] = std::move(sec);
  }
  if (!c.results.is_null()) manifest["results"] = c.results;
  manifest["outputs"] = json::array();
  for (const auto& [file, table] : c.tables) {
    table.writeTo((std::filesystem::path(outDir) / file).string());
    manifest["outputs"].push_back(
        {{"file", file}, {"rows", table.rowCount()}, {"columns", table.columns()}});
  }
  // excluded from reproducibility comparisons; everything above is deterministic
  manifest["wallClockSeconds"] = wall;

  std::ofstream mf(std::filesystem::path(outDir) / "manifest.json", std::ios::binary);
  if (!mf) throw ContractError("cannot write manifest.json under '" + outDir + "'");
  mf << manifest.dump(2) << '\n';

  if (!c.violations.empty()) throw ContractError(joined(c.violations));
}

std::vector<std::string> experimentNames() {
  std::vector<std::string> names;
  for (const Entry& e : registry()) names.push_back(e.name);
  return names;
}

std::string experimentSummary(const std::string& subcommand) {
  for (const Entry& e : registry())
    if (e.name == subcommand) return e.summary;
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

std::vector<std::pair<std::string, std::vector<std::string>>> experimentCoverage() {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const Entry& e : registry()) out.emplace_back(e.name, e.ops);
  return out;
}

}  // namespace spinlab
