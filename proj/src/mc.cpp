#include "spinlab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace spinlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kInitSweep = ~std::uint64_t{0};

struct CompiledChain {
  std::vector<std::vector<int>> adj;  // in-window neighbor indices
  std::vector<double> field;          // beta * (h + J * exterior), per site
  double bondCoef = 0;
  std::vector<int8_t> fixed;          // 0 free, else the pinned spin
};

CompiledChain compileChain(const SpinSystem& sys) {
  const Region& w = sys.window;
  if (w.empty()) throw ContractError("mc window must be nonempty");
  if (w.size() > 64) throw EngineError("mc window above 64 sites");
  CompiledChain c;
  c.bondCoef = sys.phi.beta * sys.phi.j;
  c.adj.resize(w.size());
  c.field.assign(w.size(), 0.0);
  c.fixed.assign(w.size(), 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double f = sys.phi.h;
    for (const auto& nb : neighbors(w.siteAt(i), w.dim())) {
      if (auto j = w.indexOf(nb))
        c.adj[i].push_back(*j);
      else if (sys.exterior)
        f += sys.phi.j * sys.exterior->spin(nb);
    }
    c.field[i] = sys.phi.beta * f;
  }
  if (sys.ringX) {
    if (w.dim() != 1 || w.size() < 3) throw ContractError("ring needs a 1-D window of >= 3 sites");
    c.adj.front().push_back(static_cast<int>(w.size()) - 1);
    c.adj.back().push_back(0);
  }
  for (const auto& [s, v] : sys.constraints) {
    auto i = w.indexOf(s);
    if (!i) throw ContractError("constraint site outside window");
    if (v != 1 && v != -1) throw ContractError("constraint spin must be +-1");
    if (c.fixed[static_cast<std::size_t>(*i)] != 0)
      throw ContractError("duplicate constraint site");
    c.fixed[static_cast<std::size_t>(*i)] = v;
  }
  return c;
}

std::vector<int8_t> initialState(const CompiledChain& c, std::uint64_t seed,
                                 std::uint64_t chain) {
  std::vector<int8_t> s(c.field.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = c.fixed[i] != 0
               ? c.fixed[i]
               : static_cast<int8_t>(mcUniform(seed, chain, kInitSweep, i) < 0.5 ? 1 : -1);
  return s;
}

void sweepOnce(const CompiledChain& c, std::vector<int8_t>& s, std::uint64_t seed,
               std::uint64_t chain, std::uint64_t sweep) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (c.fixed[i] != 0) continue;
    double local = c.field[i];
    for (int j : c.adj[i]) local += c.bondCoef * s[static_cast<std::size_t>(j)];
    const double pPlus = 1.0 / (1.0 + std::exp(-2.0 * local));
    s[i] = mcUniform(seed, chain, sweep, i) < pPlus ? 1 : -1;
  }
}

std::uint64_t indexOfState(const std::vector<int8_t>& s) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] > 0) idx |= std::uint64_t{1} << i;
  return idx;
}

void validateSchedule(const McSchedule& sched) {
  if (sched.chains < 1) throw ContractError("mc needs at least one chain");
  if (sched.sweeps < 1) throw ContractError("mc needs at least one measured sweep");
  if (sched.burnIn < 0) throw ContractError("mc burn-in must be >= 0");
  if (sched.sweepsPerSample < 1) throw ContractError("sweepsPerSample must be >= 1");
  if (sched.threads < 1) throw ContractError("mc needs at least one thread");
}

// mean of x and batch-mean standard error; trims the tail so batches divide evenly
McEstimate batchStats(const std::vector<std::vector<double>>& perChain) {
  std::vector<double> batchMeans;
  std::uint64_t used = 0;
  for (const auto& xs : perChain) {
    const std::size_t n = xs.size();
    if (n == 0) continue;
    const std::size_t nb = std::min<std::size_t>(16, n);
    const std::size_t len = n / nb;
    for (std::size_t b = 0; b < nb; ++b) {
      double acc = 0;
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) acc += xs[i];
      batchMeans.push_back(acc / static_cast<double>(len));
    }
    used += nb * len;
  }
  McEstimate out;
  out.nSamples = used;
  if (batchMeans.empty()) return out;
  double m = 0;
  for (double b : batchMeans) m += b;
  m /= static_cast<double>(batchMeans.size());
  out.mean = m;
  if (batchMeans.size() > 1) {
    double ss = 0;
    for (double b : batchMeans) ss += (b - m) * (b - m);
    const auto nb = static_cast<double>(batchMeans.size());
    out.standardError = std::sqrt(ss / (nb * (nb - 1)));
  }
  return out;
}

}  // namespace

double mcUniform(std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep,
                 std::uint64_t site) {
  std::uint64_t x = splitmix64(seed ^ 0xD1B54A32D192ED03ULL);
  x = splitmix64(x ^ chain);
  x = splitmix64(x ^ sweep);
  x = splitmix64(x ^ site);
  return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

std::uint64_t SampleStream::totalSamples() const {
  std::uint64_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

SampleStream mcSample(const SpinSystem& sys, const McSchedule& sched) {
  validateSchedule(sched);
  const CompiledChain c = compileChain(sys);
  SampleStream stream;
  stream.window = sys.window;
  stream.seed = sched.seed;
  stream.chains = sched.chains;
  stream.sweepsPerSample = sched.sweepsPerSample;
  stream.burnIn = sched.burnIn;
  stream.constraints = sys.constraints;
  stream.samples.resize(static_cast<std::size_t>(sched.chains));

  const auto runChain = [&](int chain) {
    auto& out = stream.samples[static_cast<std::size_t>(chain)];
    out.reserve(static_cast<std::size_t>(sched.sweeps / sched.sweepsPerSample));
    std::vector<int8_t> state =
        initialState(c, sched.seed, static_cast<std::uint64_t>(chain));
    std::uint64_t sweep = 0;
    for (int i = 0; i < sched.burnIn; ++i)
      sweepOnce(c, state, sched.seed, static_cast<std::uint64_t>(chain), sweep++);
    for (int i = 1; i <= sched.sweeps; ++i) {
      sweepOnce(c, state, sched.seed, static_cast<std::uint64_t>(chain), sweep++);
      if (i % sched.sweepsPerSample == 0) out.push_back(indexOfState(state));
    }
  };

  if (sched.threads == 1 || sched.chains == 1) {
    for (int chain = 0; chain < sched.chains; ++chain) runChain(chain);
  } else {
    const int nThreads = std::min(sched.threads, sched.chains);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nThreads));
    for (int t = 0; t < nThreads; ++t)
      pool.emplace_back([&, t] {
        for (int chain = t; chain < sched.chains; chain += nThreads) runChain(chain);
      });
    for (auto& th : pool) th.join();
  }
  return stream;
}

namespace {

// f evaluated on each sample; importance weights folded in when present
std::vector<std::vector<double>> seriesOf(const SampleStream& stream, const LocalFunction& f) {
  const std::vector<int> emb = embedding(f.support(), stream.window);
  std::vector<std::vector<double>> series(stream.samples.size());
  for (std::size_t c = 0; c < stream.samples.size(); ++c) {
    series[c].reserve(stream.samples[c].size());
    for (std::uint64_t idx : stream.samples[c]) series[c].push_back(f.atIndex(extractIndex(idx, emb)));
  }
  return series;
}

}  // namespace

McEstimate empiricalEstimate(const SampleStream& stream, const LocalFunction& f) {
  if (!isSubset(f.support(), stream.window))
    throw ContractError("function support escapes the sampled window");
  auto series = seriesOf(stream, f);
  if (stream.logWeights.empty()) return batchStats(series);

  if (stream.logWeights.size() != stream.samples.size())
    throw ContractError("log-weights misaligned with samples");
  double wmax = -std::numeric_limits<double>::infinity();
  for (const auto& ws : stream.logWeights)
    for (double w : ws) wmax = std::max(wmax, w);
  if (!std::isfinite(wmax)) throw EngineError("all importance weights vanish");
  // self-normalized ratio, batch means of per-batch ratios for the error bar
  std::vector<std::vector<double>> num(series.size()), den(series.size());
  for (std::size_t c = 0; c < series.size(); ++c) {
    if (stream.logWeights[c].size() != series[c].size())
      throw ContractError("log-weights misaligned with samples");
    num[c].resize(series[c].size());
    den[c].resize(series[c].size());
    for (std::size_t i = 0; i < series[c].size(); ++i) {
      const double w = std::exp(stream.logWeights[c][i] - wmax);
      num[c][i] = w * series[c][i];
      den[c][i] = w;
    }
  }
  const McEstimate nEst = batchStats(num);
  const McEstimate dEst = batchStats(den);
  McEstimate out;
  out.nSamples = nEst.nSamples;
  if (dEst.mean <= 0) throw EngineError("all importance weights vanish");
  out.mean = nEst.mean / dEst.mean;
  // delta-method bar from the two batch series
  std::vector<std::vector<double>> ratioBatches(1);
  for (std::size_t c = 0; c < num.size(); ++c) {
    const std::size_t n = num[c].size();
    if (n == 0) continue;
    const std::size_t nb = std::min<std::size_t>(16, n);
    const std::size_t len = n / nb;
    for (std::size_t b = 0; b < nb; ++b) {
      double an = 0, ad = 0;
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
        an += num[c][i];
        ad += den[c][i];
      }
      ratioBatches[0].push_back(ad > 0 ? an / ad : 0.0);
    }
  }
  out.standardError = batchStats(ratioBatches).standardError;
  return out;
}

FiniteMeasure empiricalLaw(const SampleStream& stream, const Region& record) {
  if (!isSubset(record, stream.window))
    throw ContractError("record region escapes the sampled window");
  if (record.size() > 16) throw EngineError("empirical law above 16 sites");
  const std::vector<int> emb = embedding(record, stream.window);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(Eigen::Index{1} << record.size());
  if (stream.logWeights.empty()) {
    for (const auto& chain : stream.samples)
      for (std::uint64_t idx : chain)
        w[static_cast<Eigen::Index>(extractIndex(idx, emb))] += 1.0;
  } else {
    double wmax = -std::numeric_limits<double>::infinity();
    for (const auto& ws : stream.logWeights)
      for (double lw : ws) wmax = std::max(wmax, lw);
    if (!std::isfinite(wmax)) throw EngineError("all importance weights vanish");
    for (std::size_t c = 0; c < stream.samples.size(); ++c)
      for (std::size_t i = 0; i < stream.samples[c].size(); ++i)
        w[static_cast<Eigen::Index>(extractIndex(stream.samples[c][i], emb))] +=
            std::exp(stream.logWeights[c][i] - wmax);
  }
  return FiniteMeasure::fromWeights(record, w);
}

double integratedAutocorrelation(const SampleStream& stream, const LocalFunction& f) {
  const auto series = seriesOf(stream, f);
  double tauAcc = 0;
  int counted = 0;
  for (const auto& xs : series) {
    const std::size_t n = xs.size();
    if (n < 4) continue;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double c0 = 0;
    for (double x : xs) c0 += (x - mean) * (x - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0) {
      tauAcc += 1.0;
      ++counted;
      continue;
    }
    double tau = 1.0;
    for (std::size_t k = 1; k + 1 < n; k += 2) {
      double ck = 0, ck1 = 0;
      for (std::size_t i = 0; i + k < n; ++i) ck += (xs[i] - mean) * (xs[i + k] - mean);
      for (std::size_t i = 0; i + k + 1 < n; ++i) ck1 += (xs[i] - mean) * (xs[i + k + 1] - mean);
      ck /= static_cast<double>(n) * c0;
      ck1 /= static_cast<double>(n) * c0;
      const double pair = ck + ck1;
      if (pair <= 0) break;
      tau += 2.0 * pair;
    }
    tauAcc += tau;
    ++counted;
  }
  return counted == 0 ? 1.0 : tauAcc / counted;
}

CouplingReport coupledPlusMinus(const SpinSystem& sysPlus, const SpinSystem& sysMinus,
                                const LocalFunction& f, const McSchedule& sched) {
  validateSchedule(sched);
  if (!(sysPlus.window == sysMinus.window))
    throw ContractError("coupled chains need the same window");
  if (sysPlus.constraints != sysMinus.constraints)
    throw ContractError("coupled chains need the same constraints");
  if (!isSubset(f.support(), sysPlus.window))
    throw ContractError("function support escapes the sampled window");
  const CompiledChain cp = compileChain(sysPlus);
  const CompiledChain cm = compileChain(sysMinus);
  const std::vector<int> emb = embedding(f.support(), sysPlus.window);
  const std::size_t n = sysPlus.window.size();

  CouplingReport report;
  std::vector<std::vector<double>> plusSeries(static_cast<std::size_t>(sched.chains));
  std::vector<std::vector<double>> minusSeries(static_cast<std::size_t>(sched.chains));
  std::vector<std::uint64_t> dominated(static_cast<std::size_t>(sched.chains), 0);
  std::vector<std::uint64_t> checked(static_cast<std::size_t>(sched.chains), 0);

  const auto runChain = [&](int chain) {
    std::vector<int8_t> sp(n), sm(n);
    for (std::size_t i = 0; i < n; ++i) {
      sp[i] = cp.fixed[i] != 0 ? cp.fixed[i] : int8_t{1};
      sm[i] = cm.fixed[i] != 0 ? cm.fixed[i] : int8_t{-1};
    }
    std::uint64_t sweep = 0;
    const auto coupledSweep = [&] {
      for (std::size_t i = 0; i < n; ++i) {
        if (cp.fixed[i] != 0) continue;
        const double u =
            mcUniform(sched.seed, static_cast<std::uint64_t>(chain), sweep, i);
        double lp = cp.field[i], lm = cm.field[i];
        for (int j : cp.adj[i]) lp += cp.bondCoef * sp[static_cast<std::size_t>(j)];
        for (int j : cm.adj[i]) lm += cm.bondCoef * sm[static_cast<std::size_t>(j)];
        sp[i] = u < 1.0 / (1.0 + std::exp(-2.0 * lp)) ? 1 : -1;
        sm[i] = u < 1.0 / (1.0 + std::exp(-2.0 * lm)) ? 1 : -1;
      }
      ++sweep;
    };
    for (int i = 0; i < sched.burnIn; ++i) coupledSweep();
    for (int i = 1; i <= sched.sweeps; ++i) {
      coupledSweep();
      bool dom = true;
      for (std::size_t k = 0; k < n; ++k)
        if (sp[k] < sm[k]) {
          dom = false;
          break;
        }
      ++checked[static_cast<std::size_t>(chain)];
      if (dom) ++dominated[static_cast<std::size_t>(chain)];
      if (i % sched.sweepsPerSample == 0) {
        plusSeries[static_cast<std::size_t>(chain)].push_back(
            f.atIndex(extractIndex(indexOfState(sp), emb)));
        minusSeries[static_cast<std::size_t>(chain)].push_back(
            f.atIndex(extractIndex(indexOfState(sm), emb)));
      }
    }
  };

  if (sched.threads == 1 || sched.chains == 1) {
    for (int chain = 0; chain < sched.chains; ++chain) runChain(chain);
  } else {
    const int nThreads = std::min(sched.threads, sched.chains);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nThreads));
    for (int t = 0; t < nThreads; ++t)
      pool.emplace_back([&, t] {
        for (int chain = t; chain < sched.chains; chain += nThreads) runChain(chain);
      });
    for (auto& th : pool) th.join();
  }

  report.plus = batchStats(plusSeries);
  report.minus = batchStats(minusSeries);
  for (std::size_t c = 0; c < checked.size(); ++c) {
    report.sweepsChecked += checked[c];
    report.dominatedSweeps += dominated[c];
  }
  return report;
}

}  // namespace spinlab
