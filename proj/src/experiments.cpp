#include "svsim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "svsim/coupling.hpp"
#include "svsim/errors.hpp"

namespace svsim {

namespace {

struct ConvAcc {
  RunningStats s[6];
  void merge(const ConvAcc& o) {
    for (int i = 0; i < 6; ++i) s[i].merge(o.s[i]);
  }
};

struct DiffAcc {
  RunningStats fine, diff;
  void merge(const DiffAcc& o) {
    fine.merge(o.fine);
    diff.merge(o.diff);
  }
};

RegressionResult safe_slope(const std::vector<int>& N, const std::vector<MeanCI>& vals) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < N.size(); ++i) {
    if (vals[i].mean > 0.0) pts.emplace_back(N[i], vals[i].mean);
  }
  if (pts.size() < 2) {
    RegressionResult r;
    r.slope = r.intercept = r.r2 = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  return loglog_slope(pts);
}

void add_series_rows(CsvTable& t, const std::string& exp, const ConvergenceSeries& s) {
  const std::string name = to_string(s.scheme);
  if (!s.available) {
    t.add({exp, name, "slope", "log", "nan", ""});
    t.add({exp, name, "slope", "asset", "nan", ""});
    return;
  }
  for (std::size_t i = 0; i < s.N.size(); ++i) {
    t.add({exp, name, std::to_string(s.N[i]), "log", fmt(s.logVals[i].mean), fmt(s.logVals[i].stdErr)});
    t.add({exp, name, std::to_string(s.N[i]), "asset", fmt(s.assetVals[i].mean), fmt(s.assetVals[i].stdErr)});
  }
  t.add({exp, name, "slope", "log", fmt(s.logSlope.slope), ""});
  t.add({exp, name, "slope", "asset", fmt(s.assetSlope.slope), ""});
}

}  // namespace

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("csv row width mismatch");
  rows_.push_back(std::move(row));
}

void CsvTable::append(const CsvTable& other) {
  for (const auto& r : other.rows_) add(r);
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CsvTable measurement_table() { return CsvTable({"experiment", "scheme", "N", "metric", "value", "stderr"}); }

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw ConfigError("no schemes selected");
  if (ladder.size() < 2) throw ConfigError("ladder needs at least two entries");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const int n = ladder[i];
    if (n < 1 || (n & (n - 1)) != 0) throw ConfigError("ladder entries must be powers of two");
    if (i > 0 && n <= ladder[i - 1]) throw ConfigError("ladder must be strictly increasing");
  }
  if (paths < 2) throw ConfigError("need at least two paths");
  for (auto k : schemes) check_supported(k, spec);
}

std::string to_string(ConvMetric m) {
  switch (m) {
    case ConvMetric::Strong: return "strong";
    case ConvMetric::Traj: return "traj";
    case ConvMetric::Terminal: return "terminal";
  }
  return "?";
}

const std::vector<ConvergenceSeries>& ConvergenceStudy::get(ConvMetric m) const {
  return m == ConvMetric::Strong ? strong : m == ConvMetric::Traj ? traj : terminal;
}

ConvergenceStudy convergence_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seed);
  ConvergenceStudy study;
  for (SchemeKind kind : cfg.schemes) {
    ConvergenceSeries base;
    base.scheme = kind;
    base.N = cfg.ladder;
    ConvergenceSeries st = base, tr = base, te = base;
    tr.available = kind != SchemeKind::CMT;
    for (int N : cfg.ladder) {
      const RngStream levelRoot = root.child(static_cast<std::uint64_t>(N));
      const ConvAcc acc = chunked_reduce<ConvAcc>(cfg.paths, [&](ConvAcc& a, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const ConvergenceSample s = convergence_sample(kind, cfg.spec, N, levelRoot.child(i), cfg.cutoff);
          a.s[0].add(s.strongLog);
          a.s[1].add(s.strongAsset);
          a.s[2].add(s.trajLog);
          a.s[3].add(s.trajAsset);
          a.s[4].add(s.termLog);
          a.s[5].add(s.termAsset);
        }
      }, 256);
      st.logVals.push_back(mean_ci(acc.s[0]));
      st.assetVals.push_back(mean_ci(acc.s[1]));
      tr.logVals.push_back(mean_ci(acc.s[2]));
      tr.assetVals.push_back(mean_ci(acc.s[3]));
      te.logVals.push_back(mean_ci(acc.s[4]));
      te.assetVals.push_back(mean_ci(acc.s[5]));
    }
    for (auto* s : {&st, &tr, &te}) {
      if (!s->available) continue;
      s->logSlope = safe_slope(s->N, s->logVals);
      s->assetSlope = safe_slope(s->N, s->assetVals);
    }
    study.strong.push_back(std::move(st));
    study.traj.push_back(std::move(tr));
    study.terminal.push_back(std::move(te));
  }
  return study;
}

CsvTable convergence_table(const ConvergenceStudy& study, ConvMetric m) {
  CsvTable t = measurement_table();
  for (const auto& s : study.get(m)) add_series_rows(t, to_string(m), s);
  return t;
}

CsvTable run_strong_conv(const ExperimentConfig& cfg) { return convergence_table(convergence_study(cfg), ConvMetric::Strong); }
CsvTable run_traj_conv(const ExperimentConfig& cfg) { return convergence_table(convergence_study(cfg), ConvMetric::Traj); }
CsvTable run_terminal_conv(const ExperimentConfig& cfg) {
  return convergence_table(convergence_study(cfg), ConvMetric::Terminal);
}

WeakErrorSeries weak_error_series(const ExperimentConfig& cfg, SchemeKind kind, double K) {
  cfg.validate();
  const RngStream root(cfg.seed);
  const bool conditional = kind != SchemeKind::CMT;
  const bool antithetic = kind == SchemeKind::Weak2 && cfg.spec.ou.has_value();
  WeakErrorSeries out;
  out.scheme = kind;
  out.N = cfg.ladder;
  for (int N : cfg.ladder) {
    const RngStream levelRoot = root.child(static_cast<std::uint64_t>(N));
    const PriceEstimate p = conditional ? romano_touzi_call(cfg.spec, kind, N, K, cfg.paths, levelRoot.child(0), cfg.cutoff)
                                        : plain_call(cfg.spec, kind, N, K, cfg.paths, levelRoot.child(0), cfg.cutoff);
    out.prices.push_back(p);
    const RngStream diffRoot = levelRoot.child(1);
    const DiffAcc acc = chunked_reduce<DiffAcc>(cfg.paths, [&](DiffAcc& a, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        // LevelSample at coarse N: diff = P_2N - P_N
        const LevelSample s = antithetic ? antithetic_weak2_call_levels(cfg.spec, N, K, diffRoot.child(i))
                                         : coupled_call_levels(kind, cfg.spec, N, K, diffRoot.child(i), conditional, cfg.cutoff);
        a.diff.add(-s.diff);
        a.fine.add(s.fine);
      }
    }, 512);
    out.coupledDiff.push_back(mean_ci(acc.diff));
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < out.N.size(); ++i) {
    const double m = std::abs(out.coupledDiff[i].mean);
    if (m > 0.0) pts.emplace_back(out.N[i], m);
  }
  if (pts.size() >= 2) {
    out.slope = loglog_slope(pts);
  } else {
    out.slope.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

CsvTable run_weak_call(const ExperimentConfig& cfg, double K, double reference) {
  CsvTable t = measurement_table();
  for (SchemeKind kind : cfg.schemes) {
    const WeakErrorSeries s = weak_error_series(cfg, kind, K);
    const std::string name = to_string(kind);
    for (std::size_t i = 0; i < s.N.size(); ++i) {
      const std::string n = std::to_string(s.N[i]);
      t.add({"weak-call", name, n, "price", fmt(s.prices[i].mean), fmt(s.prices[i].stdErr)});
      t.add({"weak-call", name, n, "abs_error", fmt(std::abs(s.prices[i].mean - reference)), fmt(s.prices[i].stdErr)});
      t.add({"weak-call", name, n, "coupled_diff", fmt(s.coupledDiff[i].mean), fmt(s.coupledDiff[i].stdErr)});
    }
    t.add({"weak-call", name, "slope", "coupled_diff", fmt(s.slope.slope), ""});
  }
  return t;
}

Payoff parse_payoff(const std::string& s) {
  if (s == "call") return Payoff::Call;
  if (s == "lookback") return Payoff::Lookback;
  throw ConfigError("unknown payoff: " + s);
}

std::string to_string(Payoff p) { return p == Payoff::Call ? "call" : "lookback"; }

LevelSampler make_level_sampler(const ExperimentConfig& cfg, SchemeKind kind, Payoff payoff, double K, int L0) {
  if (payoff == Payoff::Call) return call_level_sampler(cfg.spec, kind, K, L0, cfg.cutoff, kind != SchemeKind::CMT);
  return lookback_level_sampler(cfg.spec, kind, L0, default_lookback_coupling(kind), cfg.cutoff);
}

std::vector<MlmcCostPoint> mlmc_cost_series(const ExperimentConfig& cfg, SchemeKind kind, Payoff payoff,
                                            const std::vector<double>& epsilons, const MlmcConfig& base, double K) {
  const LevelSampler sampler = make_level_sampler(cfg, kind, payoff, K, base.L0);
  const RngStream root(cfg.seed);
  std::vector<MlmcCostPoint> out;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    MlmcConfig c = base;
    c.epsilon = epsilons[i];
    const auto t0 = std::chrono::steady_clock::now();
    MlmcResult r = mlmc_estimate(sampler, c, root.child(i));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back({epsilons[i], std::move(r), secs});
  }
  return out;
}

CsvTable run_mlmc_cost(const ExperimentConfig& cfg, Payoff payoff, const std::vector<double>& epsilons,
                       const MlmcConfig& base, double K, std::optional<double> reference) {
  CsvTable t = measurement_table();
  const std::string exp = "mlmc-" + to_string(payoff);
  for (SchemeKind kind : cfg.schemes) {
    const auto series = mlmc_cost_series(cfg, kind, payoff, epsilons, base, K);
    const std::string name = to_string(kind);
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : series) {
      const std::string e = fmt(p.epsilon);
      const double sd = std::sqrt(p.result.estimatorVariance);
      t.add({exp, name, e, "estimate", fmt(p.result.estimate), fmt(sd)});
      t.add({exp, name, e, "abs_error_vs_reference",
             reference ? fmt(std::abs(p.result.estimate - *reference)) : "nan", ""});
      t.add({exp, name, e, "cost", fmt(p.result.totalCost), ""});
      t.add({exp, name, e, "cost_x_mse", fmt(p.result.totalCost * p.epsilon * p.epsilon), ""});
      t.add({exp, name, e, "levels", std::to_string(p.result.levels.size()), ""});
      t.add({exp, name, e, "wallclock_s", fmt(p.seconds), ""});
      pts.emplace_back(p.epsilon, p.result.totalCost);
    }
    if (pts.size() >= 2) t.add({exp, name, "slope", "cost_vs_epsilon", fmt(loglog_slope(pts).slope), ""});
  }
  return t;
}

CsvTable mlmc_table(const MlmcResult& r) {
  CsvTable t({"level", "N_l", "mean", "variance", "cost"});
  for (const auto& l : r.levels) {
    t.add({std::to_string(l.level), std::to_string(l.nSamples()), fmt(l.mean()), fmt(l.variance()),
           fmt(l.costPerSample * static_cast<double>(l.nSamples()))});
  }
  return t;
}

}  // namespace svsim
