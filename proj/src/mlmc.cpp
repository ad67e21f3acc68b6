#include "svsim/mlmc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "svsim/errors.hpp"
#include "svsim/pricing.hpp"

namespace svsim {

namespace {

RunningStats sample_level(const LevelSampler& sampler, int level, std::size_t first, std::size_t count,
                          const RngStream& root) {
  const RngStream levelRoot = root.child(static_cast<std::uint64_t>(level));
  return chunked_reduce<RunningStats>(
      count,
      [&](RunningStats& acc, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) acc.add(sampler(level, levelRoot.child(first + i)).diff);
      },
      256);
}

// Decay rate of |mean_l| from the last three levels (l >= 1), floored at 1/2.
double estimate_alpha(const std::vector<LevelStats>& levels) {
  std::vector<std::pair<double, double>> pts;
  const int L = static_cast<int>(levels.size()) - 1;
  for (int l = std::max(1, L - 2); l <= L; ++l) {
    const double m = std::abs(levels[l].mean());
    if (m > 0.0) pts.emplace_back(std::exp2(l), m);
  }
  if (pts.size() < 2) return 0.5;
  const double slope = loglog_slope(pts).slope;
  return std::max(0.5, -slope);
}

}  // namespace

void MlmcConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (L0 < 1) throw ConfigError("L0 must be at least 1");
  if (initialSamplesPerLevel < 2) throw ConfigError("need at least two initial samples per level");
  if (startLevel < 0 || startLevel > maxLevel) throw ConfigError("start level must lie in [0, maxLevel]");
}

double level_cost(int level, int L0) { return static_cast<double>(L0) * std::exp2(level); }

MlmcResult mlmc_estimate(const LevelSampler& sampler, const MlmcConfig& cfg, const RngStream& root) {
  cfg.validate();
  const double eps2 = cfg.epsilon * cfg.epsilon;
  std::vector<LevelStats> levels;
  std::vector<std::size_t> extra;
  auto add_level = [&](int l) {
    LevelStats s;
    s.level = l;
    s.costPerSample = level_cost(l, cfg.L0);
    levels.push_back(s);
    extra.push_back(cfg.initialSamplesPerLevel);
  };
  for (int l = 0; l <= cfg.startLevel; ++l) add_level(l);

  MlmcResult out;
  for (;;) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (extra[l] == 0) continue;
      levels[l].stats.merge(sample_level(sampler, static_cast<int>(l), levels[l].nSamples(), extra[l], root));
      extra[l] = 0;
    }
    double sumVC = 0.0;
    for (const auto& s : levels) sumVC += std::sqrt(s.variance() * s.costPerSample);
    bool more = false;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto& s = levels[l];
      const double nOpt = std::ceil(2.0 / eps2 * std::sqrt(s.variance() / s.costPerSample) * sumVC);
      if (nOpt > static_cast<double>(s.nSamples())) {
        extra[l] = static_cast<std::size_t>(nOpt) - s.nSamples();
        more = true;
      }
    }
    if (more) continue;

    out.alpha = estimate_alpha(levels);
    out.achievedBiasBound = std::abs(levels.back().mean()) / (std::exp2(out.alpha) - 1.0);
    if (out.achievedBiasBound < cfg.epsilon / std::sqrt(2.0)) break;
    const int next = static_cast<int>(levels.size());
    if (next > cfg.maxLevel) {
      throw BudgetExceeded("bias criterion not met by level " + std::to_string(cfg.maxLevel));
    }
    add_level(next);
  }

  for (const auto& s : levels) {
    out.estimate += s.mean();
    out.totalCost += static_cast<double>(s.nSamples()) * s.costPerSample;
    out.estimatorVariance += s.variance() / static_cast<double>(s.nSamples());
  }
  out.levels = std::move(levels);
  return out;
}

std::vector<ProbeRow> level_variance_probe(const LevelSampler& sampler, int maxLevel, std::size_t nProbe, int L0,
                                           const RngStream& root) {
  if (nProbe < 100) throw ConfigError("probe needs at least 100 samples per level");
  std::vector<ProbeRow> rows;
  for (int l = 0; l <= maxLevel; ++l) {
    const RunningStats s = sample_level(sampler, l, 0, nProbe, root);
    rows.push_back({l, s.mean(), s.stderr_mean(), s.variance(), level_cost(l, L0)});
  }
  return rows;
}

LevelSampler call_level_sampler(const VolModelSpec& spec, SchemeKind kind, double K, int L0, Cutoff cutoff,
                                bool conditional) {
  check_supported(kind, spec);
  if (conditional && kind == SchemeKind::CMT) throw ConfigError("conditional pricing is not available for cmt");
  return [spec, kind, K, L0, cutoff, conditional](int level, const RngStream& rng) -> LevelSample {
    if (level == 0) {
      double p;
      if (conditional) {
        PathStreams st = path_streams(rng);
        const double delta = spec.T / L0;
        const auto ws = draw_w_path(spec.ou, L0, delta, st.w);
        const auto ys = factor_nodes(kind, spec, ws, delta);
        std::vector<StepCoef> coefs;
        structured_coefs(kind, spec, cutoff, ys, ws, delta, coefs);
        p = conditional_call(terminal_law(coefs, spec.log_s0(), delta), spec.r, spec.T, K);
      } else {
        p = call_payoff(simulate_terminal(kind, spec, L0, rng, cutoff), K, spec.r, spec.T);
      }
      return {p, 0.0, p};
    }
    const int coarseN = L0 << (level - 1);
    return coupled_call_levels(kind, spec, coarseN, K, rng, conditional, cutoff);
  };
}

LevelSampler lookback_level_sampler(const VolModelSpec& spec, SchemeKind kind, int L0, LookbackCoupling mode,
                                    Cutoff cutoff) {
  check_supported(kind, spec);
  if (kind == SchemeKind::CMT) throw ConfigError("lookback coupling is not available for cmt");
  return [spec, kind, L0, mode, cutoff](int level, const RngStream& rng) -> LevelSample {
    if (level == 0) {
      const double p = lookback_single(kind, spec, L0, rng, cutoff);
      return {p, 0.0, p};
    }
    return coupled_lookback_levels(kind, spec, L0 << (level - 1), rng, mode, cutoff);
  };
}

}  // namespace svsim
