#include "svsim/pricing.hpp"

#include <cmath>
#include <numbers>

#include "svsim/coupling.hpp"
#include "svsim/errors.hpp"
#include "svsim/stats.hpp"

namespace svsim {

namespace {

template <class PathFn>
PriceEstimate estimate(std::size_t nPaths, const RngStream& root, PathFn fn) {
  if (nPaths < 2) throw ConfigError("need at least two paths");
  const RunningStats s = chunked_reduce<RunningStats>(nPaths, [&](RunningStats& acc, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) acc.add(fn(root.child(i)));
  });
  const MeanCI ci = mean_ci(s);
  return {ci.mean, ci.stdErr, ci.halfwidth95, s.count()};
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_call(double s, double totalVar, double r, double T, double K) {
  const double df = std::exp(-r * T);
  if (K <= 0.0) return s - K * df;
  if (!(totalVar > 0.0)) return std::max(s - K * df, 0.0);
  const double sd = std::sqrt(totalVar);
  const double d1 = (std::log(s / (K * df)) + 0.5 * totalVar) / sd;
  return s * normal_cdf(d1) - K * df * normal_cdf(d1 - sd);
}

double conditional_call(const TerminalLaw& law, double r, double T, double K) {
  return bs_call(std::exp(law.mu + 0.5 * law.s2 - r * T), law.s2, r, T, K);
}

double call_payoff(double xT, double K, double r, double T) {
  return std::exp(-r * T) * std::max(std::exp(xT) - K, 0.0);
}

double lookback_payoff(double minimum, double sT, double r, double T) { return std::exp(-r * T) * (sT - minimum); }

PriceEstimate romano_touzi_call(const VolModelSpec& spec, SchemeKind kind, int N, double K, std::size_t nPaths,
                                const RngStream& root, Cutoff cutoff) {
  if (!(std::abs(spec.rho) < 1.0)) throw ConfigError("conditional pricing needs |rho| < 1");
  if (kind == SchemeKind::CMT) throw ConfigError("conditional pricing is not available for cmt");
  if (N < 1) throw ConfigError("N must be at least 1");
  check_supported(kind, spec);
  const double delta = spec.T / N;
  return estimate(nPaths, root, [&](const RngStream& rng) {
    PathStreams st = path_streams(rng);
    const auto ws = draw_w_path(spec.ou, N, delta, st.w);
    const auto ys = factor_nodes(kind, spec, ws, delta);
    std::vector<StepCoef> coefs;
    structured_coefs(kind, spec, cutoff, ys, ws, delta, coefs);
    return conditional_call(terminal_law(coefs, spec.log_s0(), delta), spec.r, spec.T, K);
  });
}

PriceEstimate plain_call(const VolModelSpec& spec, SchemeKind kind, int N, double K, std::size_t nPaths,
                         const RngStream& root, Cutoff cutoff) {
  check_supported(kind, spec);
  return estimate(nPaths, root, [&](const RngStream& rng) {
    return call_payoff(simulate_terminal(kind, spec, N, rng, cutoff), K, spec.r, spec.T);
  });
}

PriceEstimate lookback_price(const VolModelSpec& spec, SchemeKind kind, int N, std::size_t nPaths,
                             const RngStream& root, Cutoff cutoff) {
  check_supported(kind, spec);
  return estimate(nPaths, root,
                  [&](const RngStream& rng) { return lookback_single(kind, spec, N, rng, cutoff); });
}

}  // namespace svsim
