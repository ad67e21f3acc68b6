#include "svsim/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "svsim/errors.hpp"
#include "svsim/pricing.hpp"

namespace svsim {

namespace {

// Fine (2N) and coarse (N) structured data sharing one W path.
struct Levels {
  double h = 0.0, H = 0.0;
  std::vector<WStep> wf, wc;
  std::vector<double> yf, yc;
  std::vector<StepCoef> cf, cc;
  std::vector<double> dBf;
};

Levels build_levels(SchemeKind kind, const VolModelSpec& spec, int N, PathStreams& st, Cutoff cutoff) {
  if (N < 1) throw ConfigError("N must be at least 1");
  check_supported(kind, spec);
  Levels L;
  L.H = spec.T / N;
  L.h = 0.5 * L.H;
  L.wf = draw_w_path(spec.ou, 2 * N, L.h, st.w);
  L.wc = coarsen_path(L.wf, L.h, spec.ou);
  L.dBf.resize(2 * N);
  const double sh = std::sqrt(L.h);
  for (auto& d : L.dBf) d = sh * st.b.gaussian();
  if (kind == SchemeKind::CMT) return L;

  L.yf = factor_nodes(kind, spec, L.wf, L.h);
  if (spec.ou) {
    L.yc.resize(N + 1);
    for (int k = 0; k <= N; ++k) L.yc[k] = L.yf[2 * k];
  } else {
    L.yc = factor_nodes(kind, spec, L.wc, L.H);
  }
  structured_coefs(kind, spec, cutoff, L.yf, L.wf, L.h, L.cf);
  structured_coefs(kind, spec, cutoff, L.yc, L.wc, L.H, L.cc);
  return L;
}

std::vector<double> fine_x(const VolModelSpec& spec, const Levels& L) {
  std::vector<double> x(L.wf.size() + 1);
  x[0] = spec.log_s0();
  for (std::size_t j = 0; j < L.wf.size(); ++j) x[j + 1] = x[j] + L.cf[j].a + L.cf[j].c * L.dBf[j];
  return x;
}

std::vector<double> coarse_db(const Levels& L, BCoupling mode) {
  std::vector<double> out(L.wc.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d1 = L.dBf[2 * k], d2 = L.dBf[2 * k + 1];
    out[k] = mode == BCoupling::Sum ? d1 + d2 : weighted_db(L.cf[2 * k].c, L.cf[2 * k + 1].c, d1, d2);
  }
  return out;
}

std::vector<double> coarse_x(const VolModelSpec& spec, const Levels& L, const std::vector<double>& dB) {
  std::vector<double> x(L.wc.size() + 1);
  x[0] = spec.log_s0();
  for (std::size_t k = 0; k < L.wc.size(); ++k) x[k + 1] = x[k] + L.cc[k].a + L.cc[k].c * dB[k];
  return x;
}

// CMT stepped over the given increments.
std::pair<std::vector<double>, std::vector<double>> cmt_path(const VolModelSpec& spec, double delta,
                                                             const std::vector<double>& dW,
                                                             const std::vector<double>& dB) {
  std::vector<double> x(dW.size() + 1), y(dW.size() + 1);
  x[0] = spec.log_s0();
  y[0] = spec.y0;
  for (std::size_t k = 0; k < dW.size(); ++k) std::tie(x[k + 1], y[k + 1]) = cmt_step(spec, x[k], y[k], delta, dW[k], dB[k]);
  return {x, y};
}

struct CmtPair {
  std::vector<double> xf, xc;
};

CmtPair cmt_levels(const VolModelSpec& spec, const Levels& L) {
  const std::size_t n = L.wc.size();
  std::vector<double> dWf(2 * n), dWc(n), dBc(n);
  for (std::size_t j = 0; j < 2 * n; ++j) dWf[j] = L.wf[j].dW;
  for (std::size_t k = 0; k < n; ++k) {
    dWc[k] = L.wc[k].dW;
    dBc[k] = L.dBf[2 * k] + L.dBf[2 * k + 1];
  }
  return {cmt_path(spec, L.h, dWf, L.dBf).first, cmt_path(spec, L.H, dWc, dBc).first};
}

double sup_sq(const std::vector<double>& xc, const std::vector<double>& xf, bool asset) {
  double m = 0.0;
  for (std::size_t k = 0; k < xc.size(); ++k) {
    const double d = asset ? std::exp(xc[k]) - std::exp(xf[2 * k]) : xc[k] - xf[2 * k];
    m = std::max(m, d * d);
  }
  return m;
}

double sq(double v) { return v * v; }

double bridge_min_var(double left, double right, double var, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("bridge_min: u must lie in (0, 1]");
  const double d = left - right;
  return 0.5 * (left + right - std::sqrt(d * d - 2.0 * var * std::log(u)));
}

GridPath to_grid(const VolModelSpec& spec, std::vector<double> x, std::vector<double> y) {
  GridPath p;
  const std::size_t n = x.size() - 1;
  p.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) p.times[k] = spec.T * static_cast<double>(k) / static_cast<double>(n);
  p.x = std::move(x);
  p.y = std::move(y);
  return p;
}

}  // namespace

double weighted_db(double v1, double v2, double dB1, double dB2) {
  const double n = std::sqrt(v1 * v1 + v2 * v2);
  if (!(n > 0.0)) return dB1 + dB2;
  return std::sqrt(2.0) * (v1 * dB1 + v2 * dB2) / n;
}

double weighted_half_db(double v1, double v2, double dB1, double dB2) {
  const double a = v1 + v2, b = v2 - v1;
  const double n = std::sqrt(a * a + b * b);
  if (!(n > 0.0)) return dB1;
  return (a * dB1 + b * dB2) / n;
}

CoupledPaths coupled_traj_paths(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                Cutoff cutoff, BCoupling mode) {
  if (kind == SchemeKind::CMT) throw ConfigError("cmt does not admit the trajectorial coupling");
  PathStreams st = path_streams(path_rng);
  Levels L = build_levels(kind, spec, N, st, cutoff);
  CoupledPaths out;
  out.coarseDB = coarse_db(L, mode);
  out.fine = to_grid(spec, fine_x(spec, L), L.yf);
  out.coarse = to_grid(spec, coarse_x(spec, L, out.coarseDB), L.yc);
  out.fineW = std::move(L.wf);
  out.fineDB = std::move(L.dBf);
  return out;
}

TerminalPair coupled_terminal(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                              Cutoff cutoff) {
  PathStreams st = path_streams(path_rng);
  Levels L = build_levels(kind, spec, N, st, cutoff);
  TerminalPair out;
  if (kind == SchemeKind::CMT) {
    const CmtPair c = cmt_levels(spec, L);
    out.fine = c.xf.back();
    out.coarse = c.xc.back();
    out.lawFine = {out.fine, 0.0};
    out.lawCoarse = {out.coarse, 0.0};
    return out;
  }
  out.lawFine = terminal_law(L.cf, spec.log_s0(), L.h);
  out.lawCoarse = terminal_law(L.cc, spec.log_s0(), L.H);
  const double G = st.g.gaussian();
  out.fine = out.lawFine.mu + std::sqrt(out.lawFine.s2) * G;
  out.coarse = out.lawCoarse.mu + std::sqrt(out.lawCoarse.s2) * G;
  return out;
}

ConvergenceSample convergence_sample(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                     Cutoff cutoff) {
  PathStreams st = path_streams(path_rng);
  Levels L = build_levels(kind, spec, N, st, cutoff);
  ConvergenceSample s;
  if (kind == SchemeKind::CMT) {
    const CmtPair c = cmt_levels(spec, L);
    s.strongLog = sup_sq(c.xc, c.xf, false);
    s.strongAsset = sup_sq(c.xc, c.xf, true);
    s.trajLog = s.trajAsset = std::numeric_limits<double>::quiet_NaN();
    s.termLog = sq(c.xc.back() - c.xf.back());
    s.termAsset = sq(std::exp(c.xc.back()) - std::exp(c.xf.back()));
    return s;
  }
  const auto xf = fine_x(spec, L);
  const auto xs = coarse_x(spec, L, coarse_db(L, BCoupling::Sum));
  const auto xt = coarse_x(spec, L, coarse_db(L, BCoupling::Weighted));
  s.strongLog = sup_sq(xs, xf, false);
  s.strongAsset = sup_sq(xs, xf, true);
  s.trajLog = sup_sq(xt, xf, false);
  s.trajAsset = sup_sq(xt, xf, true);

  const TerminalLaw lf = terminal_law(L.cf, spec.log_s0(), L.h);
  const TerminalLaw lc = terminal_law(L.cc, spec.log_s0(), L.H);
  const double G = st.g.gaussian();
  const double tf = lf.mu + std::sqrt(lf.s2) * G;
  const double tc = lc.mu + std::sqrt(lc.s2) * G;
  s.termLog = sq(tc - tf);
  s.termAsset = sq(std::exp(tc) - std::exp(tf));
  return s;
}

double bridge_min(double left, double right, double vol2, double delta, double u) {
  if (!(vol2 >= 0.0)) throw std::domain_error("bridge_min: vol2 must be nonnegative");
  if (!(delta > 0.0)) throw std::domain_error("bridge_min: delta must be positive");
  return bridge_min_var(left, right, left * left * vol2 * delta, u);
}

LookbackCoupling default_lookback_coupling(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::WeakTraj1:
    case SchemeKind::WeakTraj1_OU_Exact:
    case SchemeKind::OUImproved: return LookbackCoupling::Weighted;
    default: return LookbackCoupling::BrownianSum;
  }
}

double lookback_single(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng, Cutoff cutoff) {
  if (kind == SchemeKind::CMT) throw ConfigError("lookback pricing is not available for cmt");
  if (N < 1) throw ConfigError("N must be at least 1");
  check_supported(kind, spec);
  PathStreams st = path_streams(path_rng);
  const double h = spec.T / N;
  const double sh = std::sqrt(h);
  const double rb = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
  const auto ws = draw_w_path(spec.ou, N, h, st.w);
  const auto ys = factor_nodes(kind, spec, ws, h);
  std::vector<StepCoef> coefs;
  structured_coefs(kind, spec, cutoff, ys, ws, h, coefs);

  double x = spec.log_s0();
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < N; ++j) {
    const double dB = sh * st.b.gaussian();
    const double left = std::exp(x);
    const double f = spec.f(ys[j]);
    const double se = left * (1.0 + spec.r * h + f * (spec.rho * ws[j].dW + rb * dB));
    lo = std::min(lo, bridge_min(left, se, f * f, h, st.u.uniform()));
    x += coefs[j].a + coefs[j].c * dB;
  }
  return lookback_payoff(lo, std::exp(x), spec.r, spec.T);
}

LevelSample coupled_lookback_levels(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                    LookbackCoupling mode, Cutoff cutoff) {
  if (kind == SchemeKind::CMT) throw ConfigError("lookback coupling is not available for cmt");
  PathStreams st = path_streams(path_rng);
  Levels L = build_levels(kind, spec, N, st, cutoff);
  const double rb = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
  const double r = spec.r, rho = spec.rho;
  std::vector<double> U(2 * N);
  for (auto& u : U) u = st.u.uniform();

  // fine level
  double x = spec.log_s0();
  double loF = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 2 * N; ++j) {
    const double left = std::exp(x);
    const double f = spec.f(L.yf[j]);
    const double se = left * (1.0 + r * L.h + f * (rho * L.wf[j].dW + rb * L.dBf[j]));
    loF = std::min(loF, bridge_min(left, se, f * f, L.h, U[j]));
    x += L.cf[j].a + L.cf[j].c * L.dBf[j];
  }
  const double fine = lookback_payoff(loF, std::exp(x), r, spec.T);

  // coarse level
  double xc = spec.log_s0();
  double loC = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    const double d1 = L.dBf[2 * k], d2 = L.dBf[2 * k + 1];
    const double v1 = L.cf[2 * k].c, v2 = L.cf[2 * k + 1].c;
    double dBt, dBtt;
    if (mode == LookbackCoupling::Weighted) {
      dBt = weighted_db(v1, v2, d1, d2);
      dBtt = weighted_half_db(v1, v2, d1, d2);
    } else {
      dBt = d1 + d2;
      dBtt = d1;
    }
    const double left = std::exp(xc);
    const double f = spec.f(L.yc[k]);
    const double send = left * (1.0 + r * L.H + f * (rho * L.wc[k].dW + rb * dBt));
    const double smid = left * (1.0 + r * L.h + f * (rho * L.wf[2 * k].dW + rb * dBtt));
    // both halves keep the variance frozen at the left coarse node
    const double var = left * left * f * f * L.h;
    loC = std::min(loC, bridge_min_var(left, smid, var, U[2 * k]));
    loC = std::min(loC, bridge_min_var(smid, send, var, U[2 * k + 1]));
    xc += L.cc[k].a + L.cc[k].c * dBt;
  }
  const double coarse = lookback_payoff(loC, std::exp(xc), r, spec.T);
  return {fine, coarse, fine - coarse};
}

LevelSample coupled_call_levels(SchemeKind kind, const VolModelSpec& spec, int N, double K,
                                const RngStream& path_rng, bool conditional, Cutoff cutoff) {
  if (conditional && kind == SchemeKind::CMT) throw ConfigError("conditional pricing is not available for cmt");
  const TerminalPair t = coupled_terminal(kind, spec, N, path_rng, cutoff);
  LevelSample s;
  if (conditional) {
    s.fine = conditional_call(t.lawFine, spec.r, spec.T, K);
    s.coarse = conditional_call(t.lawCoarse, spec.r, spec.T, K);
  } else {
    s.fine = call_payoff(t.fine, K, spec.r, spec.T);
    s.coarse = call_payoff(t.coarse, K, spec.r, spec.T);
  }
  s.diff = s.fine - s.coarse;
  return s;
}

LevelSample antithetic_weak2_call_levels(const VolModelSpec& spec, int N, double K, const RngStream& path_rng) {
  if (!spec.ou) throw ConfigError("antithetic weak2 levels need an OU factor");
  PathStreams st = path_streams(path_rng);
  Levels L = build_levels(SchemeKind::Weak2, spec, N, st, Cutoff::Floor);
  const OUParams& ou = *spec.ou;
  const double a = std::exp(-ou.kappa * L.h);
  const double w = a / (1.0 + a * a);
  std::vector<double> ya = L.yf;
  for (int k = 0; k < N; ++k) {
    const double u0 = L.yf[2 * k] - ou.theta, u2 = L.yf[2 * k + 2] - ou.theta;
    const double mean = ou.theta + a * u0 + w * (u2 - a * a * u0);
    ya[2 * k + 1] = 2.0 * mean - L.yf[2 * k + 1];
  }
  std::vector<StepCoef> ca;
  structured_coefs(SchemeKind::Weak2, spec, Cutoff::Floor, ya, L.wf, L.h, ca);
  const double x0 = spec.log_s0();
  const double pf = conditional_call(terminal_law(L.cf, x0, L.h), spec.r, spec.T, K);
  const double pa = conditional_call(terminal_law(ca, x0, L.h), spec.r, spec.T, K);
  LevelSample s;
  s.fine = 0.5 * (pf + pa);
  s.coarse = conditional_call(terminal_law(L.cc, x0, L.H), spec.r, spec.T, K);
  s.diff = s.fine - s.coarse;
  return s;
}

}  // namespace svsim
