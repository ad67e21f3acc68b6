#include "svsim/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "svsim/errors.hpp"

namespace svsim {

namespace {

double rho_bar(const VolModelSpec& spec) { return std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho)); }

double apply_cutoff(const VolModelSpec& spec, Cutoff cutoff, double rad, double y) {
  if (cutoff == Cutoff::Band) rad = std::min(rad, spec.psi_hat(y));
  rad = std::max(rad, spec.psi_lower);
  if (!(rad >= std::max(spec.psi_lower, 0.0))) throw NumericalError("variance radicand below its floor");
  return rad;
}

const OUParams& require_ou(const VolModelSpec& spec, SchemeKind kind) {
  if (!spec.ou) throw ConfigError(to_string(kind) + " needs an Ornstein-Uhlenbeck factor");
  return *spec.ou;
}

}  // namespace

SchemeKind parse_scheme(std::string_view name) {
  if (name == "euler") return SchemeKind::Euler;
  if (name == "weaktraj1") return SchemeKind::WeakTraj1;
  if (name == "weaktraj1-ou") return SchemeKind::WeakTraj1_OU_Exact;
  if (name == "ou-improved") return SchemeKind::OUImproved;
  if (name == "weak2") return SchemeKind::Weak2;
  if (name == "ijk") return SchemeKind::IJK;
  if (name == "cmt") return SchemeKind::CMT;
  throw ConfigError("unknown scheme: " + std::string(name));
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Euler: return "euler";
    case SchemeKind::WeakTraj1: return "weaktraj1";
    case SchemeKind::WeakTraj1_OU_Exact: return "weaktraj1-ou";
    case SchemeKind::OUImproved: return "ou-improved";
    case SchemeKind::Weak2: return "weak2";
    case SchemeKind::IJK: return "ijk";
    case SchemeKind::CMT: return "cmt";
  }
  return "?";
}

Cutoff parse_cutoff(std::string_view name) {
  if (name == "floor") return Cutoff::Floor;
  if (name == "band") return Cutoff::Band;
  throw ConfigError("unknown cutoff: " + std::string(name));
}

std::string to_string(Cutoff c) { return c == Cutoff::Floor ? "floor" : "band"; }

bool requires_ou(SchemeKind kind) {
  return kind == SchemeKind::WeakTraj1_OU_Exact || kind == SchemeKind::OUImproved || kind == SchemeKind::IJK;
}

bool is_structured(SchemeKind kind) { return kind != SchemeKind::CMT; }

void check_supported(SchemeKind kind, const VolModelSpec& spec) {
  if (requires_ou(kind) && !spec.ou) require_ou(spec, kind);
  if (kind == SchemeKind::OUImproved && (!spec.h1 || !spec.h2 || !spec.psi2)) {
    throw ConfigError("ou-improved needs h', h'' and psi''");
  }
  if (kind == SchemeKind::IJK && !spec.f1) throw ConfigError("ijk needs f'");
  if (kind == SchemeKind::Weak2 && !spec.ou && (!spec.flow_v0 || !spec.flow_v)) {
    throw ConfigError("weak2 on a non-OU factor needs closed-form flows");
  }
}

double milstein_step_y(const VolModelSpec& spec, double y, double delta, double dW) {
  const double s = spec.sigma(y);
  return y + spec.b(y) * delta + s * dW + 0.5 * s * spec.sigma1(y) * (dW * dW - delta);
}

double nv_step_y(const VolModelSpec& spec, double y, double delta, double dW) {
  if (!spec.flow_v0 || !spec.flow_v) throw ConfigError("Ninomiya-Victoir step needs both flows");
  y = spec.flow_v0(y, 0.5 * delta);
  y = spec.flow_v(y, dW);
  return spec.flow_v0(y, 0.5 * delta);
}

double euler_step_y(const VolModelSpec& spec, double y, double delta, double dW) {
  return y + spec.b(y) * delta + spec.sigma(y) * dW;
}

double next_factor(SchemeKind kind, const VolModelSpec& spec, double y, double delta, const WStep& w) {
  if (spec.ou) return ou_transition(*spec.ou, y, delta, w.ouNoise);
  switch (kind) {
    case SchemeKind::WeakTraj1: return milstein_step_y(spec, y, delta, w.dW);
    case SchemeKind::Weak2: return nv_step_y(spec, y, delta, w.dW);
    case SchemeKind::Euler: return euler_step_y(spec, y, delta, w.dW);
    default: require_ou(spec, kind);
  }
  return y;
}

StepCoef step_coef(SchemeKind kind, const VolModelSpec& spec, Cutoff cutoff, double y, double yn, double delta,
                   const WStep& w) {
  const double rho = spec.rho;
  const double rb = rho_bar(spec);
  StepCoef out;
  switch (kind) {
    case SchemeKind::Euler: {
      const double fy = spec.f(y);
      out.a = (spec.r - 0.5 * fy * fy) * delta + rho * fy * w.dW;
      out.c = rb * fy;
      break;
    }
    case SchemeKind::WeakTraj1:
    case SchemeKind::WeakTraj1_OU_Exact: {
      out.a = rho * (spec.F(yn) - spec.F(y)) + delta * spec.h(y);
      const double rad = spec.psi(y) + spec.sigma(y) * spec.psi1(y) * w.iW / delta;
      out.c = rb * std::sqrt(apply_cutoff(spec, cutoff, rad, y));
      break;
    }
    case SchemeKind::OUImproved: {
      const OUParams& ou = require_ou(spec, kind);
      const double drift = ou.kappa * (ou.theta - y);
      const double half_nu2 = 0.5 * ou.nu * ou.nu;
      const double h1 = spec.h1(y);
      const double p1 = spec.psi1(y);
      out.a = rho * (spec.F(yn) - spec.F(y)) + delta * spec.h(y) + ou.nu * h1 * w.iW +
              (drift * h1 + half_nu2 * spec.h2(y)) * delta * delta / 2.0;
      const double rad =
          spec.psi(y) + ou.nu * p1 * w.iW / delta + (drift * p1 + half_nu2 * spec.psi2(y)) * delta / 2.0;
      out.c = rb * std::sqrt(apply_cutoff(spec, cutoff, rad, y));
      break;
    }
    case SchemeKind::IJK: {
      const double fy = spec.f(y), fn = spec.f(yn);
      out.a = (spec.r - 0.25 * (fn * fn + fy * fy)) * delta + rho * fy * w.dW +
              0.5 * rho * spec.sigma(y) * spec.f1(y) * (w.dW * w.dW - delta);
      out.c = rb * 0.5 * (fn + fy);
      break;
    }
    case SchemeKind::Weak2: {
      out.a = rho * (spec.F(yn) - spec.F(y)) + 0.5 * delta * (spec.h(y) + spec.h(yn));
      out.c = rb * std::sqrt(0.5 * (spec.psi(y) + spec.psi(yn)));
      break;
    }
    case SchemeKind::CMT: throw ConfigError("cmt has no structured step");
  }
  return out;
}

double weaktraj1_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double iW,
                      double dB, Cutoff cutoff) {
  const StepCoef c = step_coef(SchemeKind::WeakTraj1, spec, cutoff, yPrev, yNext, delta, {0.0, iW, 0.0});
  return x + c.a + c.c * dB;
}

double ou_improved_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double iW,
                        double dB) {
  const StepCoef c = step_coef(SchemeKind::OUImproved, spec, Cutoff::Floor, yPrev, yNext, delta, {0.0, iW, 0.0});
  return x + c.a + c.c * dB;
}

double ijk_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double dW,
                double dB) {
  const StepCoef c = step_coef(SchemeKind::IJK, spec, Cutoff::Floor, yPrev, yNext, delta, {dW, 0.0, 0.0});
  return x + c.a + c.c * dB;
}

double euler_x_step(const VolModelSpec& spec, double x, double y, double delta, double dW, double dB) {
  const StepCoef c = step_coef(SchemeKind::Euler, spec, Cutoff::Floor, y, y, delta, {dW, 0.0, 0.0});
  return x + c.a + c.c * dB;
}

std::pair<double, double> euler_step(const VolModelSpec& spec, double x, double y, double delta, const WStep& w,
                                     double dB) {
  return {euler_x_step(spec, x, y, delta, w.dW, dB), next_factor(SchemeKind::Euler, spec, y, delta, w)};
}

std::pair<double, double> cmt_step(const VolModelSpec& spec, double x, double y, double delta, double dW,
                                   double dB) {
  const double fy = spec.f(y);
  if (!(std::abs(fy) >= 1e-12)) throw NumericalError("cmt step: f(y) vanishes");
  const double f1 = spec.f1(y);
  const double s = spec.sigma(y);
  const double s1 = spec.sigma1(y);
  const double rho = spec.rho;
  const double rb = rho_bar(spec);
  const double sf1 = s * f1;
  const double xn = x + (spec.r - 0.5 * fy * fy) * delta + rho * fy * dW + 0.5 * rho * sf1 * dW * dW +
                    rb * sf1 * dW * dB + rb * fy * dB - 0.5 * rho * sf1 * dB * dB;
  const double corr = s * s * f1 / fy;
  const double yn = y + (spec.b(y) + 0.5 * (corr - s * s1)) * delta + s * dW + 0.5 * s * s1 * dW * dW -
                    0.5 * corr * dB * dB;
  return {xn, yn};
}

std::vector<double> factor_nodes(SchemeKind kind, const VolModelSpec& spec, std::span<const WStep> ws,
                                 double delta) {
  std::vector<double> ys(ws.size() + 1);
  ys[0] = spec.y0;
  for (std::size_t k = 0; k < ws.size(); ++k) ys[k + 1] = next_factor(kind, spec, ys[k], delta, ws[k]);
  return ys;
}

void structured_coefs(SchemeKind kind, const VolModelSpec& spec, Cutoff cutoff, std::span<const double> ys,
                      std::span<const WStep> ws, double delta, std::vector<StepCoef>& out) {
  out.resize(ws.size());
  for (std::size_t k = 0; k < ws.size(); ++k) out[k] = step_coef(kind, spec, cutoff, ys[k], ys[k + 1], delta, ws[k]);
}

TerminalLaw terminal_law(std::span<const StepCoef> coefs, double x0, double delta) {
  TerminalLaw law{x0, 0.0};
  for (const auto& c : coefs) {
    law.mu += c.a;
    law.s2 += c.c * c.c * delta;
  }
  return law;
}

Weak2Terminal weak2_terminal(const VolModelSpec& spec, int N, const RngStream& path_rng) {
  if (N < 1) throw ConfigError("N must be at least 1");
  if (!(std::abs(spec.rho) < 1.0)) throw ConfigError("weak2 needs |rho| < 1");
  check_supported(SchemeKind::Weak2, spec);
  PathStreams st = path_streams(path_rng);
  const double delta = spec.T / N;
  const auto ws = draw_w_path(spec.ou, N, delta, st.w);
  const auto ys = factor_nodes(SchemeKind::Weak2, spec, ws, delta);
  double m = 0.0, v = 0.0;
  for (int k = 0; k < N; ++k) {
    m += 0.5 * delta * (spec.h(ys[k]) + spec.h(ys[k + 1]));
    v += 0.5 * delta * (spec.psi(ys[k]) + spec.psi(ys[k + 1]));
  }
  const double G = st.g.gaussian();
  const double yT = ys.back();
  const double xT = spec.log_s0() + spec.rho * (spec.F(yT) - spec.F(spec.y0)) + m +
                    std::sqrt((1.0 - spec.rho * spec.rho) * v) * G;
  return {xT, yT, m, v};
}

GridPath simulate_path(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                       Cutoff cutoff) {
  if (N < 1) throw ConfigError("N must be at least 1");
  check_supported(kind, spec);
  PathStreams st = path_streams(path_rng);
  const double delta = spec.T / N;
  const double sd = std::sqrt(delta);
  const auto ws = draw_w_path(spec.ou, N, delta, st.w);

  GridPath p;
  p.times.resize(N + 1);
  for (int k = 0; k <= N; ++k) p.times[k] = spec.T * k / N;
  p.x.resize(N + 1);
  p.x[0] = spec.log_s0();

  if (kind == SchemeKind::CMT) {
    p.y.resize(N + 1);
    p.y[0] = spec.y0;
    for (int k = 0; k < N; ++k) {
      const double dB = sd * st.b.gaussian();
      std::tie(p.x[k + 1], p.y[k + 1]) = cmt_step(spec, p.x[k], p.y[k], delta, ws[k].dW, dB);
    }
    return p;
  }

  p.y = factor_nodes(kind, spec, ws, delta);
  std::vector<StepCoef> coefs;
  structured_coefs(kind, spec, cutoff, p.y, ws, delta, coefs);
  for (int k = 0; k < N; ++k) p.x[k + 1] = p.x[k] + coefs[k].a + coefs[k].c * sd * st.b.gaussian();

  if (kind == SchemeKind::Weak2) {
    p.m.assign(N + 1, 0.0);
    p.v.assign(N + 1, 0.0);
    for (int k = 0; k < N; ++k) {
      p.m[k + 1] = p.m[k] + 0.5 * delta * (spec.h(p.y[k]) + spec.h(p.y[k + 1]));
      p.v[k + 1] = p.v[k] + 0.5 * delta * (spec.psi(p.y[k]) + spec.psi(p.y[k + 1]));
    }
  }
  return p;
}

double simulate_terminal(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                         Cutoff cutoff) {
  if (kind == SchemeKind::CMT) return simulate_path(kind, spec, N, path_rng, cutoff).x.back();
  if (N < 1) throw ConfigError("N must be at least 1");
  check_supported(kind, spec);
  PathStreams st = path_streams(path_rng);
  const double delta = spec.T / N;
  const auto ws = draw_w_path(spec.ou, N, delta, st.w);
  const auto ys = factor_nodes(kind, spec, ws, delta);
  std::vector<StepCoef> coefs;
  structured_coefs(kind, spec, cutoff, ys, ws, delta, coefs);
  const TerminalLaw law = terminal_law(coefs, spec.log_s0(), delta);
  return law.mu + std::sqrt(law.s2) * st.g.gaussian();
}

}  // namespace svsim
