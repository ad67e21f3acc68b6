#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace svsim {

using ScalarFn = std::function<double(double)>;
// Flow of a one-dimensional autonomous ODE: flow(x, t) solves eta' = V(eta),
// eta(0) = x, evaluated at time t (t may be negative).
using FlowFn = std::function<double(double, double)>;

/// Ornstein-Uhlenbeck factor dY = kappa (theta - Y) dt + nu dW.
struct OUParams {
  double kappa = 1.0;
  double theta = 0.0;
  double nu = 1.0;
  double y0 = 0.0;

  /// Throws ConfigError unless kappa > 0 and nu > 0.
  void validate() const;
};

/// Scott model: f(y) = sigma0 e^y driven by an OU factor.
struct ScottParams {
  double sigma0 = 0.25;
  double kappa = 1.0;
  double theta = 0.0;
  double nu = 7.0 * std::sqrt(2.0) / 20.0;
  double rho = -0.2;
  double r = 0.05;
  double s0 = 100.0;
  double y0 = 0.0;
  double T = 1.0;

  void validate() const;
};

/// Stochastic volatility model in transformed form
///
///   dX = rho dF(Y) + h(Y) dt + sqrt(1 - rho^2) f(Y) dB,   X = log S
///   dY = b(Y) dt + sigma(Y) dW
///
/// with F a primitive of f / sigma anchored at F(0) = 0 and psi = f^2.
/// Derivatives are supplied analytically by whoever builds the spec;
/// complete_spec() fills the functions that can be derived from the others.
/// Instances are immutable once built and safe to share between threads.
struct VolModelSpec {
  double r = 0.0;
  double s0 = 1.0;
  double y0 = 0.0;
  double T = 1.0;
  double rho = 0.0;

  ScalarFn f, f1, f2;
  ScalarFn b, b1;
  ScalarFn sigma, sigma1, sigma2;

  ScalarFn F;
  ScalarFn h, h1, h2;  // h1, h2 optional: only the OU_Improved scheme needs them
  ScalarFn psi, psi1, psi2;

  double psi_lower = 0.0;
  double psi_upper = std::numeric_limits<double>::infinity();
  ScalarFn psi_hat;

  // Present when Y is an OU process; enables exact factor simulation.
  std::optional<OUParams> ou;

  // Closed-form flows of V0 = b - sigma sigma'/2 and V = sigma for the
  // Ninomiya-Victoir step. Optional unless a generic spec runs Weak_2.
  FlowFn flow_v0;
  FlowFn flow_v;

  double log_s0() const { return std::log(s0); }
  bool ou_backed() const { return ou.has_value(); }
};

/// h(y) = r - f^2/2 - rho (b f / sigma + (sigma f' - f sigma') / 2), from the
/// spec's coefficient functions (not from spec.h).
double derive_h(const VolModelSpec& spec, double y);

/// Fills every empty derived member: psi, psi1, psi2 from f; h from
/// derive_h; F by adaptive quadrature of f / sigma; psi_hat from psi_upper.
/// Throws ConfigError when a required coefficient is missing.
VolModelSpec complete_spec(VolModelSpec spec);

VolModelSpec scott_model(const ScottParams& params);

/// Constant volatility f = vol with an OU factor that no longer feeds the
/// asset. Used for Black-Scholes reduction checks.
VolModelSpec constant_vol_model(double vol, const OUParams& ou, double r, double s0, double T,
                                double rho);

/// Builds the flow eta(t) = zeta^{-1}(t + zeta(x)) from a primitive zeta of
/// 1 / V and its inverse.
FlowFn flow_from_primitive(ScalarFn zeta, ScalarFn zeta_inv);

struct ValidationReport {
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

/// Pointwise consistency checks at the probe points. Never throws for a
/// failed check; failures are listed in the report.
ValidationReport validate_spec(const VolModelSpec& spec, std::span<const double> probes);

/// Parses {model:"scott", sigma0, kappa, theta, nu, rho, r, s0, y0, T}.
/// Missing keys keep the defaults of ScottParams; unknown keys are rejected.
ScottParams scott_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScottParams& p);

}  // namespace svsim
