#include "svsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "svsim/errors.hpp"
#include "svsim/primitive.hpp"

namespace svsim {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

std::string at(double y) {
  std::ostringstream os;
  os << " at y=" << y;
  return os.str();
}

}  // namespace

void OUParams::validate() const {
  require_finite(kappa, "kappa");
  require_finite(theta, "theta");
  require_finite(nu, "nu");
  require_finite(y0, "y0");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
}

void ScottParams::validate() const {
  for (auto [v, name] : {std::pair{sigma0, "sigma0"}, {kappa, "kappa"}, {theta, "theta"}, {nu, "nu"},
                         {rho, "rho"}, {r, "r"}, {s0, "s0"}, {y0, "y0"}, {T, "T"}}) {
    require_finite(v, name);
  }
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(s0 > 0.0)) throw ConfigError("s0 must be positive");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (rho < -1.0 || rho > 1.0) throw ConfigError("rho must lie in [-1, 1]");
}

double derive_h(const VolModelSpec& s, double y) {
  const double fy = s.f(y);
  const double sy = s.sigma(y);
  return s.r - 0.5 * fy * fy - s.rho * (s.b(y) * fy / sy + 0.5 * (sy * s.f1(y) - fy * s.sigma1(y)));
}

VolModelSpec complete_spec(VolModelSpec s) {
  if (!s.f || !s.f1 || !s.b || !s.sigma || !s.sigma1) {
    throw ConfigError("model spec needs f, f', b, sigma and sigma'");
  }
  if (!(s.s0 > 0.0)) throw ConfigError("s0 must be positive");
  if (!(s.T > 0.0)) throw ConfigError("T must be positive");

  if (!s.psi) {
    s.psi = [f = s.f](double y) {
      const double v = f(y);
      return v * v;
    };
  }
  if (!s.psi1) s.psi1 = [f = s.f, f1 = s.f1](double y) { return 2.0 * f(y) * f1(y); };
  if (!s.psi2 && s.f2) {
    s.psi2 = [f = s.f, f1 = s.f1, f2 = s.f2](double y) {
      const double d = f1(y);
      return 2.0 * (d * d + f(y) * f2(y));
    };
  }
  if (!s.h) {
    auto base = std::make_shared<const VolModelSpec>(s);
    s.h = [base](double y) { return derive_h(*base, y); };
  }
  if (!s.F) {
    auto table = std::make_shared<PrimitiveTable>(
        [f = s.f, sigma = s.sigma](double z) { return f(z) / sigma(z); });
    s.F = [table](double y) { return (*table)(y); };
  }
  if (!s.psi_hat) {
    if (std::isfinite(s.psi_upper)) {
      s.psi_hat = [c = s.psi_upper](double) { return c; };
    } else {
      s.psi_hat = [psi = s.psi](double y) { return 1.5 * psi(y); };
    }
  }
  if (s.ou) s.ou->validate();
  return s;
}

VolModelSpec scott_model(const ScottParams& p) {
  p.validate();
  const double s0 = p.sigma0, kappa = p.kappa, theta = p.theta, nu = p.nu, rho = p.rho, r = p.r;

  VolModelSpec s;
  s.r = r;
  s.s0 = p.s0;
  s.y0 = p.y0;
  s.T = p.T;
  s.rho = rho;

  s.f = [s0](double y) { return s0 * std::exp(y); };
  s.f1 = s.f;
  s.f2 = s.f;
  s.b = [kappa, theta](double y) { return kappa * (theta - y); };
  s.b1 = [kappa](double) { return -kappa; };
  s.sigma = [nu](double) { return nu; };
  s.sigma1 = [](double) { return 0.0; };
  s.sigma2 = [](double) { return 0.0; };

  s.F = [s0, nu](double y) { return s0 * std::expm1(y) / nu; };
  s.psi = [s0](double y) { return s0 * s0 * std::exp(2.0 * y); };
  s.psi1 = [s0](double y) { return 2.0 * s0 * s0 * std::exp(2.0 * y); };
  s.psi2 = [s0](double y) { return 4.0 * s0 * s0 * std::exp(2.0 * y); };

  // h(y) = r - psi/2 - rho f (kappa (theta - y) / nu + nu / 2)
  s.h = [=](double y) {
    const double e = std::exp(y);
    return r - 0.5 * s0 * s0 * e * e - rho * s0 * e * (kappa * (theta - y) / nu + 0.5 * nu);
  };
  s.h1 = [=](double y) {
    const double e = std::exp(y);
    return -s0 * s0 * e * e - rho * s0 * e * (kappa * (theta - y) / nu + 0.5 * nu - kappa / nu);
  };
  s.h2 = [=](double y) {
    const double e = std::exp(y);
    return -2.0 * s0 * s0 * e * e -
           rho * s0 * e * (kappa * (theta - y) / nu + 0.5 * nu - 2.0 * kappa / nu);
  };

  s.psi_lower = 0.0;
  s.psi_upper = std::numeric_limits<double>::infinity();
  s.ou = OUParams{kappa, theta, nu, p.y0};

  s.flow_v0 = [kappa, theta](double x, double t) { return theta + (x - theta) * std::exp(-kappa * t); };
  s.flow_v = [nu](double x, double t) { return x + nu * t; };

  return complete_spec(std::move(s));
}

VolModelSpec constant_vol_model(double vol, const OUParams& ou, double r, double s0, double T,
                                double rho) {
  ou.validate();
  if (!(vol > 0.0)) throw ConfigError("vol must be positive");
  const double kappa = ou.kappa, theta = ou.theta, nu = ou.nu;

  VolModelSpec s;
  s.r = r;
  s.s0 = s0;
  s.y0 = ou.y0;
  s.T = T;
  s.rho = rho;
  s.f = [vol](double) { return vol; };
  s.f1 = [](double) { return 0.0; };
  s.f2 = [](double) { return 0.0; };
  s.b = [kappa, theta](double y) { return kappa * (theta - y); };
  s.b1 = [kappa](double) { return -kappa; };
  s.sigma = [nu](double) { return nu; };
  s.sigma1 = [](double) { return 0.0; };
  s.sigma2 = [](double) { return 0.0; };
  s.F = [vol, nu](double y) { return vol * y / nu; };
  s.h1 = [=](double) { return rho * kappa * vol / nu; };
  s.h2 = [](double) { return 0.0; };
  s.psi_lower = vol * vol;
  s.psi_upper = vol * vol;
  s.ou = ou;
  s.flow_v0 = [kappa, theta](double x, double t) { return theta + (x - theta) * std::exp(-kappa * t); };
  s.flow_v = [nu](double x, double t) { return x + nu * t; };
  return complete_spec(std::move(s));
}

FlowFn flow_from_primitive(ScalarFn zeta, ScalarFn zeta_inv) {
  return [zeta = std::move(zeta), zeta_inv = std::move(zeta_inv)](double x, double t) {
    return zeta_inv(t + zeta(x));
  };
}

ValidationReport validate_spec(const VolModelSpec& s, std::span<const double> probes) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };

  if (probes.empty()) {
    fail("empty probe set");
    return report;
  }
  if (!(s.rho >= -1.0 && s.rho <= 1.0)) fail("rho out of range");
  if (!s.f || !s.f1 || !s.b || !s.sigma || !s.sigma1 || !s.F || !s.h || !s.psi || !s.psi_hat) {
    fail("spec incomplete");
    return report;
  }

  constexpr double eps = 1e-5;
  double min_psi = std::numeric_limits<double>::infinity();
  for (double y : probes) {
    const double sy = s.sigma(y);
    if (!(sy > 0.0)) {
      fail("sigma nonpositive" + at(y));
      continue;
    }
    const double ratio = s.f(y) / sy;
    const double dF = (s.F(y + eps) - s.F(y - eps)) / (2.0 * eps);
    if (!(std::abs(dF - ratio) <= 1e-5 * (1.0 + std::abs(ratio)))) fail("F inconsistent" + at(y));
    if (std::abs(s.F(0.0)) > 1e-12) fail("F not anchored at 0");

    const double h_ref = derive_h(s, y);
    if (!(std::abs(s.h(y) - h_ref) <= 1e-10 * (1.0 + std::abs(h_ref)))) fail("h inconsistent" + at(y));

    const double fy = s.f(y);
    const double psi = s.psi(y);
    if (!(std::abs(psi - fy * fy) <= 1e-12 * (1.0 + psi))) fail("psi inconsistent" + at(y));
    if (s.psi_hat(y) < psi * (1.0 - 1e-14)) fail("psi_hat below psi" + at(y));
    min_psi = std::min(min_psi, psi);
  }
  if (s.psi_lower < 0.0) fail("psi_lower negative");
  if (s.psi_lower > min_psi * (1.0 + 1e-14)) fail("psi_lower above psi");
  return report;
}

ScottParams scott_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ScottParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") {
      if (!value.is_string() || value.get<std::string>() != "scott") {
        throw ConfigError("unsupported model (only \"scott\" is available)");
      }
      continue;
    }
    double* slot = nullptr;
    if (key == "sigma0") slot = &p.sigma0;
    else if (key == "kappa") slot = &p.kappa;
    else if (key == "theta") slot = &p.theta;
    else if (key == "nu") slot = &p.nu;
    else if (key == "rho") slot = &p.rho;
    else if (key == "r") slot = &p.r;
    else if (key == "s0") slot = &p.s0;
    else if (key == "y0") slot = &p.y0;
    else if (key == "T") slot = &p.T;
    else throw ConfigError("unknown config key: " + key);
    if (!value.is_number()) throw ConfigError("config key " + key + " must be a number");
    *slot = value.get<double>();
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const ScottParams& p) {
  return {{"model", "scott"}, {"sigma0", p.sigma0}, {"kappa", p.kappa}, {"theta", p.theta},
          {"nu", p.nu},       {"rho", p.rho},       {"r", p.r},         {"s0", p.s0},
          {"y0", p.y0},       {"T", p.T}};
}

}  // namespace svsim
