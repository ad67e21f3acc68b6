#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svsim/model.hpp"
#include "svsim/random.hpp"

namespace svsim {

enum class SchemeKind { Euler, WeakTraj1, WeakTraj1_OU_Exact, OUImproved, Weak2, IJK, CMT };

// CLI names: euler, weaktraj1, weaktraj1-ou, ou-improved, weak2, ijk, cmt
SchemeKind parse_scheme(std::string_view name);
std::string to_string(SchemeKind kind);

// Floor clips below at psi_lower; Band also clips above at psi_hat.
enum class Cutoff { Floor, Band };
Cutoff parse_cutoff(std::string_view name);
std::string to_string(Cutoff c);

bool requires_ou(SchemeKind kind);
// Every kind but CMT moves x by a_k + c_k dB_k with (a_k, c_k) functions of W only.
bool is_structured(SchemeKind kind);
// Throws ConfigError if the kind cannot run on this spec.
void check_supported(SchemeKind kind, const VolModelSpec& spec);

struct GridPath {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> m;  // running trapezoid of h (Weak2 only)
  std::vector<double> v;  // running trapezoid of f^2 (Weak2 only)
};

// Factor updates.
double milstein_step_y(const VolModelSpec& spec, double y, double delta, double dW);
double nv_step_y(const VolModelSpec& spec, double y, double delta, double dW);
double euler_step_y(const VolModelSpec& spec, double y, double delta, double dW);
// Y update used by a structured kind: exact OU when available, otherwise
// Milstein (WeakTraj1), Ninomiya-Victoir (Weak2) or Euler.
double next_factor(SchemeKind kind, const VolModelSpec& spec, double y, double delta, const WStep& w);

struct StepCoef {
  double a = 0.0;  // everything but the dB term
  double c = 0.0;  // multiplier of dB
};

// Throws NumericalError if a cutoff radicand falls below max(psi_lower, 0).
StepCoef step_coef(SchemeKind kind, const VolModelSpec& spec, Cutoff cutoff, double yPrev, double yNext,
                   double delta, const WStep& w);

double weaktraj1_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double iW,
                      double dB, Cutoff cutoff = Cutoff::Floor);
double ou_improved_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double iW,
                        double dB);
double ijk_step(const VolModelSpec& spec, double x, double yPrev, double yNext, double delta, double dW,
                double dB);
double euler_x_step(const VolModelSpec& spec, double x, double y, double delta, double dW, double dB);
std::pair<double, double> euler_step(const VolModelSpec& spec, double x, double y, double delta, const WStep& w,
                                     double dB);
// Throws NumericalError if |f(y)| < 1e-12.
std::pair<double, double> cmt_step(const VolModelSpec& spec, double x, double y, double delta, double dW,
                                   double dB);

std::vector<double> factor_nodes(SchemeKind kind, const VolModelSpec& spec, std::span<const WStep> ws,
                                 double delta);
void structured_coefs(SchemeKind kind, const VolModelSpec& spec, Cutoff cutoff, std::span<const double> ys,
                      std::span<const WStep> ws, double delta, std::vector<StepCoef>& out);

/// Conditional law of the terminal log-asset given W: N(mu, s2).
struct TerminalLaw {
  double mu = 0.0;
  double s2 = 0.0;
};
TerminalLaw terminal_law(std::span<const StepCoef> coefs, double x0, double delta);

struct Weak2Terminal {
  double xT, yT, mBar, vBar;
};
// Draws W from the path's w stream and G from its g stream.
Weak2Terminal weak2_terminal(const VolModelSpec& spec, int N, const RngStream& path_rng);

// Full path on the uniform grid. Draws come from path_streams(path_rng).
GridPath simulate_path(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                       Cutoff cutoff = Cutoff::Floor);

// Terminal log-asset written straight at T with the path's g-stream normal.
double simulate_terminal(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                         Cutoff cutoff = Cutoff::Floor);

}  // namespace svsim
