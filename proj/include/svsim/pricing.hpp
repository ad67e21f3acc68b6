#pragma once

#include <cstddef>

#include "svsim/model.hpp"
#include "svsim/random.hpp"
#include "svsim/schemes.hpp"

namespace svsim {

double normal_cdf(double x);

/// Black-Scholes call with volatility sqrt(totalVar / T).
double bs_call(double s, double totalVar, double r, double T, double K);

/// e^{-rT} E[(e^X - K)^+] for X ~ N(mu, s2).
double conditional_call(const TerminalLaw& law, double r, double T, double K);

double call_payoff(double xT, double K, double r, double T);
double lookback_payoff(double minimum, double sT, double r, double T);

struct PriceEstimate {
  double mean = 0.0;
  double stdErr = 0.0;
  double halfwidth95 = 0.0;
  std::size_t nSamples = 0;
};

/// Average of the conditional Black-Scholes price over nPaths factor paths.
/// Path i uses root.child(i). Throws ConfigError if |rho| = 1 or kind is CMT.
PriceEstimate romano_touzi_call(const VolModelSpec& spec, SchemeKind kind, int N, double K, std::size_t nPaths,
                                const RngStream& root, Cutoff cutoff = Cutoff::Floor);

/// Plain Monte Carlo of the discounted call payoff on the terminal value.
PriceEstimate plain_call(const VolModelSpec& spec, SchemeKind kind, int N, double K, std::size_t nPaths,
                         const RngStream& root, Cutoff cutoff = Cutoff::Floor);

PriceEstimate lookback_price(const VolModelSpec& spec, SchemeKind kind, int N, std::size_t nPaths,
                             const RngStream& root, Cutoff cutoff = Cutoff::Floor);

}  // namespace svsim
