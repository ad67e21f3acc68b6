#pragma once

#include <vector>

#include "svsim/model.hpp"
#include "svsim/random.hpp"
#include "svsim/schemes.hpp"

namespace svsim {

// How the coarse level's B increments are built from the fine ones.
enum class BCoupling {
  Sum,       // plain Brownian sum: same driving B at both levels
  Weighted,  // law-preserving weighted combination of the fine increments
};

/// Coarse increment sqrt(2) (v1 dB1 + v2 dB2) / sqrt(v1^2 + v2^2). Falls back
/// to dB1 + dB2 when both weights vanish.
double weighted_db(double v1, double v2, double dB1, double dB2);

/// Increment over the first half of a coarse step that stays maximally
/// correlated with dB1 while leaving weighted_db(...) minus it independent.
double weighted_half_db(double v1, double v2, double dB1, double dB2);

struct CoupledPaths {
  GridPath fine;    // 2N steps
  GridPath coarse;  // N steps
  std::vector<WStep> fineW;
  std::vector<double> fineDB;
  std::vector<double> coarseDB;
};

/// Fine path at step T/2N and the coarse path at T/N driven by the same W and
/// by coarse B increments combined from the fine ones. N is the coarse count.
CoupledPaths coupled_traj_paths(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                Cutoff cutoff = Cutoff::Floor, BCoupling mode = BCoupling::Weighted);

struct TerminalPair {
  double fine = 0.0;
  double coarse = 0.0;
  TerminalLaw lawFine;
  TerminalLaw lawCoarse;
};

/// Both levels written straight at T with one shared normal. CMT has no
/// such form: both levels are stepped with summed increments.
TerminalPair coupled_terminal(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                              Cutoff cutoff = Cutoff::Floor);

/// Squared coupled differences of one sample. traj is NaN for CMT.
struct ConvergenceSample {
  double strongLog = 0.0, strongAsset = 0.0;
  double trajLog = 0.0, trajAsset = 0.0;
  double termLog = 0.0, termAsset = 0.0;
};
ConvergenceSample convergence_sample(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                     Cutoff cutoff = Cutoff::Floor);

/// Minimum of a drifted Brownian bridge from left to right whose variance over
/// the interval is left^2 vol2 delta, sampled with one uniform.
double bridge_min(double left, double right, double vol2, double delta, double u);

struct LevelSample {
  double fine = 0.0;
  double coarse = 0.0;
  double diff = 0.0;
};

enum class LookbackCoupling {
  Weighted,     // weighted coarse increments, law-preserving midpoint
  BrownianSum,  // coarse dB = sum of the fine ones, midpoint uses dB1
};
LookbackCoupling default_lookback_coupling(SchemeKind kind);

/// Discounted S_T - min S payoff at N steps with bridge minima per step.
double lookback_single(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                       Cutoff cutoff = Cutoff::Floor);

/// Fine (2N steps) and coarse (N steps) discounted lookback payoffs.
LevelSample coupled_lookback_levels(SchemeKind kind, const VolModelSpec& spec, int N, const RngStream& path_rng,
                                    LookbackCoupling mode, Cutoff cutoff = Cutoff::Floor);

/// Discounted call payoffs at 2N and N steps with the terminal coupling.
/// conditional=true replaces each payoff by its Black-Scholes conditional
/// expectation given W (not available for CMT).
LevelSample coupled_call_levels(SchemeKind kind, const VolModelSpec& spec, int N, double K,
                                const RngStream& path_rng, bool conditional, Cutoff cutoff = Cutoff::Floor);

/// Weak2 on an OU factor only: the fine price is averaged with its
/// antithetic twin, whose odd nodes are reflected about the OU bridge mean
/// given the neighbouring even nodes. Same mean as coupled_call_levels, much
/// smaller variance. fine holds the averaged price.
LevelSample antithetic_weak2_call_levels(const VolModelSpec& spec, int N, double K, const RngStream& path_rng);

}  // namespace svsim
