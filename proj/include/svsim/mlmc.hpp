#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "svsim/coupling.hpp"
#include "svsim/model.hpp"
#include "svsim/random.hpp"
#include "svsim/schemes.hpp"
#include "svsim/stats.hpp"

namespace svsim {

/// Level l >= 1 returns the coupled (fine at L0 2^l steps, coarse at half of
/// that) sample; level 0 returns the plain payoff at L0 steps in fine, with
/// coarse = 0. rng is a fresh stream owned by this one sample.
using LevelSampler = std::function<LevelSample(int level, const RngStream& rng)>;

struct MlmcConfig {
  double epsilon = 0.01;
  int L0 = 2;
  int maxLevel = 12;
  std::size_t initialSamplesPerLevel = 10000;
  // Levels 0..startLevel are sampled before the first bias test.
  int startLevel = 2;

  void validate() const;
};

struct LevelStats {
  int level = 0;
  RunningStats stats;
  double costPerSample = 0.0;  // fine-grid steps

  std::size_t nSamples() const { return stats.count(); }
  double mean() const { return stats.mean(); }
  double variance() const { return stats.variance(); }
  double sumDiff() const { return stats.sum(); }
  double sumDiffSq() const { return stats.sum_sq(); }
};

struct MlmcResult {
  double estimate = 0.0;
  std::vector<LevelStats> levels;
  double totalCost = 0.0;
  double achievedBiasBound = 0.0;
  double alpha = 0.0;
  double estimatorVariance = 0.0;
};

double level_cost(int level, int L0);

/// Giles' adaptive algorithm with refinement factor 2. Sample i of level l
/// uses root.child(l).child(i). Throws BudgetExceeded past maxLevel.
MlmcResult mlmc_estimate(const LevelSampler& sampler, const MlmcConfig& config, const RngStream& root);

struct ProbeRow {
  int level = 0;
  double mean = 0.0;
  double meanStderr = 0.0;
  double variance = 0.0;
  double cost = 0.0;
};

/// Fixed-size sampling of levels 0..maxLevel.
std::vector<ProbeRow> level_variance_probe(const LevelSampler& sampler, int maxLevel, std::size_t nProbe, int L0,
                                           const RngStream& root);

/// Conditional (Black-Scholes given W) call with the terminal coupling.
LevelSampler call_level_sampler(const VolModelSpec& spec, SchemeKind kind, double K, int L0,
                                Cutoff cutoff = Cutoff::Floor, bool conditional = true);

LevelSampler lookback_level_sampler(const VolModelSpec& spec, SchemeKind kind, int L0, LookbackCoupling mode,
                                    Cutoff cutoff = Cutoff::Floor);

}  // namespace svsim
