#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "svsim/mlmc.hpp"
#include "svsim/pricing.hpp"
#include "svsim/model.hpp"
#include "svsim/schemes.hpp"
#include "svsim/stats.hpp"

namespace svsim {

inline constexpr double kReferenceCallPrice = 12.82603;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row);
  void append(const CsvTable& other);
  void write(std::ostream& os) const;

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double v);

// experiment, scheme, N, metric, value, stderr
CsvTable measurement_table();

struct ExperimentConfig {
  VolModelSpec spec;
  std::vector<SchemeKind> schemes;
  std::vector<int> ladder{2, 4, 8, 16, 32, 64, 128, 256};
  std::size_t paths = 10000;
  std::uint64_t seed = 20100101;
  Cutoff cutoff = Cutoff::Floor;

  // Throws ConfigError unless the ladder is strictly increasing powers of two.
  void validate() const;
};

enum class ConvMetric { Strong, Traj, Terminal };
std::string to_string(ConvMetric m);

struct ConvergenceSeries {
  SchemeKind scheme{};
  bool available = true;  // false for CMT under the trajectorial coupling
  std::vector<int> N;
  std::vector<MeanCI> logVals, assetVals;
  RegressionResult logSlope, assetSlope;
};

struct ConvergenceStudy {
  std::vector<ConvergenceSeries> strong, traj, terminal;
  const std::vector<ConvergenceSeries>& get(ConvMetric m) const;
};

/// All three coupled-difference studies from one set of draws. Path i at
/// ladder value N uses RngStream(seed).child(N).child(i) for every scheme.
ConvergenceStudy convergence_study(const ExperimentConfig& cfg);
CsvTable convergence_table(const ConvergenceStudy& study, ConvMetric m);

CsvTable run_strong_conv(const ExperimentConfig& cfg);
CsvTable run_traj_conv(const ExperimentConfig& cfg);
CsvTable run_terminal_conv(const ExperimentConfig& cfg);

struct WeakErrorSeries {
  SchemeKind scheme{};
  std::vector<int> N;
  std::vector<PriceEstimate> prices;
  std::vector<MeanCI> coupledDiff;  // E[P_N - P_2N]
  RegressionResult slope;           // of |E[P_N - P_2N]| against N
};

/// Prices (conditional estimator, plain for CMT) and coupled differences.
/// Weak2 on an OU factor uses the antithetic fine path for the differences.
WeakErrorSeries weak_error_series(const ExperimentConfig& cfg, SchemeKind kind, double K);
CsvTable run_weak_call(const ExperimentConfig& cfg, double K, double reference = kReferenceCallPrice);

enum class Payoff { Call, Lookback };
Payoff parse_payoff(const std::string& s);
std::string to_string(Payoff p);

LevelSampler make_level_sampler(const ExperimentConfig& cfg, SchemeKind kind, Payoff payoff, double K, int L0);

struct MlmcCostPoint {
  double epsilon = 0.0;
  MlmcResult result;
  double seconds = 0.0;
};
std::vector<MlmcCostPoint> mlmc_cost_series(const ExperimentConfig& cfg, SchemeKind kind, Payoff payoff,
                                            const std::vector<double>& epsilons, const MlmcConfig& base, double K);

CsvTable run_mlmc_cost(const ExperimentConfig& cfg, Payoff payoff, const std::vector<double>& epsilons,
                       const MlmcConfig& base, double K, std::optional<double> reference);

// level, N_l, mean, variance, cost
CsvTable mlmc_table(const MlmcResult& r);

}  // namespace svsim
