// svsim: experiment driver. Writes CSV to --out (stdout by default).
// Exit codes: 0 ok, 2 configuration error, 3 numerical guard tripped.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "svsim/coupling.hpp"
#include "svsim/errors.hpp"
#include "svsim/experiments.hpp"
#include "svsim/mlmc.hpp"
#include "svsim/pricing.hpp"

using namespace svsim;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 20100101;
  std::size_t paths = 10000;
  std::string out;
  std::vector<std::string> schemes;
  std::vector<int> steps;
  std::string cutoff = "floor";
  std::string payoff = "call";
  double strike = 100.0;
  std::vector<double> epsilon{0.01};
  int maxLevel = 12;
  std::size_t probeSamples = 10000;
  int l0 = 2;
  std::optional<double> reference;
};

ScottParams load_params(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return scott_params_from_json(j);
}

ExperimentConfig make_config(const Options& o, std::vector<std::string> defaultSchemes, std::vector<int> defaultSteps) {
  ExperimentConfig cfg;
  cfg.spec = scott_model(load_params(o.config));
  for (const auto& s : o.schemes.empty() ? defaultSchemes : o.schemes) cfg.schemes.push_back(parse_scheme(s));
  cfg.ladder = o.steps.empty() ? defaultSteps : o.steps;
  cfg.paths = o.paths;
  cfg.seed = o.seed;
  cfg.cutoff = parse_cutoff(o.cutoff);
  return cfg;
}

void emit(const CsvTable& t, const std::string& out) {
  if (out.empty()) {
    t.write(std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write " + out);
  t.write(f);
}

const std::vector<std::string> kAllSchemes{"weaktraj1", "weak2", "ou-improved", "ijk", "cmt", "euler"};
const std::vector<int> kLadder{2, 4, 8, 16, 32, 64, 128, 256};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretization schemes and multilevel Monte Carlo for stochastic volatility models"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "model JSON {model:\"scott\", sigma0, kappa, theta, nu, rho, r, s0, y0, T}");
  app.add_option("--seed", o.seed, "root seed");
  app.add_option("--paths", o.paths, "Monte Carlo paths per cell");
  app.add_option("--out", o.out, "CSV output path");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scheme", o.schemes, "euler, weaktraj1, weaktraj1-ou, ou-improved, weak2, ijk, cmt")->delimiter(',');
    sub->add_option("--steps", o.steps, "time-step counts (powers of two)")->delimiter(',');
    sub->add_option("--cutoff", o.cutoff, "floor or band")->check(CLI::IsMember({"floor", "band"}));
  };

  auto* strong = app.add_subcommand("strong-conv", "E[max |X^N - X^2N|^2] with the same driving B");
  auto* traj = app.add_subcommand("traj-conv", "same with the weighted B coupling");
  auto* term = app.add_subcommand("terminal-conv", "E[|X^N_T - X^2N_T|^2] with one shared normal");
  auto* weak = app.add_subcommand("weak-call", "call prices and weak error");
  auto* mlmc = app.add_subcommand("mlmc", "multilevel Monte Carlo");
  auto* price = app.add_subcommand("price", "single-level price");
  for (auto* s : {strong, traj, term, weak, mlmc, price}) add_common(s);
  for (auto* s : {weak, mlmc, price}) s->add_option("--strike", o.strike, "call strike");
  for (auto* s : {mlmc, price}) {
    s->add_option("--payoff", o.payoff, "call or lookback")->check(CLI::IsMember({"call", "lookback"}));
  }
  mlmc->add_option("--epsilon", o.epsilon, "target RMSE (several values give a cost table)")->delimiter(',');
  mlmc->add_option("--max-level", o.maxLevel, "highest level before giving up");
  mlmc->add_option("--probe-samples", o.probeSamples, "initial samples per level");
  mlmc->add_option("--l0", o.l0, "steps on level 0");
  mlmc->add_option("--reference", o.reference, "reference price for the error column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (strong->parsed() || traj->parsed() || term->parsed()) {
      const ExperimentConfig cfg = make_config(o, kAllSchemes, kLadder);
      const ConvMetric m = strong->parsed() ? ConvMetric::Strong : traj->parsed() ? ConvMetric::Traj : ConvMetric::Terminal;
      emit(convergence_table(convergence_study(cfg), m), o.out);
    } else if (weak->parsed()) {
      const ExperimentConfig cfg = make_config(o, kAllSchemes, {2, 4, 8, 16, 32, 64});
      emit(run_weak_call(cfg, o.strike), o.out);
    } else if (mlmc->parsed()) {
      const ExperimentConfig cfg = make_config(o, {"weaktraj1"}, kLadder);
      MlmcConfig mc;
      mc.L0 = o.l0;
      mc.maxLevel = o.maxLevel;
      mc.initialSamplesPerLevel = o.probeSamples;
      const Payoff payoff = parse_payoff(o.payoff);
      std::optional<double> ref = o.reference;
      if (!ref && payoff == Payoff::Call && o.config.empty() && o.strike == 100.0) ref = kReferenceCallPrice;
      if (o.epsilon.size() == 1 && cfg.schemes.size() == 1) {
        mc.epsilon = o.epsilon[0];
        const MlmcResult r = mlmc_estimate(make_level_sampler(cfg, cfg.schemes[0], payoff, o.strike, mc.L0), mc,
                                           RngStream(cfg.seed));
        emit(mlmc_table(r), o.out);
        std::fprintf(stderr, "estimate %.6f  stderr %.6f  total cost %.0f  levels %zu\n", r.estimate,
                     std::sqrt(r.estimatorVariance), r.totalCost, r.levels.size());
      } else {
        emit(run_mlmc_cost(cfg, payoff, o.epsilon, mc, o.strike, ref), o.out);
      }
    } else if (price->parsed()) {
      const ExperimentConfig cfg = make_config(o, {"weak2"}, {8, 16});
      const Payoff payoff = parse_payoff(o.payoff);
      CsvTable t = measurement_table();
      const RngStream root(cfg.seed);
      for (SchemeKind k : cfg.schemes) {
        for (int N : cfg.ladder) {
          PriceEstimate p;
          std::string method;
          if (payoff == Payoff::Lookback) {
            p = lookback_price(cfg.spec, k, N, cfg.paths, root, cfg.cutoff);
            method = "lookback";
          } else if (k == SchemeKind::CMT) {
            p = plain_call(cfg.spec, k, N, o.strike, cfg.paths, root, cfg.cutoff);
            method = "call_plain";
          } else {
            p = romano_touzi_call(cfg.spec, k, N, o.strike, cfg.paths, root, cfg.cutoff);
            method = "call_conditional";
          }
          t.add({"price", to_string(k), std::to_string(N), method, fmt(p.mean), fmt(p.stdErr)});
        }
      }
      emit(t, o.out);
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }
  return 0;
}
