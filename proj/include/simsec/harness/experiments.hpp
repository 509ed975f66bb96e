#pragma once

// Baseline strategies, PPO-BOP runs, parameter sweeps and ablations. Every
// method is evaluated on the environment seeded with evaluation_seed(seed),
// so all methods under one seed face the same user trajectories and fading.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simsec/harness/config.hpp"
#include "simsec/harness/metric_table.hpp"

namespace simsec::harness {

enum class Method { kPpoBop, kStrategy1, kStrategy2, kStrategy3, kRandomSearch };

// Accepts ppo-bop, strategy1..3 (or 1..3) and random-search.
Method parse_method(const std::string& name);
std::string method_name(Method m);

// Strategy 1: direct single-antenna receiver, P_max. Strategy 2: phases pi,
// P_max / 2. Strategy 3: phases pi, P_max. Throws on any other id.
EnvConfig strategy_env(int strategy, const ExperimentConfig& config);
Eigen::VectorXd strategy_action(int strategy, const ExperimentConfig& config);
ppo::EvaluationResult evaluate_strategy(int strategy, const ExperimentConfig& config, int episodes,
                                        std::uint64_t seed);
MetricRow strategy_eval(int strategy, const ExperimentConfig& config, int episodes, std::uint64_t seed);

// Action vector reproducing a given phase configuration at power fraction `power`.
Eigen::VectorXd encode_action(const PhaseConfig& phases, int users, double power);

struct SearchResult {
  PhaseConfig phases;
  ppo::EvaluationResult evaluation;
};

// Per-slot random phase search at P_max on outdated CSI: each slot the
// incumbent and `search_candidates - 1` uniform configurations are scored on
// the previous slot's channels and the best is applied. The incumbent starts
// at all-pi every episode.
SearchResult random_search(const ExperimentConfig& config, int episodes, std::uint64_t seed);

struct RunOptions {
  std::string log_dir;         // JSON-lines training logs, empty to disable
  std::string checkpoint_dir;  // PPO-BOP checkpoints, empty to disable
};

// Runs `method` once per seed and aggregates the evaluation episodes. For
// PPO-BOP, `episodes` are training episodes (config.trainer.episodes when
// absent); otherwise evaluation episodes (config.evaluation.episodes).
MetricRow run_method(Method method, const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                     const std::string& run_id, const RunOptions& options = {});

// Axis names: pmax (dBm), kappa, M, N, lr, b, l.
void apply_axis(ExperimentConfig& config, const std::string& axis, double value);
MetricTable run_sweep(const std::string& axis, const std::vector<double>& values,
                      const ExperimentConfig& config, Method method,
                      const std::vector<std::uint64_t>& seeds, const RunOptions& options = {});

// full, none (Bi-LSTM, OPDU and PF off), or '+'-joined no-bilstm / no-opdu /
// no-pf / no-mhsa.
AblationSettings parse_variant(const std::string& name);
std::vector<AblationSettings> default_variants();
// Distinct variants in request order, with the full method first if absent.
MetricTable run_ablation(const std::vector<AblationSettings>& variants, const ExperimentConfig& config,
                         const std::vector<std::uint64_t>& seeds, const RunOptions& options = {});

}  // namespace simsec::harness
