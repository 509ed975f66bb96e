#include "simsec/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace simsec::harness {

namespace {

void check_strategy(int strategy) {
  if (strategy < 1 || strategy > 3) {
    throw std::invalid_argument("unknown strategy id " + std::to_string(strategy) + " (expected 1, 2 or 3)");
  }
}

struct Aggregate {
  std::vector<double> asr;
  double reward = 0.0;
  int episodes = 0;

  void add(const ppo::EvaluationResult& r) {
    asr.insert(asr.end(), r.episode_asr.begin(), r.episode_asr.end());
    reward += r.mean_reward * r.episodes;
    episodes += r.episodes;
  }

  void fill(MetricRow& row) const {
    const double n = static_cast<double>(asr.size());
    row.mean_asr = std::accumulate(asr.begin(), asr.end(), 0.0) / n;
    double var = 0.0;
    for (double a : asr) var += (a - row.mean_asr) * (a - row.mean_asr);
    row.std_asr = asr.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    row.mean_reward = reward / episodes;
  }
};

int integral_value(const std::string& axis, double value) {
  if (value != std::floor(value)) throw ConfigError("axis " + axis + " needs integer values");
  return static_cast<int>(value);
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "ppo-bop" || name == "ppo") return Method::kPpoBop;
  if (name == "strategy1" || name == "1") return Method::kStrategy1;
  if (name == "strategy2" || name == "2") return Method::kStrategy2;
  if (name == "strategy3" || name == "3") return Method::kStrategy3;
  if (name == "random-search" || name == "random") return Method::kRandomSearch;
  throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kPpoBop: return "ppo-bop";
    case Method::kStrategy1: return "strategy1";
    case Method::kStrategy2: return "strategy2";
    case Method::kStrategy3: return "strategy3";
    case Method::kRandomSearch: return "random-search";
  }
  return "unknown";
}

EnvConfig strategy_env(int strategy, const ExperimentConfig& config) {
  check_strategy(strategy);
  EnvConfig env = config.env_config();
  if (strategy == 1) env.scenario.receiver = ReceiverMode::kDirect;
  return env;
}

Eigen::VectorXd strategy_action(int strategy, const ExperimentConfig& config) {
  check_strategy(strategy);
  const ScenarioSettings& s = config.scenario;
  return uniform_action(s.layers, s.atoms, s.users, kPi, strategy == 2 ? 0.5 : 1.0);
}

ppo::EvaluationResult evaluate_strategy(int strategy, const ExperimentConfig& config, int episodes,
                                        std::uint64_t seed) {
  SecureUplinkEnv env(strategy_env(strategy, config), evaluation_seed(seed));
  const Eigen::VectorXd action = strategy_action(strategy, config);
  return ppo::evaluate_actions(env, episodes, [&action](const SecureUplinkEnv&) { return action; });
}

MetricRow strategy_eval(int strategy, const ExperimentConfig& config, int episodes, std::uint64_t seed) {
  const ppo::EvaluationResult r = evaluate_strategy(strategy, config, episodes, seed);
  MetricRow row;
  row.run_id = "baseline-" + std::to_string(strategy);
  row.method = "strategy" + std::to_string(strategy);
  row.episodes = episodes;
  row.seeds = {seed};
  Aggregate agg;
  agg.add(r);
  agg.fill(row);
  return row;
}

Eigen::VectorXd encode_action(const PhaseConfig& phases, int users, double power) {
  const int m = phases.layers();
  const int n = phases.atoms();
  Eigen::VectorXd a(static_cast<Eigen::Index>(m) * n + users);
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < n; ++i) a(static_cast<Eigen::Index>(l) * n + i) = phases(l, i) / kPi - 1.0;
  }
  a.tail(users).setConstant(2.0 * power - 1.0);
  return a;
}

SearchResult random_search(const ExperimentConfig& config, int episodes, std::uint64_t seed) {
  const EnvConfig env_cfg = config.env_config();
  const ScenarioSettings& s = config.scenario;
  const std::vector<double> powers(static_cast<std::size_t>(s.users), env_cfg.scenario.max_power_watts);
  Rng rng = make_stream(seed, 31);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  SearchResult result{PhaseConfig(s.layers, s.atoms, kPi), {}};
  const ppo::ActionPolicy policy = [&](const SecureUplinkEnv& env) {
    if (env.slot() == 0) result.phases = PhaseConfig(s.layers, s.atoms, kPi);
    const ChannelRealization& estimate = env.last_channels();
    double best = env.system().evaluate(result.phases, powers, estimate).sum_secrecy;
    for (int c = 1; c < config.evaluation.search_candidates; ++c) {
      const PhaseConfig candidate = PhaseConfig::from_matrix(
          Eigen::MatrixXd::NullaryExpr(s.layers, s.atoms, [&]() { return phase(rng); }));
      const double score = env.system().evaluate(candidate, powers, estimate).sum_secrecy;
      if (score > best) {
        best = score;
        result.phases = candidate;
      }
    }
    return encode_action(result.phases, s.users, 1.0);
  };
  SecureUplinkEnv env(env_cfg, evaluation_seed(seed));
  result.evaluation = ppo::evaluate_actions(env, episodes, policy);
  return result;
}

MetricRow run_method(Method method, const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                     const std::string& run_id, const RunOptions& options) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  config.validate();
  MetricRow row;
  row.run_id = run_id;
  row.method = method_name(method);
  row.seeds = seeds;
  Aggregate agg;
  const int eval_episodes = config.evaluation.episodes;
  for (std::uint64_t seed : seeds) {
    switch (method) {
      case Method::kStrategy1: agg.add(evaluate_strategy(1, config, eval_episodes, seed)); break;
      case Method::kStrategy2: agg.add(evaluate_strategy(2, config, eval_episodes, seed)); break;
      case Method::kStrategy3: agg.add(evaluate_strategy(3, config, eval_episodes, seed)); break;
      case Method::kRandomSearch: agg.add(random_search(config, eval_episodes, seed).evaluation); break;
      case Method::kPpoBop: {
        ppo::TrainerConfig tc = config.trainer_config();
        tc.seed = seed;
        ppo::Trainer trainer(ppo::default_env_factory(config.env_config()), config.network_config(), tc);
        std::ofstream log;
        const std::string stem = run_id + "_seed" + std::to_string(seed);
        if (!options.log_dir.empty()) {
          std::filesystem::create_directories(options.log_dir);
          log.open(options.log_dir + "/" + stem + ".jsonl");
          trainer.set_log(&log);
        }
        if (!options.checkpoint_dir.empty()) trainer.set_checkpoint_dir(options.checkpoint_dir + "/" + stem);
        trainer.train();
        agg.add(trainer.evaluate(eval_episodes, evaluation_seed(seed)));
        break;
      }
    }
  }
  row.episodes = method == Method::kPpoBop ? config.trainer.episodes : eval_episodes;
  agg.fill(row);
  return row;
}

void apply_axis(ExperimentConfig& config, const std::string& axis, double value) {
  if (axis == "pmax") {
    config.scenario.max_power_dbm = value;
  } else if (axis == "kappa") {
    config.scenario.impairment = value;
  } else if (axis == "M") {
    config.scenario.layers = integral_value(axis, value);
  } else if (axis == "N") {
    config.scenario.atoms = integral_value(axis, value);
  } else if (axis == "lr") {
    config.trainer.learning_rate = value;
  } else if (axis == "b") {
    config.trainer.batch_size = integral_value(axis, value);
  } else if (axis == "l") {
    config.network.lstm_layers = integral_value(axis, value);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (expected pmax, kappa, M, N, lr, b or l)");
  }
  config.validate();
}

MetricTable run_sweep(const std::string& axis, const std::vector<double>& values,
                      const ExperimentConfig& config, Method method,
                      const std::vector<std::uint64_t>& seeds, const RunOptions& options) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> points;
  for (double v : values) {
    ExperimentConfig c = config;
    apply_axis(c, axis, v);
    points.push_back(c);
  }
  MetricTable table;
  for (std::size_t i = 0; i < points.size(); ++i) {
    MetricRow row = run_method(method, points[i], seeds, "sweep-" + axis + "-" + std::to_string(i), options);
    row.axis = axis;
    row.sweep_value = format_number(values[i]);
    table.add(std::move(row));
  }
  return table;
}

AblationSettings parse_variant(const std::string& name) {
  AblationSettings a;
  if (name == "full") return a;
  if (name == "none") {
    a.disable_bilstm = a.disable_opdu = a.disable_pf = true;
    return a;
  }
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t end = std::min(name.find('+', start), name.size());
    const std::string part = name.substr(start, end - start);
    if (part == "no-bilstm") a.disable_bilstm = true;
    else if (part == "no-opdu") a.disable_opdu = true;
    else if (part == "no-pf") a.disable_pf = true;
    else if (part == "no-mhsa") a.disable_mhsa = true;
    else throw ConfigError("unknown ablation variant '" + part + "'");
    start = end + 1;
  }
  return a;
}

std::vector<AblationSettings> default_variants() {
  return {parse_variant("full"), parse_variant("no-bilstm"), parse_variant("no-opdu"),
          parse_variant("no-pf"), parse_variant("no-mhsa")};
}

MetricTable run_ablation(const std::vector<AblationSettings>& variants, const ExperimentConfig& config,
                         const std::vector<std::uint64_t>& seeds, const RunOptions& options) {
  std::vector<AblationSettings> todo;
  if (std::none_of(variants.begin(), variants.end(), [](const AblationSettings& a) { return a.full(); })) {
    todo.push_back(AblationSettings{});
  }
  for (const AblationSettings& v : variants) {
    if (std::find(todo.begin(), todo.end(), v) == todo.end()) todo.push_back(v);
  }
  MetricTable table;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    ExperimentConfig c = config;
    c.ablation = todo[i];
    MetricRow row = run_method(Method::kPpoBop, c, seeds, "ablate-" + std::to_string(i), options);
    row.axis = "ablation";
    row.sweep_value = todo[i].label();
    table.add(std::move(row));
  }
  return table;
}

}  // namespace simsec::harness
