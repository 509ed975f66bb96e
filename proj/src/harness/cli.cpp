#include "simsec/harness/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "simsec/harness/experiments.hpp"
#include "simsec/nn/checkpoint.hpp"

namespace simsec::harness {

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = ".";
  int episodes = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment configuration");
  cmd->add_option("--seed", o.seed, "Seed (overrides the configuration)");
  cmd->add_option("--seeds", o.seeds, "Comma-separated seed list")->delimiter(',');
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--episodes", o.episodes,
                  "Training episodes (train, ablate, PPO sweeps) or evaluation episodes (others)")
      ->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonOptions& o, bool episodes_train) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.has_seed) c.trainer.seed = o.seed;
  if (o.episodes > 0) {
    if (episodes_train) c.trainer.episodes = o.episodes;
    else c.evaluation.episodes = o.episodes;
  }
  c.validate();
  return c;
}

std::vector<std::uint64_t> seed_list(const CommonOptions& o, const ExperimentConfig& c) {
  if (!o.seeds.empty()) return o.seeds;
  return {c.seed()};
}

void write_outputs(const CommonOptions& o, const MetricTable& table, const ExperimentConfig& c,
                   std::ostream& out) {
  std::filesystem::create_directories(o.out_dir);
  table.save(o.out_dir + "/metrics.csv");
  save_config(o.out_dir + "/config.json", c);
  table.write_csv(out);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secure SIM uplink simulator and PPO-BOP trainer"};
  app.require_subcommand(1);

  CommonOptions train_o, eval_o, sweep_o, ablate_o, base_o;
  CLI::App* train = app.add_subcommand("train", "Train PPO-BOP and evaluate the greedy policy");
  add_common(train, train_o);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a saved checkpoint greedily");
  add_common(evaluate, eval_o);
  std::string checkpoint;
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter axis");
  add_common(sweep, sweep_o);
  std::string axis, method = "ppo-bop";
  std::vector<double> values;
  sweep->add_option("--axis", axis, "pmax, kappa, M, N, lr, b or l")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  sweep->add_option("--method", method, "ppo-bop, strategy1..3 or random-search");

  CLI::App* ablate = app.add_subcommand("ablate", "Train PPO-BOP variants with mechanisms disabled");
  add_common(ablate, ablate_o);
  std::vector<std::string> variants;
  ablate->add_option("--variants", variants, "full, none, no-bilstm, no-opdu, no-pf, no-mhsa (joined by +)")
      ->delimiter(',');

  CLI::App* baseline = app.add_subcommand("baseline", "Evaluate a static strategy");
  add_common(baseline, base_o);
  std::string strategy = "2";
  baseline->add_option("--strategy", strategy, "1, 2, 3 or random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  for (auto [cmd, o] : {std::pair{train, &train_o}, {evaluate, &eval_o}, {sweep, &sweep_o},
                        {ablate, &ablate_o}, {baseline, &base_o}}) {
    o->has_seed = cmd->count("--seed") > 0;
  }

  try {
    if (*train) {
      const ExperimentConfig c = resolve(train_o, true);
      RunOptions opts{train_o.out_dir + "/logs", train_o.out_dir + "/checkpoints"};
      MetricTable table;
      table.add(run_method(Method::kPpoBop, c, seed_list(train_o, c), "train", opts));
      write_outputs(train_o, table, c, out);
    } else if (*evaluate) {
      const ExperimentConfig c = resolve(eval_o, false);
      std::unique_ptr<nn::ActorCritic> net;
      try {
        net = nn::load_checkpoint(checkpoint);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      const nn::NetworkConfig expect = c.network_config();
      if (net->config().obs_dim != expect.obs_dim || net->config().action_dim != expect.action_dim ||
          net->config().history != expect.history) {
        throw ConfigError("checkpoint '" + checkpoint + "' does not match the configured scenario");
      }
      MetricRow row;
      row.run_id = "evaluate";
      row.method = "ppo-bop";
      row.seeds = seed_list(eval_o, c);
      row.episodes = c.evaluation.episodes;
      std::vector<double> asr;
      double reward = 0.0;
      for (std::uint64_t s : row.seeds) {
        SecureUplinkEnv env(c.env_config(), evaluation_seed(s));
        const ppo::EvaluationResult r = ppo::evaluate_actions(env, c.evaluation.episodes, ppo::greedy_policy(*net));
        asr.insert(asr.end(), r.episode_asr.begin(), r.episode_asr.end());
        reward += r.mean_reward;
      }
      double mean = 0.0;
      for (double a : asr) mean += a / static_cast<double>(asr.size());
      double var = 0.0;
      for (double a : asr) var += (a - mean) * (a - mean);
      row.mean_asr = mean;
      row.std_asr = asr.size() > 1 ? std::sqrt(var / static_cast<double>(asr.size() - 1)) : 0.0;
      row.mean_reward = reward / static_cast<double>(row.seeds.size());
      MetricTable table;
      table.add(row);
      write_outputs(eval_o, table, c, out);
    } else if (*sweep) {
      const Method m = parse_method(method);
      const ExperimentConfig c = resolve(sweep_o, m == Method::kPpoBop);
      RunOptions opts;
      if (m == Method::kPpoBop) opts.log_dir = sweep_o.out_dir + "/logs";
      write_outputs(sweep_o, run_sweep(axis, values, c, m, seed_list(sweep_o, c), opts), c, out);
    } else if (*ablate) {
      const ExperimentConfig c = resolve(ablate_o, true);
      std::vector<AblationSettings> list;
      for (const std::string& v : variants) list.push_back(parse_variant(v));
      if (list.empty()) list = default_variants();
      RunOptions opts{ablate_o.out_dir + "/logs", ""};
      write_outputs(ablate_o, run_ablation(list, c, seed_list(ablate_o, c), opts), c, out);
    } else if (*baseline) {
      const Method m = parse_method(strategy);
      if (m == Method::kPpoBop) throw ConfigError("baseline needs a static strategy");
      const ExperimentConfig c = resolve(base_o, false);
      MetricTable table;
      table.add(run_method(m, c, seed_list(base_o, c), "baseline-" + method_name(m)));
      write_outputs(base_o, table, c, out);
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ppo::DivergenceError& e) {
    err << "numeric divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace simsec::harness
