#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "simsec/harness/cli.hpp"
#include "simsec/harness/config.hpp"
#include "simsec/harness/experiments.hpp"
#include "simsec/harness/metric_table.hpp"
#include "simsec/nn/checkpoint.hpp"

using namespace simsec;
using namespace simsec::harness;
using nlohmann::json;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.scenario.layers = 2;
  c.scenario.atoms = 4;
  c.slots = 5;
  c.history = 3;
  c.network.hidden = 8;
  c.network.lstm_layers = 1;
  c.network.heads = 2;
  c.trainer.episodes = 4;
  c.trainer.warmup_episodes = 2;
  c.trainer.update_interval = 1;
  c.trainer.batch_size = 8;
  c.trainer.update_epochs = 2;
  c.evaluation.episodes = 2;
  c.evaluation.search_candidates = 4;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("simsec_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "simsec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& csv) {
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  return lines - 1;
}

}  // namespace

TEST_CASE("config defaults and unit conversion") {
  const ExperimentConfig c = parse_config(json{{"version", kConfigVersion}});
  CHECK(c.scenario.users == 2);
  CHECK(c.scenario.layers == 4);
  CHECK(c.scenario.atoms == 36);
  CHECK(c.slots == 40);
  CHECK(c.history == 8);
  CHECK(c.trainer.batch_size == 128);
  CHECK(c.trainer.clip == doctest::Approx(0.3));
  CHECK(c.evaluation.episodes == 20);

  const EnvConfig env = c.env_config();
  CHECK(env.scenario.carrier_hz == doctest::Approx(3.5e9));
  CHECK(env.scenario.max_power_watts == doctest::Approx(1.0));
  CHECK(env.scenario.noise_watts == doctest::Approx(1e-14));
  CHECK(env.scenario.sim_path.reference_gain == doctest::Approx(0.01));
  CHECK(env.scenario.sim_rician.factor == doctest::Approx(10.0));
  CHECK(env.scenario.impairment == doctest::Approx(0.1));

  ExperimentConfig d = c;
  d.scenario.max_power_dbm = 20.0;
  d.scenario.rician_factor_db = 0.0;
  CHECK(d.env_config().scenario.max_power_watts == doctest::Approx(0.1));
  CHECK(d.env_config().scenario.sim_rician.factor == doctest::Approx(1.0));
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 99}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"scenario", {{"layerz", 2}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"scenario", {{"layers", "four"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"scenario", {{"layers", 2.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"scenario", {{"area", {0, 1}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"ablation", {{"disable_pf", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"trainer", {{"seed", -1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"scenario", {{"atoms", 10}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"version", 1}, {"trainer", {{"clip", 1.5}}}}), ConfigError);

  try {
    parse_config(json{{"version", 1}, {"reward", {{"gain_dif", 1.0}}}});
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gain_dif") != std::string::npos);
  }
}

TEST_CASE("config round-trips losslessly") {
  ExperimentConfig c = tiny_config();
  c.scenario.max_power_dbm = 27.25;
  c.scenario.eve = {31.0, 12.5, 0.0};
  c.reward.min_secrecy = 0.0;
  c.trainer.learning_rate = 3.3e-4;
  c.trainer.seed = 0xFFFFFFFFFFFFFFFFULL;
  c.ablation.disable_opdu = true;
  c.evaluation.search_candidates = 7;
  const json j = to_json(c);
  const ExperimentConfig back = parse_config(j);
  CHECK(to_json(back) == j);
  CHECK(back.trainer.seed == c.trainer.seed);
  CHECK(back.trainer.learning_rate == c.trainer.learning_rate);
  CHECK(back.ablation == c.ablation);

  const auto dir = scratch("roundtrip");
  save_config((dir / "c.json").string(), c);
  CHECK(to_json(load_config((dir / "c.json").string())) == j);

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
  try {
    load_config((dir / "missing.json").string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }
}

TEST_CASE("evaluation seed is distinct and deterministic") {
  CHECK(evaluation_seed(1) == evaluation_seed(1));
  CHECK(evaluation_seed(1) != 1);
  CHECK(evaluation_seed(1) != evaluation_seed(2));
}

TEST_CASE("strategies 2 and 3 share channels and differ only in power") {
  const ExperimentConfig c = tiny_config();
  SecureUplinkEnv env2(strategy_env(2, c), 17);
  SecureUplinkEnv env3(strategy_env(3, c), 17);
  env2.reset();
  env3.reset();
  const Eigen::VectorXd a2 = strategy_action(2, c);
  const Eigen::VectorXd a3 = strategy_action(3, c);
  const double pmax = c.env_config().scenario.max_power_watts;
  for (int t = 0; t < c.slots; ++t) {
    env2.step(a2);
    env3.step(a3);
    const ChannelRealization& h2 = env2.last_channels();
    const ChannelRealization& h3 = env3.last_channels();
    for (int k = 0; k < c.scenario.users; ++k) {
      CHECK((h2.h_sim[k] - h3.h_sim[k]).norm() == 0.0);
      CHECK(h2.h_eve[k] == h3.h_eve[k]);
    }
    const DecodedAction d2 = decode_action(a2, c.scenario.layers, c.scenario.atoms, c.scenario.users, pmax);
    const DecodedAction d3 = decode_action(a3, c.scenario.layers, c.scenario.atoms, c.scenario.users, pmax);
    const LinkSnapshot s2 = env2.system().snapshot(d2.phases, d2.powers, h2);
    const LinkSnapshot s3 = env3.system().snapshot(d3.phases, d3.powers, h3);
    for (int k = 0; k < c.scenario.users; ++k) {
      CHECK(s2.powers[k] == doctest::Approx(0.5 * pmax));
      CHECK(s3.powers[k] == doctest::Approx(pmax));
      CHECK(s3.gains[k] * s3.powers[k] == doctest::Approx(2.0 * s2.gains[k] * s2.powers[k]));
    }
  }
  CHECK(env2.users()[0].position() == env3.users()[0].position());
}

TEST_CASE("strategy 1 ignores the SIM dimensions") {
  ExperimentConfig a = tiny_config();
  ExperimentConfig b = tiny_config();
  b.scenario.layers = 3;
  b.scenario.atoms = 9;
  const ppo::EvaluationResult ra = evaluate_strategy(1, a, 3, 4);
  const ppo::EvaluationResult rb = evaluate_strategy(1, b, 3, 4);
  CHECK(ra.mean_asr == rb.mean_asr);
  CHECK(ra.mean_reward == rb.mean_reward);
  CHECK(ra.episode_asr == rb.episode_asr);
}

TEST_CASE("distant eavesdropper makes secrecy equal the rate") {
  ExperimentConfig c = tiny_config();
  c.scenario.eve = {1e12, 1e12, 0.0};
  for (int strategy : {1, 2, 3}) {
    SecureUplinkEnv env(strategy_env(strategy, c), 9);
    env.reset();
    const Eigen::VectorXd action = strategy_action(strategy, c);
    while (!env.done()) {
      const StepResult s = env.step(action);
      double sum_rate = 0.0;
      for (double r : s.report.rates) sum_rate += r;
      CHECK(s.report.sum_secrecy == doctest::Approx(sum_rate).epsilon(1e-9));
      for (double r : s.report.eve_rates) CHECK(r < 1e-9);
    }
  }
}

TEST_CASE("strategy evaluator matches a manual rollout") {
  const ExperimentConfig c = tiny_config();
  const ppo::EvaluationResult r = evaluate_strategy(3, c, 3, 11);
  SecureUplinkEnv env(strategy_env(3, c), evaluation_seed(11));
  const Eigen::VectorXd action = strategy_action(3, c);
  REQUIRE(r.episode_asr.size() == 3);
  for (int e = 0; e < 3; ++e) {
    env.reset();
    double asr = 0.0;
    int slots = 0;
    while (!env.done()) {
      asr += env.step(action).report.sum_secrecy;
      ++slots;
    }
    CHECK(asr / slots == r.episode_asr[e]);
  }
  CHECK_THROWS_AS(strategy_action(4, c), std::invalid_argument);
  CHECK_THROWS_AS(strategy_env(0, c), std::invalid_argument);
  CHECK_THROWS_AS(parse_method("strategy4"), ConfigError);
}

TEST_CASE("encode_action inverts decode_action") {
  Rng rng(3);
  Eigen::MatrixXd p(2, 4);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = uniform(rng, 0.0, kTwoPi);
  const PhaseConfig phases = PhaseConfig::from_matrix(p);
  const Eigen::VectorXd a = encode_action(phases, 2, 0.25);
  const DecodedAction d = decode_action(a, 2, 4, 2, 2.0);
  CHECK((d.phases.matrix() - p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.powers[0] == doctest::Approx(0.5));
  CHECK(d.powers[1] == doctest::Approx(0.5));
}

TEST_CASE("random search is deterministic and uses the evaluation environment") {
  const ExperimentConfig c = tiny_config();
  const SearchResult a = random_search(c, 2, 6);
  const SearchResult b = random_search(c, 2, 6);
  CHECK(a.evaluation.episode_asr == b.evaluation.episode_asr);
  CHECK(a.evaluation.episodes == 2);

  // With a single candidate the search degenerates to the all-pi configuration at P_max.
  ExperimentConfig one = c;
  one.evaluation.search_candidates = 1;
  const SearchResult s = random_search(one, 2, 6);
  CHECK(s.evaluation.episode_asr == evaluate_strategy(3, one, 2, 6).episode_asr);
}

TEST_CASE("sweeps produce one row per value") {
  const ExperimentConfig c = tiny_config();
  const MetricTable t = run_sweep("pmax", {10.0, 20.0, 30.0}, c, Method::kStrategy3, {1, 2});
  REQUIRE(t.size() == 3);
  CHECK(t.rows()[0].axis == "pmax");
  CHECK(t.rows()[1].sweep_value == "20");
  CHECK(t.rows()[2].run_id == "sweep-pmax-2");
  CHECK(t.rows()[0].seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(t.rows()[0].episodes == c.evaluation.episodes);

  const MetricTable m = run_sweep("M", {2.0, 3.0}, c, Method::kRandomSearch, {1});
  CHECK(m.size() == 2);
  CHECK_THROWS_AS(run_sweep("gamma", {1.0}, c, Method::kStrategy2, {1}), ConfigError);
  CHECK_THROWS_AS(run_sweep("M", {2.5}, c, Method::kStrategy2, {1}), ConfigError);
  CHECK_THROWS_AS(run_sweep("N", {5.0}, c, Method::kStrategy2, {1}), ConfigError);
  CHECK_THROWS_AS(run_sweep("pmax", {}, c, Method::kStrategy2, {1}), ConfigError);
  CHECK_THROWS_AS(run_method(Method::kStrategy2, c, {}, "x"), ConfigError);

  ExperimentConfig swept = c;
  apply_axis(swept, "lr", 5e-4);
  CHECK(swept.trainer.learning_rate == 5e-4);
  apply_axis(swept, "b", 16);
  CHECK(swept.trainer.batch_size == 16);
  apply_axis(swept, "l", 2);
  CHECK(swept.network.lstm_layers == 2);
  apply_axis(swept, "kappa", 0.05);
  CHECK(swept.scenario.impairment == 0.05);
}

TEST_CASE("ablation variants") {
  CHECK(parse_variant("full").full());
  const AblationSettings none = parse_variant("none");
  CHECK(none.disable_bilstm);
  CHECK(none.disable_opdu);
  CHECK(none.disable_pf);
  CHECK_FALSE(none.disable_mhsa);
  const AblationSettings two = parse_variant("no-opdu+no-pf");
  CHECK(two.disable_opdu);
  CHECK(two.disable_pf);
  CHECK_FALSE(two.disable_bilstm);
  CHECK(two.label() == "no-opdu+no-pf");
  CHECK_THROWS_AS(parse_variant("no-gae"), ConfigError);
  CHECK_THROWS_AS(parse_variant(""), ConfigError);
  CHECK(default_variants().size() == 5);

  const ExperimentConfig c = tiny_config();
  const MetricTable t = run_ablation({parse_variant("no-pf"), parse_variant("no-pf")}, c, {3});
  REQUIRE(t.size() == 2);
  CHECK(t.rows()[0].sweep_value == "full");
  CHECK(t.rows()[1].sweep_value == "no-pf");
  CHECK(t.rows()[0].axis == "ablation");
  CHECK(t.rows()[0].episodes == c.trainer.episodes);
  for (const MetricRow& r : t.rows()) CHECK(std::isfinite(r.mean_asr));

  const MetricTable f = run_ablation({parse_variant("no-mhsa"), parse_variant("full")}, c, {3});
  REQUIRE(f.size() == 2);
  CHECK(f.rows()[0].sweep_value == "no-mhsa");
  CHECK(f.rows()[1].sweep_value == "full");
}

TEST_CASE("metric table CSV schema") {
  CHECK(MetricTable::columns() == std::vector<std::string>{"run_id", "method", "axis", "sweep_value", "episodes",
                                                           "seeds", "mean_asr", "std_asr", "mean_reward"});
  MetricTable t;
  MetricRow r;
  r.run_id = "a";
  r.method = "strategy2";
  r.episodes = 3;
  r.seeds = {1, 2};
  r.mean_asr = 0.1;
  r.std_asr = 0.0;
  r.mean_reward = -2.5;
  t.add(r);
  CHECK(t.to_csv() ==
        "run_id,method,axis,sweep_value,episodes,seeds,mean_asr,std_asr,mean_reward\n"
        "a,strategy2,,,3,1;2,0.1,0,-2.5\n");
  MetricTable u;
  u.append(t);
  u.append(t);
  CHECK(u.size() == 2);
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("cli baseline is byte-for-byte reproducible") {
  const auto dir = scratch("cli_baseline");
  const std::string a = (dir / "a").string();
  const std::string b = (dir / "b").string();
  const CliResult ra = run_cli({"baseline", "--strategy", "2", "--seeds", "1,2", "--episodes", "2", "--out", a});
  const CliResult rb = run_cli({"baseline", "--strategy", "2", "--seeds", "1,2", "--episodes", "2", "--out", b});
  REQUIRE(ra.code == kExitOk);
  REQUIRE(rb.code == kExitOk);
  CHECK(ra.out == rb.out);
  const std::string csv = read_file(dir / "a" / "metrics.csv");
  CHECK(csv == read_file(dir / "b" / "metrics.csv"));
  CHECK(csv == ra.out);
  CHECK(data_rows(csv) == 1);
  CHECK(csv.rfind("run_id,method,axis,sweep_value,episodes,seeds,mean_asr,std_asr,mean_reward\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "a" / "config.json"));
  CHECK(load_config((dir / "a" / "config.json").string()).evaluation.episodes == 2);
}

TEST_CASE("cli configuration errors exit with code 2") {
  const CliResult missing = run_cli({"baseline", "--config", "/nonexistent/run.json"});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("/nonexistent/run.json") != std::string::npos);

  CHECK(run_cli({}).code == kExitConfig);
  CHECK(run_cli({"launch"}).code == kExitConfig);
  CHECK(run_cli({"sweep", "--values", "1"}).code == kExitConfig);
  const auto dir = scratch("cli_errors");
  CHECK(run_cli({"sweep", "--axis", "gamma", "--values", "1", "--method", "strategy2", "--out", dir.string()})
            .code == kExitConfig);
  CHECK(run_cli({"baseline", "--strategy", "ppo-bop", "--out", dir.string()}).code == kExitConfig);
  CHECK(run_cli({"evaluate", "--checkpoint", (dir / "none.json").string(), "--out", dir.string()}).code ==
        kExitConfig);
}

TEST_CASE("cli sweep writes one row per value") {
  const auto dir = scratch("cli_sweep");
  const CliResult r = run_cli({"sweep", "--axis", "pmax", "--values", "10,20,30", "--method", "strategy3",
                               "--seeds", "1", "--episodes", "1", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(data_rows(read_file(dir / "metrics.csv")) == 3);
  CHECK(r.out.find("sweep-pmax-2,strategy3,pmax,30,") != std::string::npos);
}

TEST_CASE("cli train then evaluate round-trips through a checkpoint") {
  const auto dir = scratch("cli_train");
  ExperimentConfig c = tiny_config();
  c.trainer.checkpoint_every = 2;
  c.trainer.seed = 8;
  save_config((dir / "cfg.json").string(), c);
  const CliResult t = run_cli({"train", "--config", (dir / "cfg.json").string(), "--out", (dir / "run").string()});
  REQUIRE(t.code == kExitOk);
  CHECK(data_rows(read_file(dir / "run" / "metrics.csv")) == 1);
  const auto ckpt = dir / "run" / "checkpoints" / "train_seed8" / "checkpoint_4.json";
  REQUIRE(std::filesystem::exists(ckpt));
  CHECK(std::filesystem::exists(dir / "run" / "logs" / "train_seed8.jsonl"));

  const CliResult e = run_cli({"evaluate", "--config", (dir / "cfg.json").string(), "--checkpoint", ckpt.string(),
                               "--out", (dir / "eval").string()});
  REQUIRE(e.code == kExitOk);
  CHECK(data_rows(e.out) == 1);

  // The checkpoint's greedy policy reproduces the evaluation directly.
  const std::unique_ptr<nn::ActorCritic> net = nn::load_checkpoint(ckpt.string());
  SecureUplinkEnv env(c.env_config(), evaluation_seed(8));
  const ppo::EvaluationResult direct = ppo::evaluate_actions(env, c.evaluation.episodes, ppo::greedy_policy(*net));
  CHECK(e.out.find("," + format_number(direct.mean_asr) + ",") != std::string::npos);

  ExperimentConfig other = c;
  other.scenario.atoms = 9;
  save_config((dir / "other.json").string(), other);
  const CliResult mismatch = run_cli({"evaluate", "--config", (dir / "other.json").string(), "--checkpoint",
                                      ckpt.string(), "--out", (dir / "eval2").string()});
  CHECK(mismatch.code == kExitConfig);
}

TEST_CASE("cli reports divergence with exit code 3") {
  const auto dir = scratch("cli_diverge");
  ExperimentConfig c = tiny_config();
  c.trainer.learning_rate = 1e30;
  c.trainer.max_grad_norm = 1e30;
  c.trainer.weight_decay = 0.0;
  c.trainer.episodes = 8;
  save_config((dir / "cfg.json").string(), c);
  const CliResult r = run_cli({"train", "--config", (dir / "cfg.json").string(), "--out", (dir / "run").string()});
  CHECK(r.code == kExitDivergence);
}
