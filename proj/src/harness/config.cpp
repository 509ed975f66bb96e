#include "simsec/harness/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <type_traits>

namespace simsec::harness {

namespace {

using nlohmann::json;

// Reads typed fields from one JSON object and remembers which keys were used.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    const std::string where = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
      out = v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
      const auto x = v.get<long long>();
      if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
        throw ConfigError(where + ": integer out of range");
      }
      out = static_cast<T>(x);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
      out = v.get<double>();
    } else {
      if (!v.is_array() || v.size() != out.size()) {
        throw ConfigError(where + ": expected an array of " + std::to_string(out.size()) + " numbers");
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(where + ": expected numbers");
        out[i] = v[i].get<double>();
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// One field table shared by parsing and serialisation.
template <typename Visit>
void visit_scenario(ScenarioSettings& s, Visit&& f) {
  f("users", s.users);
  f("layers", s.layers);
  f("atoms", s.atoms);
  f("carrier_ghz", s.carrier_ghz);
  f("thickness_wavelengths", s.thickness_wavelengths);
  f("pitch_wavelengths", s.pitch_wavelengths);
  f("atom_size_wavelengths", s.atom_size_wavelengths);
  f("area", s.area);
  f("bs", s.bs);
  f("eve", s.eve);
  f("max_speed", s.max_speed);
  f("heading_spread", s.heading_spread);
  f("slot_duration", s.slot_duration);
  f("path_loss_exponent", s.path_loss_exponent);
  f("eve_path_loss_exponent", s.eve_path_loss_exponent);
  f("reference_gain_db", s.reference_gain_db);
  f("rician_factor_db", s.rician_factor_db);
  f("eve_rician_factor_db", s.eve_rician_factor_db);
  f("noise_dbm", s.noise_dbm);
  f("impairment", s.impairment);
  f("max_power_dbm", s.max_power_dbm);
}

template <typename Visit>
void visit_reward(RewardConfig& r, Visit&& f) {
  f("gain_diff", r.gain_diff);
  f("gain_pro", r.gain_pro);
  f("gain_sta", r.gain_sta);
  f("stability_band", r.stability_band);
  f("min_secrecy", r.min_secrecy);
}

template <typename Visit>
void visit_trainer(ExperimentConfig& c, Visit&& f) {
  ppo::TrainerConfig& t = c.trainer;
  nn::NetworkConfig& n = c.network;
  f("episodes", t.episodes);
  f("slots", c.slots);
  f("history", c.history);
  f("warmup_episodes", t.warmup_episodes);
  f("evolution_rounds", t.evolution_rounds);
  f("update_interval", t.update_interval);
  f("batch_size", t.batch_size);
  f("update_epochs", t.update_epochs);
  f("clip", t.clip);
  f("discount", t.discount);
  f("gae_lambda", t.gae_lambda);
  f("target_kl", t.target_kl);
  f("kl_threshold", t.kl_threshold);
  f("alpha_min", t.alpha_min);
  f("alpha_init", t.alpha_init);
  f("clipped_discount", t.clipped_discount);
  f("probability_weighting", t.probability_weighting);
  f("value_coef", t.value_coef);
  f("max_grad_norm", t.max_grad_norm);
  f("learning_rate", t.learning_rate);
  f("weight_decay", t.weight_decay);
  f("buffer_capacity", t.replay.capacity);
  f("priority_floor", t.replay.priority_floor);
  f("threshold_decay", t.replay.threshold_decay);
  f("checkpoint_every", t.checkpoint_every);
  f("hidden", n.hidden);
  f("lstm_layers", n.lstm_layers);
  f("heads", n.heads);
  f("init_log_std", n.init_log_std);
  f("mean_init_scale", n.mean_init_scale);
  f("seed", t.seed);
}

template <typename Visit>
void visit_ablation(AblationSettings& a, Visit&& f) {
  f("disable_bilstm", a.disable_bilstm);
  f("disable_opdu", a.disable_opdu);
  f("disable_pf", a.disable_pf);
  f("disable_mhsa", a.disable_mhsa);
}

template <typename Visit>
void visit_evaluation(EvaluationSettings& e, Visit&& f) {
  f("episodes", e.episodes);
  f("search_candidates", e.search_candidates);
}

template <typename Fn>
void read_block(const json& root, const char* name, Fn&& fill) {
  if (!root.contains(name)) return;
  Block b(root.at(name), name);
  fill([&b](const char* key, auto& field) { b.get(key, field); });
  b.finish();
}

template <typename Fn>
json write_block(Fn&& fill) {
  json out = json::object();
  fill([&out](const char* key, auto& field) { out[key] = field; });
  return out;
}

}  // namespace

std::string AblationSettings::label() const {
  if (full()) return "full";
  std::string s;
  auto add = [&s](bool off, const char* name) {
    if (!off) return;
    if (!s.empty()) s += "+";
    s += name;
  };
  add(disable_bilstm, "no-bilstm");
  add(disable_opdu, "no-opdu");
  add(disable_pf, "no-pf");
  add(disable_mhsa, "no-mhsa");
  return s;
}

EnvConfig ExperimentConfig::env_config() const {
  const ScenarioSettings& s = scenario;
  EnvConfig env;
  ScenarioConfig& sc = env.scenario;
  sc.users = s.users;
  sc.layers = s.layers;
  sc.atoms_per_layer = s.atoms;
  sc.carrier_hz = s.carrier_ghz * 1e9;
  sc.thickness_in_wavelengths = s.thickness_wavelengths;
  sc.pitch_in_wavelengths = s.pitch_wavelengths;
  sc.atom_size_in_wavelengths = s.atom_size_wavelengths;
  sc.bs_position = Vec3(s.bs[0], s.bs[1], s.bs[2]);
  sc.eve_position = Vec3(s.eve[0], s.eve[1], s.eve[2]);
  sc.area = ServiceArea{s.area[0], s.area[1], s.area[2], s.area[3]};
  sc.mobility.max_speed = s.max_speed;
  sc.mobility.heading_spread = s.heading_spread;
  sc.mobility.slot_duration = s.slot_duration;
  sc.sim_path = PathLossModel{db_to_linear(s.reference_gain_db), s.path_loss_exponent};
  sc.eve_path = PathLossModel{db_to_linear(s.reference_gain_db), s.eve_path_loss_exponent};
  sc.sim_rician = RicianParams{db_to_linear(s.rician_factor_db)};
  sc.eve_rician = RicianParams{db_to_linear(s.eve_rician_factor_db)};
  sc.noise_watts = dbm_to_watts(s.noise_dbm);
  sc.impairment = s.impairment;
  sc.max_power_watts = dbm_to_watts(s.max_power_dbm);
  env.reward = reward;
  env.slots_per_episode = slots;
  env.history = history;
  return env;
}

nn::NetworkConfig ExperimentConfig::network_config() const {
  nn::NetworkConfig n = ppo::network_for(env_config(), network);
  n.use_bilstm = !ablation.disable_bilstm;
  n.use_mhsa = !ablation.disable_mhsa;
  return n;
}

ppo::TrainerConfig ExperimentConfig::trainer_config() const {
  ppo::TrainerConfig t = trainer;
  t.use_opdu = !ablation.disable_opdu;
  t.use_pf = !ablation.disable_pf;
  t.eval_episodes = evaluation.episodes;
  return t;
}

void ExperimentConfig::validate() const {
  try {
    env_config().validate();
    network_config().validate();
    trainer_config().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (evaluation.episodes < 1 || evaluation.search_candidates < 1) {
    throw ConfigError("evaluation counts must be positive");
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!j.contains("version")) throw ConfigError("configuration lacks a 'version' field");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kConfigVersion) {
    throw ConfigError("unsupported configuration version (expected " + std::to_string(kConfigVersion) + ")");
  }
  static const std::set<std::string> blocks{"version", "scenario", "reward", "trainer", "ablation", "evaluation"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!blocks.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
  }
  ExperimentConfig c;
  read_block(j, "scenario", [&](auto&& f) { visit_scenario(c.scenario, f); });
  read_block(j, "reward", [&](auto&& f) { visit_reward(c.reward, f); });
  read_block(j, "trainer", [&](auto&& f) { visit_trainer(c, f); });
  read_block(j, "ablation", [&](auto&& f) { visit_ablation(c.ablation, f); });
  read_block(j, "evaluation", [&](auto&& f) { visit_evaluation(c.evaluation, f); });
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed configuration file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  json j;
  j["version"] = kConfigVersion;
  j["scenario"] = write_block([&](auto&& f) { visit_scenario(c.scenario, f); });
  j["reward"] = write_block([&](auto&& f) { visit_reward(c.reward, f); });
  j["trainer"] = write_block([&](auto&& f) { visit_trainer(c, f); });
  j["ablation"] = write_block([&](auto&& f) { visit_ablation(c.ablation, f); });
  j["evaluation"] = write_block([&](auto&& f) { visit_evaluation(c.evaluation, f); });
  return j;
}

void save_config(const std::string& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write configuration file '" + path + "'");
  out << to_json(config).dump(2) << '\n';
}

std::uint64_t evaluation_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

}  // namespace simsec::harness
