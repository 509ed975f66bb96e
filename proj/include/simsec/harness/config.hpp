#pragma once

// Experiment configuration in user units (dB, dBm, GHz). The JSON form has a
// `version` field and five optional blocks: scenario, reward, trainer,
// ablation, evaluation. Absent fields take the defaults below; unknown keys
// are rejected. Conversion to linear units happens in env_config().

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "simsec/environment.hpp"
#include "simsec/nn/actor_critic.hpp"
#include "simsec/ppo/trainer.hpp"

namespace simsec::harness {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioSettings {
  int users = 2;
  int layers = 4;
  int atoms = 36;
  double carrier_ghz = 3.5;
  double thickness_wavelengths = 5.0;
  double pitch_wavelengths = 0.5;
  double atom_size_wavelengths = 0.5;
  std::array<double, 4> area{0.0, 100.0, 0.0, 100.0};  // x_min, x_max, y_min, y_max
  std::array<double, 3> bs{0.0, 0.0, 20.0};
  std::array<double, 3> eve{20.0, 20.0, 0.0};
  double max_speed = 2.0;
  double heading_spread = kPi / 6.0;
  double slot_duration = 1.0;
  double path_loss_exponent = 2.0;
  double eve_path_loss_exponent = 2.0;
  double reference_gain_db = -20.0;
  double rician_factor_db = 10.0;
  double eve_rician_factor_db = 10.0;
  double noise_dbm = -110.0;
  double impairment = 0.1;
  double max_power_dbm = 30.0;
};

struct AblationSettings {
  bool disable_bilstm = false;
  bool disable_opdu = false;
  bool disable_pf = false;
  bool disable_mhsa = false;

  bool full() const { return !disable_bilstm && !disable_opdu && !disable_pf && !disable_mhsa; }
  std::string label() const;
  bool operator==(const AblationSettings&) const = default;
};

struct EvaluationSettings {
  int episodes = 20;
  int search_candidates = 32;
};

struct ExperimentConfig {
  ScenarioSettings scenario;
  RewardConfig reward;
  int slots = 40;
  int history = 8;
  nn::NetworkConfig network;  // dimensions other than width/depth/heads are derived
  ppo::TrainerConfig trainer;
  AblationSettings ablation;
  EvaluationSettings evaluation;

  EnvConfig env_config() const;
  nn::NetworkConfig network_config() const;
  ppo::TrainerConfig trainer_config() const;
  std::uint64_t seed() const { return trainer.seed; }
  // Throws ConfigError with the offending field.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);
void save_config(const std::string& path, const ExperimentConfig& config);

// Seed of the environment used for evaluation episodes, distinct from the
// training environment stream.
std::uint64_t evaluation_seed(std::uint64_t seed);

}  // namespace simsec::harness
