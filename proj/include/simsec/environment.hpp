#pragma once

// Episodic MDP over the secure uplink: state assembly, action decoding,
// composite reward with the minimum-secrecy gate, history windowing.

#include <cstdint>
#include <deque>
#include <ostream>
#include <vector>

#include "simsec/system.hpp"

namespace simsec {

struct RewardConfig {
  double gain_diff = 1.0;
  double gain_pro = 1.0;
  double gain_sta = 0.5;
  double stability_band = 0.5;
  double min_secrecy = 0.5;

  void validate() const;
};

struct RewardTerms {
  double diff = 0.0;
  double pro = 0.0;
  double sta = 0.0;
  bool feasible = true;
  double total = 0.0;
};

struct MdpState {
  std::vector<double> positions;  // x_1, y_1, ..., x_K, y_K
  std::vector<double> secrecy;
  std::vector<double> sinr;
  double mean_secrecy = 0.0;

  // [positions, secrecy, sinr, mean], length 4K + 1.
  std::vector<double> flatten() const;
};

struct DecodedAction {
  PhaseConfig phases;
  std::vector<double> powers;
};

// Entries are clipped to [-1, 1]; phases (x + 1) pi wrapped to [0, 2 pi),
// powers (x + 1) / 2 * P_max.
DecodedAction decode_action(const Eigen::VectorXd& action, int layers, int atoms, int users,
                            double max_power);

// Uniform action: every phase equal to `phase`, every power `power_fraction`
// of P_max.
Eigen::VectorXd uniform_action(int layers, int atoms, int users, double phase,
                               double power_fraction);

RewardTerms compute_reward(const SecrecyReport& prev, const SecrecyReport& next,
                           const RewardConfig& cfg);

struct EnvConfig {
  ScenarioConfig scenario;
  RewardConfig reward;
  int slots_per_episode = 40;
  int history = 8;

  void validate() const;
};

struct StepResult {
  MdpState state;
  double reward = 0.0;
  RewardTerms terms;
  bool done = false;
  SecrecyReport report;
};

// Fixed affine scaling of the raw state into roughly unit range: positions to
// [-1, 1] over the service area, secrecy / 4, log1p(sinr) / 4.
Eigen::VectorXd observe(const MdpState& state, const ScenarioConfig& scenario);

class SecureUplinkEnv {
 public:
  SecureUplinkEnv(const EnvConfig& config, std::uint64_t seed);

  const EnvConfig& config() const { return config_; }
  const SecureUplinkSystem& system() const { return system_; }
  int state_dim() const { return 4 * config_.scenario.users + 1; }
  int action_dim() const { return system_.action_dim(); }
  int history() const { return config_.history; }
  int slot() const { return slot_; }
  bool done() const { return slot_ >= config_.slots_per_episode; }

  const MdpState& reset();
  StepResult step(const Eigen::VectorXd& action);
  StepResult step_decoded(const PhaseConfig& phases, const std::vector<double>& powers);

  const MdpState& state() const { return state_; }
  const std::vector<MuKinematics>& users() const { return users_; }
  const SecrecyReport& last_report() const { return report_; }
  const ChannelRealization& last_channels() const { return channels_; }
  // Scaled observations, one column per slot, oldest first. Before H slots
  // have elapsed the initial observation is repeated.
  Eigen::MatrixXd window() const;

  // One JSON object per step; nullptr disables tracing.
  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  MdpState assemble(const SecrecyReport& report) const;
  void push_observation();

  EnvConfig config_;
  SecureUplinkSystem system_;
  Rng mobility_rng_;
  Rng fading_rng_;
  std::vector<MuKinematics> users_;
  MdpState state_;
  SecrecyReport report_;
  ChannelRealization channels_;
  std::deque<Eigen::VectorXd> history_;
  int slot_ = 0;
  bool started_ = false;
  int episode_ = -1;
  std::ostream* trace_ = nullptr;
};

}  // namespace simsec
