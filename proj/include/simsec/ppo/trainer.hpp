#pragma once

// PPO-BOP training loop.
//
// Each episode is a rollout of the stochastic policy over a fresh environment
// episode; every transition enters the replay buffer. After the warm-up
// episodes, an update round runs every `update_interval` episodes (at most
// `evolution_rounds` of them) once the buffer holds a full batch:
//   1. evaluate pi_old on the fresh rollout and on ceil(alpha b) prioritised
//      replay samples; adapt alpha from D_KL(mu || pi_old),
//   2. critic targets: policy-weighted returns (PF) or discounted returns,
//      advantages: GAE on fresh episodes, one-step TD on replay samples,
//   3. up to E full-batch AdamW steps on the combined loss, stopping early once
//      the mean KL(pi_old || pi) exceeds the target.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simsec/environment.hpp"
#include "simsec/nn/actor_critic.hpp"
#include "simsec/nn/adamw.hpp"
#include "simsec/ppo/replay_buffer.hpp"
#include "simsec/ppo/update.hpp"

namespace simsec::ppo {

struct TrainerConfig {
  int episodes = 2000;
  int warmup_episodes = 50;
  int evolution_rounds = 500;
  int update_interval = 0;  // 0: spread the rounds evenly over the post-warm-up episodes
  int batch_size = 128;
  int update_epochs = 10;
  double clip = 0.3;
  double discount = 0.98;
  double gae_lambda = 0.95;
  double target_kl = 0.02;
  double kl_threshold = 0.5;
  double alpha_min = 0.05;
  double alpha_init = 0.5;
  double clipped_discount = 0.7;
  double probability_weighting = 0.7;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  ReplayConfig replay;
  bool use_opdu = true;
  bool use_pf = true;
  int checkpoint_every = 100;
  int eval_episodes = 20;
  std::uint64_t seed = 1;

  void validate() const;
  int effective_update_interval() const;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RoundStats {
  bool ran = false;
  int epochs = 0;
  int online = 0;
  int offline = 0;
  double kl_behavior = 0.0;  // D_KL(mu || pi_old) on the replay part
  double kl_update = 0.0;    // final KL(pi_old || pi)
  double alpha = 0.0;
  UpdateLoss first;
  UpdateLoss last;
};

struct EpisodeRecord {
  int episode = 0;
  double mean_reward = 0.0;
  double mean_asr = 0.0;  // time average of the sum secrecy rate
  std::vector<double> user_asr;
  RoundStats round;
  double wall_time = 0.0;
};

struct EvaluationResult {
  int episodes = 0;
  double mean_asr = 0.0;
  double std_asr = 0.0;
  double mean_reward = 0.0;  // mean episode return
  std::vector<double> episode_asr;
};

using ActionPolicy = std::function<Eigen::VectorXd(const SecureUplinkEnv&)>;
using EnvFactory = std::function<std::unique_ptr<SecureUplinkEnv>(std::uint64_t seed)>;

EnvFactory default_env_factory(const EnvConfig& config);

// Runs `episodes` consecutive episodes of one environment seeded with `seed`
// applying `policy` at every slot.
EvaluationResult evaluate_actions(SecureUplinkEnv& env, int episodes, const ActionPolicy& policy);

// Greedy policy: clipped mean action.
ActionPolicy greedy_policy(const nn::ActorCritic& net);

// Network dimensions implied by the environment.
nn::NetworkConfig network_for(const EnvConfig& env, nn::NetworkConfig base);

class Trainer {
 public:
  Trainer(const EnvFactory& factory, const nn::NetworkConfig& net, const TrainerConfig& config);

  const TrainerConfig& config() const { return config_; }
  nn::ActorCritic& network() { return *net_; }
  const nn::ActorCritic& network() const { return *net_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  SecureUplinkEnv& env() { return *env_; }
  double alpha() const { return alpha_; }
  int episodes_done() const { return episode_; }
  int rounds_done() const { return rounds_; }

  // JSON-lines metric log, one record per episode.
  void set_log(std::ostream* log) { log_ = log; }
  // Checkpoints every `checkpoint_every` episodes into this directory.
  void set_checkpoint_dir(std::string dir) { checkpoint_dir_ = std::move(dir); }

  EpisodeRecord run_episode();
  std::vector<EpisodeRecord> train();
  EvaluationResult evaluate(int episodes, std::uint64_t seed) const;

  // One update round on the given fresh episodes (exposed for tests).
  RoundStats update_round(const std::vector<std::vector<Transition>>& fresh);
  // The mixed batch a round would optimise, built from the current parameters.
  UpdateBatch build_batch(const std::vector<std::vector<Transition>>& fresh, RoundStats& stats);

 private:
  std::vector<double> log_densities(const std::vector<const Transition*>& items,
                                    std::vector<double>* values, bool next_values) const;

  TrainerConfig config_;
  EnvFactory factory_;
  std::unique_ptr<SecureUplinkEnv> env_;
  std::unique_ptr<nn::ActorCritic> net_;
  nn::AdamW optimizer_;
  ReplayBuffer buffer_;
  Rng policy_rng_;
  Rng batch_rng_;
  double alpha_;
  int episode_ = 0;
  int rounds_ = 0;
  std::vector<std::vector<Transition>> fresh_;
  std::ostream* log_ = nullptr;
  std::string checkpoint_dir_;
};

std::string to_json_line(const EpisodeRecord& record);

}  // namespace simsec::ppo
