#pragma once

// Combined actor-critic objective on one mixed batch:
//   L = -mean(min(r A, clip(r, l, h) A)) + beta_b * mean((V - target)^2)
// with r = pi / mu and (l, h) = (pi_old / mu)(1 -+ eps). Fresh on-policy
// samples carry mu = pi_old, which is the ordinary clipped objective.

#include <vector>

#include "simsec/nn/actor_critic.hpp"

namespace simsec::ppo {

struct UpdateBatch {
  nn::Sequence windows;              // obs_dim x (H * B), time-major
  Eigen::MatrixXd actions;           // action_dim x B, raw draws
  std::vector<double> log_behavior;  // log mu(a | s)
  std::vector<double> log_old;       // log pi_old(a | s) at the start of the round
  std::vector<double> advantages;
  std::vector<double> targets;       // critic regression targets

  int size() const { return static_cast<int>(log_old.size()); }
  void validate(const nn::NetworkConfig& net) const;
};

struct UpdateLoss {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double approx_kl = 0.0;  // mean(log pi_old - log pi) at the evaluated parameters
  double clip_fraction = 0.0;
};

// Evaluates the loss at the current parameters. With `accumulate` the
// gradient is added to the parameter store (callers zero it first).
UpdateLoss evaluate_update(nn::ActorCritic& net, const UpdateBatch& batch, double clip_eps,
                           double value_coef, bool accumulate);

}  // namespace simsec::ppo
