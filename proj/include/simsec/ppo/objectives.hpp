#pragma once

// Scalar building blocks of the PPO-BOP update: advantage estimation, clipped
// surrogates (on- and off-policy), the behaviour KL estimate with its adaptive
// mixing coefficient, policy-weighted (PBE) returns and the critic loss.
//
// Surrogate losses return the loss together with its derivative with respect
// to each sample's log pi, which the trainer chains into the policy head.

#include <cstdint>
#include <vector>

namespace simsec::ppo {

struct AdvantageBatch {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t), A_t = sum (gamma lambda)^i delta_{t+i}.
// `values` holds V(s_t); `next_value` is V(s_T) after the last step. A done
// flag also cuts the lambda accumulation. Throws on empty or mismatched input.
AdvantageBatch gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                              const std::vector<std::uint8_t>& dones, double next_value,
                              double gamma, double lambda);

// Zero mean, unit variance (population). A single element becomes 0.
void normalize(std::vector<double>& values);

// min(r A, clip(r, lo, hi) A) for one sample.
double clipped_surrogate(double ratio, double advantage, double lo, double hi);
// d/d(log pi) of the surrogate above (r = exp(log pi - log ref)).
double clipped_surrogate_grad(double ratio, double advantage, double lo, double hi);

struct SurrogateLoss {
  double loss = 0.0;
  std::vector<double> d_log_pi;  // dloss / dlog pi per sample
  double clip_fraction = 0.0;
};

// -mean(min(rho A, clip(rho, 1 - eps, 1 + eps) A)), rho = pi / pi_old.
SurrogateLoss clipped_policy_loss(const std::vector<double>& log_pi,
                                  const std::vector<double>& log_old,
                                  const std::vector<double>& advantages, double eps);

// Off-policy variant: r = pi / mu, bounds (pi_old / mu)(1 -+ eps).
SurrogateLoss opdu_loss(const std::vector<double>& log_pi, const std::vector<double>& log_old,
                        const std::vector<double>& log_mu, const std::vector<double>& advantages,
                        double eps);

// mean(log mu - log pi) over samples drawn from mu.
double kl_estimate(const std::vector<double>& log_mu, const std::vector<double>& log_pi);

double adapt_alpha(double alpha, double kl, double kl_threshold, double alpha_min);

// min(1, pi)^weighting computed from a log density.
double pbe_step_weight(double log_density, double weighting);

// R(t) = sum_{c >= t} discount^{c-t} r(c) prod_{v=t}^{c} w(v) over one
// trajectory. Throws on empty or mismatched input.
std::vector<double> pbe_return(const std::vector<double>& rewards,
                               const std::vector<double>& weights, double discount);

// r + gamma E_{a'}[Q(s', a')] with Q evaluated at sampled next actions.
double pbe_q_backup(double reward, const std::vector<double>& q_next, double gamma, bool terminal);
// Same expectation with explicit action probabilities.
double pbe_q_backup(double reward, const std::vector<double>& probabilities,
                    const std::vector<double>& q_next, double gamma, bool terminal);

// Plain discounted return-to-go of one trajectory.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

struct CriticLoss {
  double loss = 0.0;
  std::vector<double> d_value;
};

// mean((V - target)^2).
CriticLoss critic_loss(const std::vector<double>& values, const std::vector<double>& targets);

}  // namespace simsec::ppo
