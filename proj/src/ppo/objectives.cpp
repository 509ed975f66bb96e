#include "simsec/ppo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace simsec::ppo {

namespace {

void check_sizes(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) throw std::invalid_argument(std::string(what) + " length mismatch");
}

}  // namespace

AdvantageBatch gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                              const std::vector<std::uint8_t>& dones, double next_value,
                              double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (n == 0) throw std::invalid_argument("empty trajectory");
  check_sizes(n, values.size(), "values");
  check_sizes(n, dones.size(), "dones");
  AdvantageBatch out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double v_next = i + 1 < n ? values[i + 1] : next_value;
    const double live = dones[i] != 0 ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * v_next * live - values[i];
    running = delta + gamma * lambda * live * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

void normalize(std::vector<double>& values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : values) v = sd > 1e-12 ? (v - mean) / sd : 0.0;
}

double clipped_surrogate(double ratio, double advantage, double lo, double hi) {
  return std::min(ratio * advantage, std::clamp(ratio, lo, hi) * advantage);
}

double clipped_surrogate_grad(double ratio, double advantage, double lo, double hi) {
  // The clipped branch is constant in ratio; it is the minimum exactly when
  // the ratio has left the band on the side that would favour the update.
  const bool clipped = (advantage >= 0.0 && ratio > hi) || (advantage < 0.0 && ratio < lo);
  return clipped ? 0.0 : ratio * advantage;
}

SurrogateLoss opdu_loss(const std::vector<double>& log_pi, const std::vector<double>& log_old,
                        const std::vector<double>& log_mu, const std::vector<double>& advantages,
                        double eps) {
  const std::size_t n = log_pi.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  check_sizes(n, log_old.size(), "log_old");
  check_sizes(n, log_mu.size(), "log_mu");
  check_sizes(n, advantages.size(), "advantages");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("clip epsilon must lie in (0, 1)");
  SurrogateLoss out;
  out.d_log_pi.assign(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  int clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = std::exp(log_pi[i] - log_mu[i]);
    const double anchor = std::exp(log_old[i] - log_mu[i]);
    const double lo = anchor * (1.0 - eps);
    const double hi = anchor * (1.0 + eps);
    out.loss -= clipped_surrogate(ratio, advantages[i], lo, hi) * inv_n;
    out.d_log_pi[i] = -clipped_surrogate_grad(ratio, advantages[i], lo, hi) * inv_n;
    if (ratio < lo || ratio > hi) ++clipped;
  }
  out.clip_fraction = clipped * inv_n;
  return out;
}

SurrogateLoss clipped_policy_loss(const std::vector<double>& log_pi,
                                  const std::vector<double>& log_old,
                                  const std::vector<double>& advantages, double eps) {
  return opdu_loss(log_pi, log_old, log_old, advantages, eps);
}

double kl_estimate(const std::vector<double>& log_mu, const std::vector<double>& log_pi) {
  if (log_mu.empty()) throw std::invalid_argument("empty batch");
  check_sizes(log_mu.size(), log_pi.size(), "log_pi");
  double sum = 0.0;
  for (std::size_t i = 0; i < log_mu.size(); ++i) sum += log_mu[i] - log_pi[i];
  return sum / static_cast<double>(log_mu.size());
}

double adapt_alpha(double alpha, double kl, double kl_threshold, double alpha_min) {
  if (kl > kl_threshold) return std::max(alpha_min, alpha * kl_threshold / kl);
  return std::min(1.0, alpha * 1.05);
}

double pbe_step_weight(double log_density, double weighting) {
  return std::exp(weighting * std::min(0.0, log_density));
}

std::vector<double> pbe_return(const std::vector<double>& rewards,
                               const std::vector<double>& weights, double discount) {
  const std::size_t n = rewards.size();
  if (n == 0) throw std::invalid_argument("empty trajectory");
  check_sizes(n, weights.size(), "weights");
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double product = 1.0;
    double scale = 1.0;
    double total = 0.0;
    for (std::size_t c = t; c < n; ++c) {
      product *= weights[c];
      total += scale * rewards[c] * product;
      scale *= discount;
    }
    out[t] = total;
  }
  return out;
}

double pbe_q_backup(double reward, const std::vector<double>& q_next, double gamma, bool terminal) {
  if (terminal) return reward;
  if (q_next.empty()) throw std::invalid_argument("no next-action samples");
  const double mean =
      std::accumulate(q_next.begin(), q_next.end(), 0.0) / static_cast<double>(q_next.size());
  return reward + gamma * mean;
}

double pbe_q_backup(double reward, const std::vector<double>& probabilities,
                    const std::vector<double>& q_next, double gamma, bool terminal) {
  if (terminal) return reward;
  check_sizes(probabilities.size(), q_next.size(), "q_next");
  double expectation = 0.0;
  for (std::size_t i = 0; i < q_next.size(); ++i) expectation += probabilities[i] * q_next[i];
  return reward + gamma * expectation;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty()) throw std::invalid_argument("empty trajectory");
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + gamma * running;
    out[i] = running;
  }
  return out;
}

CriticLoss critic_loss(const std::vector<double>& values, const std::vector<double>& targets) {
  if (values.empty()) throw std::invalid_argument("empty batch");
  check_sizes(values.size(), targets.size(), "targets");
  CriticLoss out;
  out.d_value.resize(values.size());
  const double inv_n = 1.0 / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = values[i] - targets[i];
    out.loss += e * e * inv_n;
    out.d_value[i] = 2.0 * e * inv_n;
  }
  return out;
}

}  // namespace simsec::ppo
