#include "simsec/ppo/update.hpp"

#include <stdexcept>

#include "simsec/ppo/objectives.hpp"

namespace simsec::ppo {

void UpdateBatch::validate(const nn::NetworkConfig& net) const {
  const int b = size();
  if (b < 1) throw std::invalid_argument("empty update batch");
  if (windows.batch != b || windows.steps != net.history || windows.features() != net.obs_dim) {
    throw std::invalid_argument("update batch windows do not match the network");
  }
  if (actions.cols() != b || actions.rows() != net.action_dim) {
    throw std::invalid_argument("update batch actions do not match the network");
  }
  const auto n = static_cast<std::size_t>(b);
  if (log_behavior.size() != n || advantages.size() != n || targets.size() != n) {
    throw std::invalid_argument("update batch fields differ in length");
  }
}

UpdateLoss evaluate_update(nn::ActorCritic& net, const UpdateBatch& batch, double clip_eps,
                           double value_coef, bool accumulate) {
  batch.validate(net.config());
  nn::ActorCritic::Cache cache;
  const nn::ActorCritic::Output out = net.forward(batch.windows, accumulate ? &cache : nullptr);
  const Eigen::VectorXd log_std = net.log_std();
  const Eigen::RowVectorXd lp = nn::gaussian_log_density(batch.actions, out.mean, log_std);
  std::vector<double> log_pi(lp.data(), lp.data() + lp.size());
  std::vector<double> values(out.value.data(), out.value.data() + out.value.size());

  const SurrogateLoss surrogate =
      opdu_loss(log_pi, batch.log_old, batch.log_behavior, batch.advantages, clip_eps);
  const CriticLoss critic = critic_loss(values, batch.targets);

  UpdateLoss loss;
  loss.policy = surrogate.loss;
  loss.value = critic.loss;
  loss.total = surrogate.loss + value_coef * critic.loss;
  loss.approx_kl = kl_estimate(batch.log_old, log_pi);
  loss.clip_fraction = surrogate.clip_fraction;
  if (!accumulate) return loss;

  const Eigen::Map<const Eigen::RowVectorXd> w(surrogate.d_log_pi.data(),
                                               static_cast<Eigen::Index>(surrogate.d_log_pi.size()));
  Eigen::MatrixXd d_mean;
  Eigen::VectorXd d_log_std;
  nn::gaussian_log_density_grad(batch.actions, out.mean, log_std, w, d_mean, d_log_std);
  Eigen::RowVectorXd d_value(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    d_value(static_cast<Eigen::Index>(i)) = value_coef * critic.d_value[i];
  }
  net.backward(cache, out, d_mean, d_value);
  net.log_std_param().grad.col(0) += d_log_std;
  return loss;
}

}  // namespace simsec::ppo
