#include "simsec/nn/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec::nn {

namespace {
constexpr double kHalfLogTwoPi = 0.91893853320467274178;
}  // namespace

double gaussian_log_density(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& log_std) {
  if (action.size() != mean.size() || mean.size() != log_std.size()) {
    throw std::invalid_argument("Gaussian density dimension mismatch");
  }
  const Eigen::ArrayXd z = (action - mean).array() * (-log_std.array()).exp();
  return -0.5 * z.square().sum() - log_std.sum() - kHalfLogTwoPi * static_cast<double>(mean.size());
}

Eigen::RowVectorXd gaussian_log_density(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& means,
                                        const Eigen::VectorXd& log_std) {
  if (actions.rows() != means.rows() || actions.cols() != means.cols() ||
      means.rows() != log_std.size()) {
    throw std::invalid_argument("Gaussian density dimension mismatch");
  }
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const Eigen::ArrayXXd z = (actions - means).array().colwise() * inv_std;
  const double constant = -log_std.sum() - kHalfLogTwoPi * static_cast<double>(means.rows());
  return (-0.5 * z.square().colwise().sum() + constant).matrix();
}

void gaussian_log_density_grad(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& means,
                               const Eigen::VectorXd& log_std, const Eigen::RowVectorXd& weight,
                               Eigen::MatrixXd& d_mean, Eigen::VectorXd& d_log_std) {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const Eigen::ArrayXXd diff = (actions - means).array();
  d_mean = ((diff.colwise() * inv_var).rowwise() * weight.array()).matrix();
  const Eigen::ArrayXXd sq = diff.square().colwise() * inv_var - 1.0;
  d_log_std = (sq.rowwise() * weight.array()).rowwise().sum().matrix();
}

PolicySample sample_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  PolicySample s;
  s.mean = mean;
  s.std = log_std.array().exp().matrix();
  s.raw.resize(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) s.raw(i) = mean(i) + s.std(i) * gauss(rng);
  s.clipped = s.raw.cwiseMax(-1.0).cwiseMin(1.0);
  s.log_density = gaussian_log_density(s.raw, mean, log_std);
  return s;
}

GaussianHead::GaussianHead(ParameterStore& store, const std::string& prefix, int in,
                           int action_dim, Rng& rng, double init_log_std, double mean_init_scale)
    : mean_(store, prefix + ".mean", in, action_dim, rng, mean_init_scale) {
  log_std_ = &store.add(prefix + ".log_std", action_dim, 1, false);
  log_std_->value.setConstant(init_log_std);
}

Eigen::MatrixXd GaussianHead::mean(const Eigen::MatrixXd& feature) const {
  return mean_.forward(feature).array().tanh().matrix();
}

Eigen::MatrixXd GaussianHead::backward(const Eigen::MatrixXd& feature,
                                       const Eigen::MatrixXd& mean_out,
                                       const Eigen::MatrixXd& d_mean) const {
  const Eigen::MatrixXd d_pre = (d_mean.array() * (1.0 - mean_out.array().square())).matrix();
  return mean_.backward(feature, d_pre);
}

PolicySample GaussianHead::act(const Eigen::VectorXd& feature, Rng& rng) const {
  const Eigen::VectorXd mu = mean(feature).col(0);
  return sample_gaussian(mu, log_std(), rng);
}

ValueHead::ValueHead(ParameterStore& store, const std::string& prefix, int in, Rng& rng)
    : dense_(store, prefix, in, 1, rng) {}

Eigen::RowVectorXd ValueHead::forward(const Eigen::MatrixXd& feature) const {
  return dense_.forward(feature).row(0);
}

Eigen::MatrixXd ValueHead::backward(const Eigen::MatrixXd& feature,
                                    const Eigen::RowVectorXd& d_value) const {
  return dense_.backward(feature, d_value);
}

}  // namespace simsec::nn
