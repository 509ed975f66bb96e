#pragma once

// Diagonal Gaussian policy with tanh-squashed mean and a state-independent
// log standard deviation, plus a scalar value head.

#include <string>

#include "simsec/nn/layers.hpp"

namespace simsec::nn {

double gaussian_log_density(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& log_std);
// One value per column.
Eigen::RowVectorXd gaussian_log_density(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& means,
                                        const Eigen::VectorXd& log_std);

// Gradient of sum_b weight_b * log N(a_b; mean_b, exp(log_std)).
void gaussian_log_density_grad(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& means,
                               const Eigen::VectorXd& log_std, const Eigen::RowVectorXd& weight,
                               Eigen::MatrixXd& d_mean, Eigen::VectorXd& d_log_std);

struct PolicySample {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd raw;      // pre-clip draw; log_density refers to this
  Eigen::VectorXd clipped;  // in [-1, 1], sent to the environment
  double log_density = 0.0;
};

PolicySample sample_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng);

class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(ParameterStore& store, const std::string& prefix, int in, int action_dim, Rng& rng,
               double init_log_std, double mean_init_scale);

  int action_dim() const { return mean_.out(); }
  // tanh(W f + b), one column per sample.
  Eigen::MatrixXd mean(const Eigen::MatrixXd& feature) const;
  Eigen::VectorXd log_std() const { return log_std_->value.col(0); }
  Parameter& log_std_param() const { return *log_std_; }
  // mean_out is the forward result for `feature`; returns dL/dfeature.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& feature, const Eigen::MatrixXd& mean_out,
                           const Eigen::MatrixXd& d_mean) const;
  PolicySample act(const Eigen::VectorXd& feature, Rng& rng) const;

 private:
  Dense mean_;
  Parameter* log_std_ = nullptr;
};

class ValueHead {
 public:
  ValueHead() = default;
  ValueHead(ParameterStore& store, const std::string& prefix, int in, Rng& rng);

  Eigen::RowVectorXd forward(const Eigen::MatrixXd& feature) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& feature, const Eigen::RowVectorXd& d_value) const;
  const Dense& dense() const { return dense_; }

 private:
  Dense dense_;
};

}  // namespace simsec::nn
