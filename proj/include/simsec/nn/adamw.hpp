#pragma once

// Adam with decoupled weight decay. Decay applies only to parameters flagged
// `decay` (weights), never to biases or the log-std vector.

#include <vector>

#include "simsec/nn/parameter_store.hpp"

namespace simsec::nn {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW(ParameterStore& store, const AdamWConfig& config);

  void step();
  long steps() const { return t_; }
  const AdamWConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  ParameterStore& store_;
  AdamWConfig config_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  long t_ = 0;
};

}  // namespace simsec::nn
