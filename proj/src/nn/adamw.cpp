#include "simsec/nn/adamw.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec::nn {

AdamW::AdamW(ParameterStore& store, const AdamWConfig& config) : store_(store), config_(config) {
  if (config.learning_rate < 0.0 || config.weight_decay < 0.0 || !(config.epsilon > 0.0) ||
      config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
    throw std::invalid_argument("invalid AdamW hyper-parameters");
  }
  for (const Parameter& p : store_.entries()) {
    m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
}

void AdamW::step() {
  if (m_.size() != store_.size()) throw std::logic_error("parameters added after optimizer creation");
  ++t_;
  const double lr = config_.learning_rate;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  std::size_t i = 0;
  for (Parameter& p : store_.entries()) {
    Eigen::MatrixXd& m = m_[i];
    Eigen::MatrixXd& v = v_[i];
    ++i;
    if (p.decay) p.value -= (lr * config_.weight_decay) * p.value;
    m = b1 * m + (1.0 - b1) * p.grad;
    v = b2 * v + (1.0 - b2) * p.grad.cwiseAbs2();
    const Eigen::ArrayXXd m_hat = m.array() / c1;
    const Eigen::ArrayXXd v_hat = v.array() / c2;
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + config_.epsilon);
  }
}

}  // namespace simsec::nn
