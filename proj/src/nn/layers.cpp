#include "simsec/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec::nn {

Eigen::MatrixXd Sequence::sample(int b) const {
  Eigen::MatrixXd out(data.rows(), steps);
  for (int t = 0; t < steps; ++t) out.col(t) = data.col(static_cast<Eigen::Index>(t) * batch + b);
  return out;
}

void Sequence::set_sample(int b, const Eigen::MatrixXd& x) {
  for (int t = 0; t < steps; ++t) data.col(static_cast<Eigen::Index>(t) * batch + b) = x.col(t);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

void init_fan_in_uniform(Eigen::MatrixXd& w, int fan_in, double scale, Rng& rng) {
  const double s = scale / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -s, s);
}

void init_orthogonal(Eigen::Ref<Eigen::MatrixXd> w, double gain, Rng& rng) {
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  const Eigen::Index big = std::max(rows, cols);
  const Eigen::Index small = std::min(rows, cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(big, small);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Sign fix makes the draw uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (rows >= cols) {
    w = gain * q;
  } else {
    w = gain * q.transpose();
  }
}

Dense::Dense(ParameterStore& store, const std::string& name, int in, int out, Rng& rng,
             double init_scale) {
  w_ = &store.add(name + ".w", out, in, true);
  b_ = &store.add(name + ".b", out, 1, false);
  init_fan_in_uniform(w_->value, in, init_scale, rng);
}

Eigen::MatrixXd Dense::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != w_->value.cols()) {
    throw std::invalid_argument(w_->name + ": input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(w_->value.cols()));
  }
  Eigen::MatrixXd y = w_->value * x;
  y.colwise() += b_->value.col(0);
  return y;
}

Eigen::MatrixXd Dense::backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) const {
  w_->grad.noalias() += dy * x.transpose();
  b_->grad += dy.rowwise().sum();
  return w_->value.transpose() * dy;
}

}  // namespace simsec::nn
