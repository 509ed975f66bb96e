#pragma once

// Batched building blocks. A batch is a matrix with one column per sample;
// a sequence stacks T such blocks time-major (column t * B + b).

#include <string>

#include <Eigen/Dense>

#include "simsec/nn/parameter_store.hpp"
#include "simsec/types.hpp"

namespace simsec::nn {

struct Sequence {
  Eigen::MatrixXd data;
  int steps = 0;
  int batch = 0;

  Sequence() = default;
  Sequence(int features, int steps_, int batch_)
      : data(Eigen::MatrixXd::Zero(features, static_cast<Eigen::Index>(steps_) * batch_)),
        steps(steps_),
        batch(batch_) {}

  int features() const { return static_cast<int>(data.rows()); }
  auto step(int t) { return data.middleCols(static_cast<Eigen::Index>(t) * batch, batch); }
  auto step(int t) const { return data.middleCols(static_cast<Eigen::Index>(t) * batch, batch); }
  // features x steps slice of one sample.
  Eigen::MatrixXd sample(int b) const;
  void set_sample(int b, const Eigen::MatrixXd& x);
};

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x);

// U(-s, s) with s = scale / sqrt(fan_in).
void init_fan_in_uniform(Eigen::MatrixXd& w, int fan_in, double scale, Rng& rng);
// Orthonormal rows or columns (whichever is shorter) from a QR factorisation.
void init_orthogonal(Eigen::Ref<Eigen::MatrixXd> w, double gain, Rng& rng);

class Dense {
 public:
  Dense() = default;
  Dense(ParameterStore& store, const std::string& name, int in, int out, Rng& rng,
        double init_scale = 1.0);

  int in() const { return static_cast<int>(w_->value.cols()); }
  int out() const { return static_cast<int>(w_->value.rows()); }
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  // Accumulates dW, db and returns dL/dx.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) const;

  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

}  // namespace simsec::nn
