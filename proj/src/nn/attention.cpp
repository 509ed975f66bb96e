#include "simsec/nn/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec::nn {

namespace {

// Columns of one sample from a time-major block matrix.
Eigen::MatrixXd gather(const Eigen::MatrixXd& m, int rows_from, int rows, int b, int steps,
                       int batch) {
  Eigen::MatrixXd out(rows, steps);
  for (int t = 0; t < steps; ++t) {
    out.col(t) = m.block(rows_from, static_cast<Eigen::Index>(t) * batch + b, rows, 1);
  }
  return out;
}

void scatter(Eigen::MatrixXd& m, const Eigen::MatrixXd& x, int rows_from, int b, int batch) {
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    m.block(rows_from, t * batch + b, x.rows(), 1) = x.col(t);
  }
}

void softmax_rows(Eigen::MatrixXd& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp().matrix();
    s.row(r) /= s.row(r).sum();
  }
}

}  // namespace

MultiHeadSelfAttention::MultiHeadSelfAttention(ParameterStore& store, const std::string& prefix,
                                               int dim, int heads, Rng& rng)
    : dim_(dim), heads_(heads) {
  if (heads < 1 || dim % heads != 0) {
    throw std::invalid_argument("attention dim " + std::to_string(dim) +
                                " not divisible by heads " + std::to_string(heads));
  }
  q_ = Dense(store, prefix + ".q", dim, dim, rng);
  k_ = Dense(store, prefix + ".k", dim, dim, rng);
  v_ = Dense(store, prefix + ".v", dim, dim, rng);
  o_ = Dense(store, prefix + ".o", dim, dim, rng);
}

Sequence MultiHeadSelfAttention::forward(const Sequence& x, Cache* cache) const {
  if (x.features() != dim_) throw std::invalid_argument("attention input width mismatch");
  const int steps = x.steps;
  const int batch = x.batch;
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Eigen::MatrixXd q = q_.forward(x.data);
  Eigen::MatrixXd k = k_.forward(x.data);
  Eigen::MatrixXd v = v_.forward(x.data);
  Eigen::MatrixXd concat(dim_, x.data.cols());
  std::vector<Eigen::MatrixXd> weights;
  if (cache != nullptr) weights.reserve(static_cast<std::size_t>(batch) * heads_);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads_; ++h) {
      const Eigen::MatrixXd qh = gather(q, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd kh = gather(k, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd vh = gather(v, h * dh, dh, b, steps, batch);
      Eigen::MatrixXd a = scale * (qh.transpose() * kh);
      softmax_rows(a);
      scatter(concat, vh * a.transpose(), h * dh, b, batch);
      if (cache != nullptr) weights.push_back(std::move(a));
    }
  }
  Sequence y;
  y.steps = steps;
  y.batch = batch;
  y.data = o_.forward(concat) + x.data;
  if (cache != nullptr) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->concat = std::move(concat);
    cache->weights = std::move(weights);
  }
  return y;
}

Sequence MultiHeadSelfAttention::backward(const Cache& cache, const Sequence& dy) const {
  const int steps = dy.steps;
  const int batch = dy.batch;
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::MatrixXd dconcat = o_.backward(cache.concat, dy.data);
  Eigen::MatrixXd dq(dim_, dy.data.cols());
  Eigen::MatrixXd dk(dim_, dy.data.cols());
  Eigen::MatrixXd dv(dim_, dy.data.cols());
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads_; ++h) {
      const Eigen::MatrixXd& a = cache.weights[static_cast<std::size_t>(b) * heads_ + h];
      const Eigen::MatrixXd qh = gather(cache.q, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd kh = gather(cache.k, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd vh = gather(cache.v, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd dout = gather(dconcat, h * dh, dh, b, steps, batch);
      const Eigen::MatrixXd da = dout.transpose() * vh;
      const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
      const Eigen::MatrixXd ds = (a.array() * (da.colwise() - row_dot).array()).matrix();
      scatter(dv, dout * a, h * dh, b, batch);
      scatter(dq, scale * (kh * ds.transpose()), h * dh, b, batch);
      scatter(dk, scale * (qh * ds), h * dh, b, batch);
    }
  }
  Sequence dx;
  dx.steps = steps;
  dx.batch = batch;
  dx.data = dy.data;
  dx.data += q_.backward(cache.input.data, dq);
  dx.data += k_.backward(cache.input.data, dk);
  dx.data += v_.backward(cache.input.data, dv);
  return dx;
}

}  // namespace simsec::nn
