#include "simsec/nn/lstm.hpp"

#include <stdexcept>

namespace simsec::nn {

LstmParams make_lstm_params(ParameterStore& store, const std::string& prefix, int input,
                            int hidden, Rng& rng) {
  LstmParams p;
  p.input = input;
  p.hidden = hidden;
  Parameter** weights[] = {&p.w_f, &p.w_i, &p.w_c, &p.w_o};
  Parameter** biases[] = {&p.b_f, &p.b_i, &p.b_c, &p.b_o};
  const char* gates[] = {"f", "i", "c", "o"};
  for (int g = 0; g < 4; ++g) {
    Parameter& w = store.add(prefix + ".w_" + gates[g], hidden, hidden + input, true);
    init_orthogonal(w.value.leftCols(hidden), 1.0, rng);
    Eigen::MatrixXd in_block(hidden, input);
    init_fan_in_uniform(in_block, input, 1.0, rng);
    w.value.rightCols(input) = in_block;
    *weights[g] = &w;
    *biases[g] = &store.add(prefix + ".b_" + gates[g], hidden, 1, false);
  }
  return p;
}

namespace {

Eigen::MatrixXd affine(const Parameter* w, const Parameter* b, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd a = w->value * z;
  a.colwise() += b->value.col(0);
  return a;
}

}  // namespace

void lstm_cell_forward(const LstmParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                       const Eigen::MatrixXd& c_prev, Eigen::MatrixXd& h, Eigen::MatrixXd& c,
                       LstmStepCache* cache) {
  if (x.rows() != p.input || h_prev.rows() != p.hidden || c_prev.rows() != p.hidden ||
      h_prev.cols() != x.cols() || c_prev.cols() != x.cols()) {
    throw std::invalid_argument("LSTM cell shape mismatch");
  }
  Eigen::MatrixXd z(p.hidden + p.input, x.cols());
  z.topRows(p.hidden) = h_prev;
  z.bottomRows(p.input) = x;
  Eigen::MatrixXd f = sigmoid(affine(p.w_f, p.b_f, z));
  Eigen::MatrixXd i = sigmoid(affine(p.w_i, p.b_i, z));
  Eigen::MatrixXd g = affine(p.w_c, p.b_c, z).array().tanh().matrix();
  Eigen::MatrixXd o = sigmoid(affine(p.w_o, p.b_o, z));
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  Eigen::MatrixXd tanh_c = c.array().tanh().matrix();
  h = o.cwiseProduct(tanh_c);
  if (cache != nullptr) {
    cache->z = std::move(z);
    cache->f = std::move(f);
    cache->i = std::move(i);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c_prev = c_prev;
    cache->tanh_c = std::move(tanh_c);
  }
}

void lstm_cell_backward(const LstmParams& p, const LstmStepCache& k, const Eigen::MatrixXd& dh,
                        const Eigen::MatrixXd& dc_in, Eigen::MatrixXd& dx, Eigen::MatrixXd& dh_prev,
                        Eigen::MatrixXd& dc_prev) {
  const Eigen::ArrayXXd o = k.o.array();
  const Eigen::ArrayXXd tc = k.tanh_c.array();
  const Eigen::ArrayXXd dc = dc_in.array() + dh.array() * o * (1.0 - tc * tc);
  const Eigen::MatrixXd da_o = (dh.array() * tc * o * (1.0 - o)).matrix();
  const Eigen::MatrixXd da_f =
      (dc * k.c_prev.array() * k.f.array() * (1.0 - k.f.array())).matrix();
  const Eigen::MatrixXd da_i = (dc * k.g.array() * k.i.array() * (1.0 - k.i.array())).matrix();
  const Eigen::MatrixXd da_g = (dc * k.i.array() * (1.0 - k.g.array().square())).matrix();
  dc_prev = (dc * k.f.array()).matrix();

  Parameter* weights[] = {p.w_f, p.w_i, p.w_c, p.w_o};
  Parameter* biases[] = {p.b_f, p.b_i, p.b_c, p.b_o};
  const Eigen::MatrixXd* deltas[] = {&da_f, &da_i, &da_g, &da_o};
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(p.hidden + p.input, dh.cols());
  for (int g = 0; g < 4; ++g) {
    weights[g]->grad.noalias() += *deltas[g] * k.z.transpose();
    biases[g]->grad += deltas[g]->rowwise().sum();
    dz.noalias() += weights[g]->value.transpose() * *deltas[g];
  }
  dh_prev = dz.topRows(p.hidden);
  dx = dz.bottomRows(p.input);
}

Sequence lstm_run(const LstmParams& p, const Sequence& x, bool reverse, LstmRunCache* cache) {
  Sequence h(p.hidden, x.steps, x.batch);
  Eigen::MatrixXd h_t = Eigen::MatrixXd::Zero(p.hidden, x.batch);
  Eigen::MatrixXd c_t = Eigen::MatrixXd::Zero(p.hidden, x.batch);
  if (cache != nullptr) cache->steps.assign(static_cast<std::size_t>(x.steps), LstmStepCache{});
  for (int s = 0; s < x.steps; ++s) {
    const int t = reverse ? x.steps - 1 - s : s;
    Eigen::MatrixXd h_next;
    Eigen::MatrixXd c_next;
    lstm_cell_forward(p, x.step(t), h_t, c_t, h_next, c_next,
                      cache != nullptr ? &cache->steps[static_cast<std::size_t>(t)] : nullptr);
    h.step(t) = h_next;
    h_t = std::move(h_next);
    c_t = std::move(c_next);
  }
  return h;
}

Sequence lstm_run_backward(const LstmParams& p, const LstmRunCache& cache, const Sequence& dh,
                           bool reverse) {
  Sequence dx(p.input, dh.steps, dh.batch);
  Eigen::MatrixXd dh_carry = Eigen::MatrixXd::Zero(p.hidden, dh.batch);
  Eigen::MatrixXd dc_carry = Eigen::MatrixXd::Zero(p.hidden, dh.batch);
  for (int s = dh.steps - 1; s >= 0; --s) {
    const int t = reverse ? dh.steps - 1 - s : s;
    const Eigen::MatrixXd dh_t = dh.step(t) + dh_carry;
    Eigen::MatrixXd dx_t;
    Eigen::MatrixXd dh_prev;
    Eigen::MatrixXd dc_prev;
    lstm_cell_backward(p, cache.steps[static_cast<std::size_t>(t)], dh_t, dc_carry, dx_t, dh_prev,
                       dc_prev);
    dx.step(t) = dx_t;
    dh_carry = std::move(dh_prev);
    dc_carry = std::move(dc_prev);
  }
  return dx;
}

BiLstmStack::BiLstmStack(ParameterStore& store, const std::string& prefix, int input, int hidden,
                         int layers, Rng& rng)
    : hidden_(hidden) {
  if (layers < 1) throw std::invalid_argument("Bi-LSTM needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? input : hidden;
    const std::string name = prefix + ".l" + std::to_string(l);
    forward_.push_back(make_lstm_params(store, name + ".fwd", in, hidden, rng));
    backward_.push_back(make_lstm_params(store, name + ".bwd", in, hidden, rng));
  }
}

Sequence BiLstmStack::forward(const Sequence& x, Cache* cache) const {
  if (x.steps < 1) throw std::invalid_argument("Bi-LSTM needs at least one step");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->forward.assign(forward_.size(), LstmRunCache{});
    cache->backward.assign(backward_.size(), LstmRunCache{});
  }
  Sequence cur = x;
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    if (cache != nullptr) cache->inputs.push_back(cur);
    Sequence hf = lstm_run(forward_[l], cur, false, cache != nullptr ? &cache->forward[l] : nullptr);
    Sequence hb = lstm_run(backward_[l], cur, true, cache != nullptr ? &cache->backward[l] : nullptr);
    hf.data += hb.data;
    cur = std::move(hf);
  }
  return cur;
}

Sequence BiLstmStack::backward(const Cache& cache, const Sequence& dy) const {
  Sequence grad = dy;
  for (int l = layers() - 1; l >= 0; --l) {
    const std::size_t i = static_cast<std::size_t>(l);
    Sequence dxf = lstm_run_backward(forward_[i], cache.forward[i], grad, false);
    Sequence dxb = lstm_run_backward(backward_[i], cache.backward[i], grad, true);
    dxf.data += dxb.data;
    grad = std::move(dxf);
  }
  return grad;
}

}  // namespace simsec::nn
