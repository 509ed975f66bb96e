#include "simsec/nn/actor_critic.hpp"

#include <stdexcept>
#include <string>

namespace simsec::nn {

void NetworkConfig::validate() const {
  if (obs_dim < 1 || action_dim < 1 || history < 1 || hidden < 1 || lstm_layers < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  if (use_bilstm && use_mhsa && (heads < 1 || hidden % heads != 0)) {
    throw std::invalid_argument("hidden width " + std::to_string(hidden) +
                                " not divisible by attention heads " + std::to_string(heads));
  }
}

ActorCritic::ActorCritic(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng = make_stream(seed, 17);
  const int h = config_.hidden;
  if (config_.use_bilstm) {
    lstm_ = BiLstmStack(store_, "encoder.bilstm", config_.obs_dim, h, config_.lstm_layers, rng);
    if (config_.use_mhsa) attention_ = MultiHeadSelfAttention(store_, "encoder.mhsa", h, config_.heads, rng);
    residual_ = Dense(store_, "encoder.residual", config_.obs_dim, h, rng);
  } else {
    flat_ = Dense(store_, "encoder.flat", config_.obs_dim * config_.history, h, rng);
  }
  actor_trunk_ = Dense(store_, "actor.trunk", h, h, rng);
  head_ = GaussianHead(store_, "actor.head", h, config_.action_dim, rng, config_.init_log_std,
                       config_.mean_init_scale);
  critic_trunk_ = Dense(store_, "critic.trunk", h, h, rng);
  value_ = ValueHead(store_, "critic.value", h, rng);
}

Sequence ActorCritic::pack(const std::vector<const Eigen::MatrixXd*>& windows) {
  if (windows.empty()) throw std::invalid_argument("empty batch");
  const int obs = static_cast<int>(windows.front()->rows());
  const int steps = static_cast<int>(windows.front()->cols());
  Sequence s(obs, steps, static_cast<int>(windows.size()));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b]->rows() != obs || windows[b]->cols() != steps) {
      throw std::invalid_argument("windows differ in shape");
    }
    s.set_sample(static_cast<int>(b), *windows[b]);
  }
  return s;
}

Eigen::MatrixXd ActorCritic::encode(const Sequence& x, Cache* cache) const {
  if (x.features() != config_.obs_dim || x.steps != config_.history) {
    throw std::invalid_argument("window shape does not match the network");
  }
  const auto last_input = x.step(x.steps - 1);
  if (!config_.use_bilstm) {
    Eigen::MatrixXd flat(static_cast<Eigen::Index>(x.features()) * x.steps, x.batch);
    for (int t = 0; t < x.steps; ++t) {
      flat.middleRows(static_cast<Eigen::Index>(t) * x.features(), x.features()) = x.step(t);
    }
    Eigen::MatrixXd f = flat_.forward(flat).array().tanh().matrix();
    if (cache != nullptr) cache->flat = std::move(flat);
    return f;
  }
  Sequence s = lstm_.forward(x, cache != nullptr ? &cache->lstm : nullptr);
  if (config_.use_mhsa) {
    if (cache != nullptr) cache->lstm_out = s;
    s = attention_.forward(s, cache != nullptr ? &cache->attention : nullptr);
  }
  return Eigen::MatrixXd(s.step(s.steps - 1)) + residual_.forward(last_input);
}

ActorCritic::Output ActorCritic::forward(const Sequence& windows, Cache* cache) const {
  Eigen::MatrixXd feature = encode(windows, cache);
  Eigen::MatrixXd a = actor_trunk_.forward(feature).array().tanh().matrix();
  Eigen::MatrixXd c = critic_trunk_.forward(feature).array().tanh().matrix();
  Output out;
  out.mean = head_.mean(a);
  out.value = value_.forward(c);
  if (cache != nullptr) {
    cache->input = windows;
    cache->feature = std::move(feature);
    cache->actor_hidden = std::move(a);
    cache->critic_hidden = std::move(c);
  }
  return out;
}

void ActorCritic::encode_backward(const Cache& cache, const Eigen::MatrixXd& d_feature) {
  const Sequence& x = cache.input;
  if (!config_.use_bilstm) {
    const Eigen::MatrixXd& f = cache.feature;
    flat_.backward(cache.flat, (d_feature.array() * (1.0 - f.array().square())).matrix());
    return;
  }
  residual_.backward(x.step(x.steps - 1), d_feature);
  Sequence d_seq(config_.hidden, x.steps, x.batch);
  d_seq.step(x.steps - 1) = d_feature;
  if (config_.use_mhsa) d_seq = attention_.backward(cache.attention, d_seq);
  lstm_.backward(cache.lstm, d_seq);
}

void ActorCritic::backward(const Cache& cache, const Output& out, const Eigen::MatrixXd& d_mean,
                           const Eigen::RowVectorXd& d_value) {
  const Eigen::MatrixXd& a = cache.actor_hidden;
  const Eigen::MatrixXd& c = cache.critic_hidden;
  const Eigen::MatrixXd da = head_.backward(a, out.mean, d_mean);
  const Eigen::MatrixXd dc = value_.backward(c, d_value);
  Eigen::MatrixXd d_feature =
      actor_trunk_.backward(cache.feature, (da.array() * (1.0 - a.array().square())).matrix());
  d_feature += critic_trunk_.backward(cache.feature, (dc.array() * (1.0 - c.array().square())).matrix());
  encode_backward(cache, d_feature);
}

}  // namespace simsec::nn
