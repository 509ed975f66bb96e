#pragma once

// Shared feature encoder feeding an actor (Gaussian head) and a critic.
//
// Recurrent path: Bi-LSTM stack -> optional MHSA -> last step + linear
// residual projection of the last input. Without the Bi-LSTM the encoder is a
// tanh dense layer over the flattened window (attention needs the recurrent
// sequence and is skipped).

#include <cstdint>
#include <vector>

#include "simsec/nn/attention.hpp"
#include "simsec/nn/lstm.hpp"
#include "simsec/nn/policy.hpp"

namespace simsec::nn {

struct NetworkConfig {
  int obs_dim = 9;
  int action_dim = 146;
  int history = 8;
  int hidden = 128;
  int lstm_layers = 3;
  int heads = 4;
  bool use_bilstm = true;
  bool use_mhsa = true;
  double init_log_std = -0.69314718055994530942;  // log 0.5
  double mean_init_scale = 0.01;

  void validate() const;
};

class ActorCritic {
 public:
  struct Cache {
    Sequence input;
    BiLstmStack::Cache lstm;
    Sequence lstm_out;
    MultiHeadSelfAttention::Cache attention;
    Eigen::MatrixXd flat;
    Eigen::MatrixXd feature;
    Eigen::MatrixXd actor_hidden;
    Eigen::MatrixXd critic_hidden;
  };

  struct Output {
    Eigen::MatrixXd mean;     // action_dim x B
    Eigen::RowVectorXd value;  // 1 x B
  };

  ActorCritic(const NetworkConfig& config, std::uint64_t seed);
  ActorCritic(const ActorCritic&) = delete;
  ActorCritic& operator=(const ActorCritic&) = delete;

  const NetworkConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  Eigen::VectorXd log_std() const { return head_.log_std(); }
  Parameter& log_std_param() { return head_.log_std_param(); }

  // windows: obs_dim x (history * B), time-major.
  Output forward(const Sequence& windows, Cache* cache) const;
  // Accumulates gradients of L given dL/dmean and dL/dvalue. The log-std
  // gradient is added by the caller through log_std_param().
  void backward(const Cache& cache, const Output& out, const Eigen::MatrixXd& d_mean,
                const Eigen::RowVectorXd& d_value);

  // Packs per-sample obs_dim x history windows into a batch sequence.
  static Sequence pack(const std::vector<const Eigen::MatrixXd*>& windows);

 private:
  Eigen::MatrixXd encode(const Sequence& x, Cache* cache) const;
  void encode_backward(const Cache& cache, const Eigen::MatrixXd& d_feature);

  NetworkConfig config_;
  ParameterStore store_;
  BiLstmStack lstm_;
  MultiHeadSelfAttention attention_;
  Dense residual_;
  Dense flat_;
  Dense actor_trunk_;
  GaussianHead head_;
  Dense critic_trunk_;
  ValueHead value_;
};

}  // namespace simsec::nn
