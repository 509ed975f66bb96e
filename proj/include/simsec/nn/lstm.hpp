#pragma once

// LSTM cell with separate gate matrices acting on z = [h_prev; x], the
// bidirectional layer (directions summed per step) and a stacked encoder.

#include <string>
#include <vector>

#include "simsec/nn/layers.hpp"

namespace simsec::nn {

struct LstmParams {
  Parameter* w_f = nullptr;
  Parameter* w_i = nullptr;
  Parameter* w_c = nullptr;
  Parameter* w_o = nullptr;
  Parameter* b_f = nullptr;
  Parameter* b_i = nullptr;
  Parameter* b_c = nullptr;
  Parameter* b_o = nullptr;
  int input = 0;
  int hidden = 0;
};

// Recurrent block orthogonal, input block fan-in uniform, biases zero.
LstmParams make_lstm_params(ParameterStore& store, const std::string& prefix, int input,
                            int hidden, Rng& rng);

struct LstmStepCache {
  Eigen::MatrixXd z;
  Eigen::MatrixXd f;
  Eigen::MatrixXd i;
  Eigen::MatrixXd g;  // candidate cell state
  Eigen::MatrixXd o;
  Eigen::MatrixXd c_prev;
  Eigen::MatrixXd tanh_c;
};

void lstm_cell_forward(const LstmParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                       const Eigen::MatrixXd& c_prev, Eigen::MatrixXd& h, Eigen::MatrixXd& c,
                       LstmStepCache* cache);

// dh, dc: gradients w.r.t. this step's h and c (dc excludes the path through
// h, which is added here). Accumulates parameter gradients.
void lstm_cell_backward(const LstmParams& p, const LstmStepCache& cache, const Eigen::MatrixXd& dh,
                        const Eigen::MatrixXd& dc, Eigen::MatrixXd& dx, Eigen::MatrixXd& dh_prev,
                        Eigen::MatrixXd& dc_prev);

struct LstmRunCache {
  std::vector<LstmStepCache> steps;  // indexed by time, not by visit order
};

// Runs over t = 0..T-1 (or reversed) from zero state; returns h per step.
Sequence lstm_run(const LstmParams& p, const Sequence& x, bool reverse, LstmRunCache* cache);
Sequence lstm_run_backward(const LstmParams& p, const LstmRunCache& cache, const Sequence& dh,
                           bool reverse);

class BiLstmStack {
 public:
  struct Cache {
    std::vector<Sequence> inputs;  // input to each layer
    std::vector<LstmRunCache> forward;
    std::vector<LstmRunCache> backward;
  };

  BiLstmStack() = default;
  BiLstmStack(ParameterStore& store, const std::string& prefix, int input, int hidden, int layers,
              Rng& rng);

  int layers() const { return static_cast<int>(forward_.size()); }
  int hidden() const { return hidden_; }
  const LstmParams& forward_params(int l) const { return forward_[static_cast<std::size_t>(l)]; }
  const LstmParams& backward_params(int l) const { return backward_[static_cast<std::size_t>(l)]; }

  // y_l(t) = h_fwd(t) + h_bwd(t), fed upward; returns the top sequence.
  Sequence forward(const Sequence& x, Cache* cache) const;
  Sequence backward(const Cache& cache, const Sequence& dy) const;

 private:
  std::vector<LstmParams> forward_;
  std::vector<LstmParams> backward_;
  int hidden_ = 0;
};

}  // namespace simsec::nn
