#pragma once

// Multi-head scaled dot-product self-attention over the steps of a sequence,
// with output projection and residual connection:
//   y = W_o concat_h(softmax(Q_h^T K_h / sqrt(d_h)) applied to V_h) + b_o + x

#include <string>
#include <vector>

#include "simsec/nn/layers.hpp"

namespace simsec::nn {

class MultiHeadSelfAttention {
 public:
  struct Cache {
    Sequence input;
    Eigen::MatrixXd q;
    Eigen::MatrixXd k;
    Eigen::MatrixXd v;
    Eigen::MatrixXd concat;
    std::vector<Eigen::MatrixXd> weights;  // [sample * heads + head], T x T, rows sum to 1
  };

  MultiHeadSelfAttention() = default;
  // Throws std::invalid_argument when dim is not divisible by heads.
  MultiHeadSelfAttention(ParameterStore& store, const std::string& prefix, int dim, int heads,
                         Rng& rng);

  int heads() const { return heads_; }
  int dim() const { return dim_; }
  Sequence forward(const Sequence& x, Cache* cache) const;
  Sequence backward(const Cache& cache, const Sequence& dy) const;

 private:
  Dense q_;
  Dense k_;
  Dense v_;
  Dense o_;
  int dim_ = 0;
  int heads_ = 1;
};

}  // namespace simsec::nn
