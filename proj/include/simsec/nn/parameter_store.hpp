#pragma once

#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace simsec::nn {

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  bool decay = true;  // weight decay applies (weights yes, biases and log-std no)
};

// Owns every learnable array. Entries live in a deque so references handed to
// layers stay valid as more parameters are added.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& add(const std::string& name, int rows, int cols, bool decay);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::deque<Parameter>& entries() { return params_; }
  const std::deque<Parameter>& entries() const { return params_; }
  std::size_t size() const { return params_.size(); }
  Eigen::Index scalar_count() const;

  void zero_grad();
  double grad_norm() const;
  // Rescales all gradients so the global L2 norm is at most max_norm; returns
  // the norm before clipping.
  double clip_grad_norm(double max_norm);
  bool grads_finite() const;

  // Values must match names and shapes exactly.
  void copy_values_from(const ParameterStore& other);

 private:
  std::deque<Parameter> params_;
};

}  // namespace simsec::nn
