#include "simsec/nn/parameter_store.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec::nn {

Parameter& ParameterStore::add(const std::string& name, int rows, int cols, bool decay) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  if (rows < 1 || cols < 1) throw std::invalid_argument("parameter " + name + " has empty shape");
  Parameter p;
  p.name = name;
  p.value = Eigen::MatrixXd::Zero(rows, cols);
  p.grad = Eigen::MatrixXd::Zero(rows, cols);
  p.decay = decay;
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("unknown parameter: " + name);
}

const Parameter& ParameterStore::get(const std::string& name) const {
  for (const Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("unknown parameter: " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  for (const Parameter& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

Eigen::Index ParameterStore::scalar_count() const {
  Eigen::Index n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) p.grad.setZero();
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const Parameter& p : params_) sq += p.grad.squaredNorm();
  return std::sqrt(sq);
}

double ParameterStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Parameter& p : params_) p.grad *= scale;
  }
  return norm;
}

bool ParameterStore::grads_finite() const {
  for (const Parameter& p : params_) {
    if (!p.grad.allFinite()) return false;
  }
  return true;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (other.size() != size()) throw std::invalid_argument("parameter stores differ in size");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = other.params_[i];
    Parameter& dst = params_[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw std::invalid_argument("parameter mismatch at " + dst.name);
    }
    dst.value = src.value;
  }
}

}  // namespace simsec::nn
