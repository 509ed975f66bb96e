#include "simsec/em_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simsec {

namespace {

int exact_sqrt(int n) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return root * root == n ? root : -1;
}

void check_layer(const PhaseConfig& config, int layer) {
  if (layer < 0 || layer >= config.layers()) {
    throw std::out_of_range("layer index " + std::to_string(layer) + " outside [0, " +
                            std::to_string(config.layers()) + ")");
  }
}

}  // namespace

SimGeometry::SimGeometry(const SimLayout& layout)
    : layers_(layout.layers),
      atoms_(layout.atoms_per_layer),
      side_(exact_sqrt(layout.atoms_per_layer)),
      wavelength_(layout.wavelength) {
  if (layers_ < 1) throw std::invalid_argument("SIM needs at least one layer");
  if (atoms_ < 1 || side_ < 0) {
    throw std::invalid_argument("atoms per layer must be a positive perfect square, got " +
                                std::to_string(atoms_));
  }
  if (layout.antennas < 1) throw std::invalid_argument("at least one BS antenna required");
  if (!(wavelength_ > 0.0) || !(layout.thickness_in_wavelengths > 0.0) ||
      !(layout.pitch_in_wavelengths > 0.0) || !(layout.atom_size_in_wavelengths > 0.0)) {
    throw std::invalid_argument("SIM lengths must be positive");
  }
  pitch_ = layout.pitch_in_wavelengths * wavelength_;
  atom_width_ = layout.atom_size_in_wavelengths * wavelength_;
  atom_height_ = atom_width_;
  layer_spacing_ = layout.thickness_in_wavelengths * wavelength_ / layers_;

  const double centre = 0.5 * (side_ - 1);
  atom_positions_.reserve(static_cast<std::size_t>(layers_) * atoms_);
  for (int m = 0; m < layers_; ++m) {
    const double z = (m + 1) * layer_spacing_;
    for (int n = 0; n < atoms_; ++n) {
      const int row = n / side_;
      const int col = n % side_;
      atom_positions_.emplace_back((col - centre) * pitch_, (row - centre) * pitch_, z);
    }
  }

  // Uniform linear array along x with half-wavelength spacing.
  const double array_centre = 0.5 * (layout.antennas - 1);
  for (int k = 0; k < layout.antennas; ++k) {
    antenna_positions_.emplace_back((k - array_centre) * 0.5 * wavelength_, 0.0, 0.0);
  }
}

const Vec3& SimGeometry::atom_position(int layer, int atom) const {
  if (layer < 0 || layer >= layers_ || atom < 0 || atom >= atoms_) {
    throw std::out_of_range("atom index out of range");
  }
  return atom_positions_[static_cast<std::size_t>(layer) * atoms_ + atom];
}

const Vec3& SimGeometry::antenna_position(int antenna) const {
  if (antenna < 0 || antenna >= antennas()) throw std::out_of_range("antenna index out of range");
  return antenna_positions_[static_cast<std::size_t>(antenna)];
}

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod can land exactly on 2*pi after the negative shift.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

PhaseConfig::PhaseConfig(int layers, int atoms, double value) {
  if (layers < 1 || atoms < 1) throw std::invalid_argument("phase config dimensions must be positive");
  if (!(value >= 0.0 && value < kTwoPi)) throw std::invalid_argument("phase outside [0, 2pi)");
  phases_ = Eigen::MatrixXd::Constant(layers, atoms, value);
}

PhaseConfig PhaseConfig::from_matrix(const Eigen::MatrixXd& phases) {
  if (phases.rows() < 1 || phases.cols() < 1) throw std::invalid_argument("empty phase matrix");
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    const double v = phases.data()[i];
    if (!(v >= 0.0 && v < kTwoPi)) throw std::invalid_argument("phase outside [0, 2pi)");
  }
  return PhaseConfig(phases);
}

PhaseConfig PhaseConfig::wrapped(const Eigen::MatrixXd& phases) {
  if (!phases.allFinite()) throw std::invalid_argument("non-finite phase");
  return from_matrix(phases.unaryExpr([](double v) { return wrap_phase(v); }));
}

ComplexMatrix phase_matrix(const PhaseConfig& config, int layer) {
  check_layer(config, layer);
  ComplexMatrix phi = ComplexMatrix::Zero(config.atoms(), config.atoms());
  for (int n = 0; n < config.atoms(); ++n) phi(n, n) = std::polar(1.0, config(layer, n));
  return phi;
}

Complex diffraction_coefficient(const SimGeometry& geom, const Vec3& source, const Vec3& target) {
  const double d = (target - source).norm();
  if (!(d > 0.0)) throw std::invalid_argument("diffraction between coincident points");
  const double lambda = geom.wavelength();
  const double cos_chi = std::abs(target.z() - source.z()) / d;
  const double amplitude = geom.atom_width() * geom.atom_height() * cos_chi / d;
  const Complex obliquity(1.0 / (kTwoPi * d), -1.0 / lambda);
  return amplitude * obliquity * std::polar(1.0, kTwoPi * d / lambda);
}

ComplexMatrix propagation_matrix(const SimGeometry& geom, int layer) {
  if (layer < 1 || layer >= geom.layers()) {
    throw std::out_of_range("propagation matrix needs 1 <= layer < M, got " + std::to_string(layer));
  }
  const int n_atoms = geom.atoms();
  ComplexMatrix w(n_atoms, n_atoms);
  for (int src = 0; src < n_atoms; ++src) {
    for (int dst = 0; dst < n_atoms; ++dst) {
      w(src, dst) = diffraction_coefficient(geom, geom.atom_position(layer - 1, src),
                                            geom.atom_position(layer, dst));
    }
  }
  return w;
}

ComplexVector input_vector(const SimGeometry& geom, int antenna) {
  const Vec3& a = geom.antenna_position(antenna);
  if (!(std::abs(geom.atom_position(0, 0).z() - a.z()) > 0.0)) {
    throw std::invalid_argument("antenna lies on the input layer plane");
  }
  ComplexVector w(geom.atoms());
  for (int n = 0; n < geom.atoms(); ++n) {
    w(n) = diffraction_coefficient(geom, a, geom.atom_position(0, n));
  }
  return w;
}

namespace {

void scale_rows_by_phase(ComplexMatrix& g, const PhaseConfig& config, int layer) {
  for (int n = 0; n < config.atoms(); ++n) g.row(n) *= std::polar(1.0, config(layer, n));
}

void check_config(const SimGeometry& geom, const PhaseConfig& config) {
  if (config.layers() != geom.layers() || config.atoms() != geom.atoms()) {
    throw std::invalid_argument("phase config " + std::to_string(config.layers()) + "x" +
                                std::to_string(config.atoms()) + " does not match SIM " +
                                std::to_string(geom.layers()) + "x" +
                                std::to_string(geom.atoms()));
  }
}

}  // namespace

ComplexMatrix beamforming_matrix(const SimGeometry& geom, const PhaseConfig& config) {
  check_config(geom, config);
  ComplexMatrix g = phase_matrix(config, 0);
  for (int m = 1; m < geom.layers(); ++m) {
    g = propagation_matrix(geom, m) * g;
    scale_rows_by_phase(g, config, m);
  }
  return g;
}

SimCascade::SimCascade(SimGeometry geom) : geom_(std::move(geom)) {
  propagation_.resize(static_cast<std::size_t>(geom_.layers()));
  for (int m = 1; m < geom_.layers(); ++m) {
    // Equal layer spacing makes every hop identical.
    propagation_[static_cast<std::size_t>(m)] =
        m == 1 ? propagation_matrix(geom_, 1) : propagation_[1];
  }
  for (int k = 0; k < geom_.antennas(); ++k) inputs_.push_back(input_vector(geom_, k));
}

const ComplexMatrix& SimCascade::propagation(int layer) const {
  if (layer < 1 || layer >= geom_.layers()) throw std::out_of_range("propagation layer out of range");
  return propagation_[static_cast<std::size_t>(layer)];
}

const ComplexVector& SimCascade::input(int antenna) const {
  if (antenna < 0 || antenna >= geom_.antennas()) throw std::out_of_range("antenna out of range");
  return inputs_[static_cast<std::size_t>(antenna)];
}

ComplexMatrix SimCascade::beamforming(const PhaseConfig& config) const {
  check_config(geom_, config);
  ComplexMatrix g = phase_matrix(config, 0);
  for (int m = 1; m < geom_.layers(); ++m) {
    g = propagation_[static_cast<std::size_t>(m)] * g;
    scale_rows_by_phase(g, config, m);
  }
  return g;
}

ComplexVector SimCascade::effective_input(const PhaseConfig& config, int antenna) const {
  check_config(geom_, config);
  ComplexVector v = input(antenna);
  for (int n = 0; n < geom_.atoms(); ++n) v(n) *= std::polar(1.0, config(0, n));
  for (int m = 1; m < geom_.layers(); ++m) {
    v = propagation_[static_cast<std::size_t>(m)] * v;
    for (int n = 0; n < geom_.atoms(); ++n) v(n) *= std::polar(1.0, config(m, n));
  }
  return v;
}

}  // namespace simsec
