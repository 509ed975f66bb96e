#pragma once

// Wave-domain model of a stacked intelligent metasurface (SIM).
//
// Local frame: the BS antennas lie on the plane z = 0, layer m (zero-based)
// lies on z = (m + 1) * layer_spacing. Layer 0 is the input layer next to the
// antennas; the last layer faces the users. Atoms of every layer form a
// sqrt(N) x sqrt(N) grid centred on the z-axis, atom n sitting at row
// n / sqrt(N) and column n % sqrt(N).

#include <vector>

#include "simsec/types.hpp"

namespace simsec {

struct SimLayout {
  int layers = 4;
  int atoms_per_layer = 36;
  int antennas = 2;
  double wavelength = kSpeedOfLight / 3.5e9;
  double thickness_in_wavelengths = 5.0;
  double pitch_in_wavelengths = 0.5;
  double atom_size_in_wavelengths = 0.5;
};

class SimGeometry {
 public:
  // Throws std::invalid_argument when N is not a perfect square or any count
  // or length is non-positive.
  explicit SimGeometry(const SimLayout& layout);

  int layers() const { return layers_; }
  int atoms() const { return atoms_; }
  int grid_side() const { return side_; }
  int antennas() const { return static_cast<int>(antenna_positions_.size()); }
  double wavelength() const { return wavelength_; }
  double pitch() const { return pitch_; }
  double atom_width() const { return atom_width_; }
  double atom_height() const { return atom_height_; }
  double layer_spacing() const { return layer_spacing_; }
  double thickness() const { return layer_spacing_ * layers_; }

  const Vec3& atom_position(int layer, int atom) const;
  const Vec3& antenna_position(int antenna) const;
  const std::vector<Vec3>& antenna_positions() const { return antenna_positions_; }

 private:
  int layers_;
  int atoms_;
  int side_;
  double wavelength_;
  double pitch_;
  double atom_width_;
  double atom_height_;
  double layer_spacing_;
  std::vector<Vec3> atom_positions_;  // layer-major
  std::vector<Vec3> antenna_positions_;
};

// Phase shifts of every meta-atom, radians in [0, 2*pi).
class PhaseConfig {
 public:
  PhaseConfig(int layers, int atoms, double value = 0.0);

  // Rejects entries outside [0, 2*pi) or non-finite.
  static PhaseConfig from_matrix(const Eigen::MatrixXd& phases);
  // Wraps arbitrary finite values into [0, 2*pi).
  static PhaseConfig wrapped(const Eigen::MatrixXd& phases);

  int layers() const { return static_cast<int>(phases_.rows()); }
  int atoms() const { return static_cast<int>(phases_.cols()); }
  double operator()(int layer, int atom) const { return phases_(layer, atom); }
  const Eigen::MatrixXd& matrix() const { return phases_; }

 private:
  explicit PhaseConfig(Eigen::MatrixXd phases) : phases_(std::move(phases)) {}
  Eigen::MatrixXd phases_;
};

double wrap_phase(double phase);

// Diagonal N x N matrix diag(e^{j phi}) of one layer.
ComplexMatrix phase_matrix(const PhaseConfig& config, int layer);

// Rayleigh-Sommerfeld coefficient between two points on parallel planes:
// (dx dy cos(chi) / d) (1 / (2 pi d) - j / lambda) e^{j 2 pi d / lambda},
// cos(chi) being the normal distance over d.
Complex diffraction_coefficient(const SimGeometry& geom, const Vec3& source, const Vec3& target);

// W for the hop from layer-1 to layer (layer >= 1): entry (n', n) couples
// atom n' of the previous layer with atom n of this layer.
ComplexMatrix propagation_matrix(const SimGeometry& geom, int layer);

// Coefficients from one BS antenna to every atom of the input layer.
ComplexVector input_vector(const SimGeometry& geom, int antenna);

// G = Phi_M W_M Phi_{M-1} ... W_2 Phi_1, evaluated right to left.
ComplexMatrix beamforming_matrix(const SimGeometry& geom, const PhaseConfig& config);

// Caches the configuration-independent matrices so that per-slot evaluation
// only pays for the cascade product.
class SimCascade {
 public:
  explicit SimCascade(SimGeometry geom);

  const SimGeometry& geometry() const { return geom_; }
  const ComplexMatrix& propagation(int layer) const;
  const ComplexVector& input(int antenna) const;
  ComplexMatrix beamforming(const PhaseConfig& config) const;
  // G w_k by layer-by-layer propagation, O(M N^2) instead of forming G.
  ComplexVector effective_input(const PhaseConfig& config, int antenna) const;

 private:
  SimGeometry geom_;
  std::vector<ComplexMatrix> propagation_;  // index 0 unused
  std::vector<ComplexVector> inputs_;
};

}  // namespace simsec
