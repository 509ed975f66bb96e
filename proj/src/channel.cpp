#include "simsec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace simsec {

double path_loss(const Vec3& a, const Vec3& b, const PathLossModel& model) {
  const double d = (a - b).norm();
  if (!(d > 0.0)) throw std::invalid_argument("path loss between coincident positions");
  if (!(model.reference_gain > 0.0) || model.exponent < 0.0) {
    throw std::invalid_argument("path loss model needs rho > 0 and alpha >= 0");
  }
  return model.reference_gain * std::pow(d, -model.exponent);
}

double normalized_sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

CorrelationMatrix correlation_matrix(const SimGeometry& geom) {
  const int n_atoms = geom.atoms();
  const int out = geom.layers() - 1;
  CorrelationMatrix result;
  result.correlation.resize(n_atoms, n_atoms);
  for (int a = 0; a < n_atoms; ++a) {
    for (int b = 0; b < n_atoms; ++b) {
      const double d = (geom.atom_position(out, a) - geom.atom_position(out, b)).norm();
      result.correlation(a, b) = normalized_sinc(2.0 * d / geom.wavelength());
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.correlation);
  if (eig.info() != Eigen::Success) throw std::runtime_error("correlation eigen-decomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-9) {
    throw std::runtime_error("correlation matrix is indefinite beyond tolerance");
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  result.root = eig.eigenvectors() * values.asDiagonal();
  return result;
}

ComplexVector steering_vector(double azimuth, double elevation, const SimGeometry& geom) {
  const int side = geom.grid_side();
  const double scale = kTwoPi * geom.pitch() / geom.wavelength();
  const double row_term = std::sin(elevation) * std::sin(azimuth);
  const double col_term = std::cos(elevation);
  ComplexVector a(geom.atoms());
  for (int n = 0; n < geom.atoms(); ++n) {
    const int row = n / side;
    const int col = n % side;
    a(n) = std::polar(1.0, scale * (row * row_term + col * col_term));
  }
  return a;
}

ArrivalAngles aoa_from_positions(const Vec3& mu, const Vec3& bs) {
  const Vec3 delta = mu - bs;
  const double d = delta.norm();
  if (!(d > 0.0)) throw std::invalid_argument("angle of arrival between coincident positions");
  ArrivalAngles angles;
  angles.elevation = std::acos(std::clamp(delta.z() / d, -1.0, 1.0));
  angles.azimuth = std::atan2(delta.y(), delta.x());
  return angles;
}

ComplexVector sample_sim_channel(const Vec3& mu, const Vec3& bs, const SimGeometry& geom,
                                 const PathLossModel& path, const RicianParams& rician,
                                 const CorrelationMatrix& corr, Rng& rng) {
  if (rician.factor < 0.0) throw std::invalid_argument("Rician factor must be non-negative");
  const int n_atoms = geom.atoms();
  if (corr.root.rows() != n_atoms || corr.root.cols() != n_atoms) {
    throw std::invalid_argument("correlation root does not match the SIM size");
  }
  const double beta = path_loss(mu, bs, path);
  const ArrivalAngles aoa = aoa_from_positions(mu, bs);
  const ComplexVector los = steering_vector(aoa.azimuth, aoa.elevation, geom);
  if (std::isinf(rician.factor)) return std::sqrt(beta) * los;
  ComplexVector z(n_atoms);
  for (int n = 0; n < n_atoms; ++n) z(n) = complex_normal(rng);
  const ComplexVector nlos = corr.root.cast<Complex>() * z;
  return std::sqrt(beta / (1.0 + rician.factor)) * (std::sqrt(rician.factor) * los + nlos);
}

Complex sample_eve_channel(const Vec3& mu, const Vec3& eve, double wavelength,
                           const PathLossModel& path, const RicianParams& rician, Rng& rng) {
  if (rician.factor < 0.0) throw std::invalid_argument("Rician factor must be non-negative");
  const double beta = path_loss(mu, eve, path);
  const double d = (mu - eve).norm();
  const Complex los = std::polar(1.0, -kTwoPi * d / wavelength);
  if (std::isinf(rician.factor)) return std::sqrt(beta) * los;
  const Complex nlos = complex_normal(rng);
  return std::sqrt(beta / (1.0 + rician.factor)) * (std::sqrt(rician.factor) * los + nlos);
}

Complex overall_channel(const ComplexVector& w, const ComplexMatrix& g, const ComplexVector& h_sim) {
  if (g.rows() != h_sim.size() || g.cols() != w.size()) {
    throw std::invalid_argument("overall channel dimension mismatch");
  }
  // w^H G^H h = (G w)^H h
  return (g * w).dot(h_sim);
}

}  // namespace simsec
