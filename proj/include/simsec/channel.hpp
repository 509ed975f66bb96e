#pragma once

// Stochastic uplink channels: spatially correlated Rician MU -> SIM vectors,
// scalar MU -> eavesdropper links and distance-based path loss. All inputs
// are linear (dB conversion happens when the configuration is loaded).

#include <vector>

#include "simsec/em_core.hpp"
#include "simsec/types.hpp"

namespace simsec {

struct PathLossModel {
  double reference_gain = 0.01;  // linear power gain at 1 m
  double exponent = 2.0;
};

struct RicianParams {
  double factor = 10.0;  // linear LoS / NLoS power ratio; +inf means pure LoS
};

struct CorrelationMatrix {
  Eigen::MatrixXd correlation;  // R, unit diagonal
  Eigen::MatrixXd root;         // root * root^T ~= R
};

struct ArrivalAngles {
  double azimuth = 0.0;
  double elevation = 0.0;
};

struct ChannelRealization {
  std::vector<ComplexVector> h_sim;  // per MU, N entries at the output layer
  std::vector<Complex> h_eve;        // per MU
  int slot = 0;
};

// rho * |a - b|^-alpha; throws on coincident positions.
double path_loss(const Vec3& a, const Vec3& b, const PathLossModel& model);

// R_{n,n'} = sinc(2 d_{n,n'} / lambda) over the output layer, with a root from
// the symmetric eigen-decomposition (eigenvalues below zero clamped).
CorrelationMatrix correlation_matrix(const SimGeometry& geom);

double normalized_sinc(double x);

ComplexVector steering_vector(double azimuth, double elevation, const SimGeometry& geom);

// Angles seen from the SIM (at bs) towards the MU: elevation from the +z axis,
// azimuth in the xy-plane from +x.
ArrivalAngles aoa_from_positions(const Vec3& mu, const Vec3& bs);

ComplexVector sample_sim_channel(const Vec3& mu, const Vec3& bs, const SimGeometry& geom,
                                 const PathLossModel& path, const RicianParams& rician,
                                 const CorrelationMatrix& corr, Rng& rng);

// LoS term is the unit-modulus distance phase e^{-j 2 pi d / lambda}.
Complex sample_eve_channel(const Vec3& mu, const Vec3& eve, double wavelength,
                           const PathLossModel& path, const RicianParams& rician, Rng& rng);

// h_k = w^H G^H h_sim.
Complex overall_channel(const ComplexVector& w, const ComplexMatrix& g, const ComplexVector& h_sim);

}  // namespace simsec
