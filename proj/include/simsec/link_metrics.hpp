#pragma once

// SINR with residual hardware impairments, achievable and secrecy rates.
// Rates are in bit/s/Hz; the noise power is the per-Hz AWGN level in watts.

#include <vector>

#include "simsec/channel.hpp"
#include "simsec/em_core.hpp"

namespace simsec {

struct LinkSnapshot {
  std::vector<double> gains;        // |w_k^H G^H h_k|^2
  std::vector<double> eve_gains;    // |h_eve,k|^2
  std::vector<double> powers;       // watts
  std::vector<double> impairments;  // kappa_k
  double noise = 1e-14;

  int users() const { return static_cast<int>(gains.size()); }
  // Throws std::invalid_argument on size mismatch or negative entries.
  void validate() const;
};

struct SecrecyReport {
  std::vector<double> rates;
  std::vector<double> eve_rates;
  std::vector<double> secrecy;
  std::vector<double> sinr;
  std::vector<double> eve_sinr;
  double mean_secrecy = 0.0;
  double sum_secrecy = 0.0;

  double min_secrecy() const;
};

// gamma_k = g_k P_k / (sum_{j != k} g_j P_j + sum_i g_i kappa_i^2 P_i + N0).
// The impairment sum runs over every user, the desired one included.
double sinr_bs(const LinkSnapshot& snap, int k);
double sinr_eve(const LinkSnapshot& snap, int k);

double rate(double sinr);
double secrecy_rate(double rate_bs, double rate_eve);

SecrecyReport secrecy_report(const LinkSnapshot& snap);

// Effective gains through an explicit beamforming matrix; inputs[k] is the
// antenna vector paired with user k.
LinkSnapshot make_snapshot(const ComplexMatrix& g, const std::vector<ComplexVector>& inputs,
                           const ChannelRealization& channels, const std::vector<double>& powers,
                           const std::vector<double>& impairments, double noise);

// Same, propagating each antenna vector through the cached cascade.
LinkSnapshot make_snapshot(const SimCascade& cascade, const PhaseConfig& config,
                           const ChannelRealization& channels, const std::vector<double>& powers,
                           const std::vector<double>& impairments, double noise);

SecrecyReport secrecy_report(const ComplexMatrix& g, const std::vector<ComplexVector>& inputs,
                             const ChannelRealization& channels, const std::vector<double>& powers,
                             const std::vector<double>& impairments, double noise);

}  // namespace simsec
