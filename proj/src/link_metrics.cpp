#include "simsec/link_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace simsec {

namespace {

double sinr_with(const std::vector<double>& gains, const LinkSnapshot& snap, int k) {
  if (k < 0 || k >= snap.users()) throw std::out_of_range("user index out of range");
  double interference = 0.0;
  double distortion = 0.0;
  for (int j = 0; j < snap.users(); ++j) {
    const double rx = gains[j] * snap.powers[j];
    if (j != k) interference += rx;
    distortion += rx * snap.impairments[j] * snap.impairments[j];
  }
  const double signal = gains[k] * snap.powers[k];
  if (signal == 0.0) return 0.0;
  return signal / (interference + distortion + snap.noise);
}

void check_all_nonneg(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string("negative or non-finite ") + what);
    }
  }
}

}  // namespace

void LinkSnapshot::validate() const {
  const std::size_t k = gains.size();
  if (eve_gains.size() != k || powers.size() != k || impairments.size() != k) {
    throw std::invalid_argument("link snapshot vectors differ in length");
  }
  check_all_nonneg(gains, "gain");
  check_all_nonneg(eve_gains, "eavesdropper gain");
  check_all_nonneg(powers, "power");
  check_all_nonneg(impairments, "impairment level");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise power must be non-negative");
}

double SecrecyReport::min_secrecy() const {
  if (secrecy.empty()) return 0.0;
  return *std::min_element(secrecy.begin(), secrecy.end());
}

double sinr_bs(const LinkSnapshot& snap, int k) { return sinr_with(snap.gains, snap, k); }

double sinr_eve(const LinkSnapshot& snap, int k) { return sinr_with(snap.eve_gains, snap, k); }

double rate(double sinr) { return std::log2(1.0 + sinr); }

double secrecy_rate(double rate_bs, double rate_eve) { return std::max(0.0, rate_bs - rate_eve); }

SecrecyReport secrecy_report(const LinkSnapshot& snap) {
  snap.validate();
  SecrecyReport report;
  const int k_users = snap.users();
  for (int k = 0; k < k_users; ++k) {
    const double g = sinr_bs(snap, k);
    const double e = sinr_eve(snap, k);
    report.sinr.push_back(g);
    report.eve_sinr.push_back(e);
    report.rates.push_back(rate(g));
    report.eve_rates.push_back(rate(e));
    report.secrecy.push_back(secrecy_rate(report.rates.back(), report.eve_rates.back()));
  }
  report.sum_secrecy = std::accumulate(report.secrecy.begin(), report.secrecy.end(), 0.0);
  report.mean_secrecy = k_users > 0 ? report.sum_secrecy / k_users : 0.0;
  return report;
}

namespace {

LinkSnapshot base_snapshot(const ChannelRealization& channels, const std::vector<double>& powers,
                           const std::vector<double>& impairments, double noise) {
  LinkSnapshot snap;
  snap.powers = powers;
  snap.impairments = impairments;
  snap.noise = noise;
  for (const Complex& h : channels.h_eve) snap.eve_gains.push_back(std::norm(h));
  return snap;
}

}  // namespace

LinkSnapshot make_snapshot(const ComplexMatrix& g, const std::vector<ComplexVector>& inputs,
                           const ChannelRealization& channels, const std::vector<double>& powers,
                           const std::vector<double>& impairments, double noise) {
  if (inputs.size() != channels.h_sim.size()) {
    throw std::invalid_argument("one antenna vector per user required");
  }
  LinkSnapshot snap = base_snapshot(channels, powers, impairments, noise);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    snap.gains.push_back(std::norm(overall_channel(inputs[k], g, channels.h_sim[k])));
  }
  snap.validate();
  return snap;
}

LinkSnapshot make_snapshot(const SimCascade& cascade, const PhaseConfig& config,
                           const ChannelRealization& channels, const std::vector<double>& powers,
                           const std::vector<double>& impairments, double noise) {
  if (static_cast<int>(channels.h_sim.size()) > cascade.geometry().antennas()) {
    throw std::invalid_argument("more users than BS antennas");
  }
  LinkSnapshot snap = base_snapshot(channels, powers, impairments, noise);
  for (std::size_t k = 0; k < channels.h_sim.size(); ++k) {
    const ComplexVector v = cascade.effective_input(config, static_cast<int>(k));
    if (v.size() != channels.h_sim[k].size()) throw std::invalid_argument("channel length mismatch");
    snap.gains.push_back(std::norm(v.dot(channels.h_sim[k])));
  }
  snap.validate();
  return snap;
}

SecrecyReport secrecy_report(const ComplexMatrix& g, const std::vector<ComplexVector>& inputs,
                             const ChannelRealization& channels, const std::vector<double>& powers,
                             const std::vector<double>& impairments, double noise) {
  return secrecy_report(make_snapshot(g, inputs, channels, powers, impairments, noise));
}

}  // namespace simsec
