#pragma once

// Scenario description and the composed uplink: geometry, cached cascade,
// channel sampling and secrecy evaluation for one slot.

#include <vector>

#include "simsec/channel.hpp"
#include "simsec/em_core.hpp"
#include "simsec/link_metrics.hpp"
#include "simsec/mobility.hpp"

namespace simsec {

enum class ReceiverMode { kSim, kDirect };

struct ScenarioConfig {
  int users = 2;
  int layers = 4;
  int atoms_per_layer = 36;
  double carrier_hz = 3.5e9;
  double thickness_in_wavelengths = 5.0;
  double pitch_in_wavelengths = 0.5;
  double atom_size_in_wavelengths = 0.5;
  Vec3 bs_position{0.0, 0.0, 20.0};
  Vec3 eve_position{20.0, 20.0, 0.0};
  ServiceArea area;
  MobilityParams mobility;
  PathLossModel sim_path;
  PathLossModel eve_path;
  RicianParams sim_rician;
  RicianParams eve_rician;
  double noise_watts = 1e-14;
  double impairment = 0.1;  // kappa, shared by every user
  double max_power_watts = 1.0;
  ReceiverMode receiver = ReceiverMode::kSim;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  SimLayout layout() const;
  // Throws std::invalid_argument on any inconsistent field.
  void validate() const;
};

class SecureUplinkSystem {
 public:
  explicit SecureUplinkSystem(const ScenarioConfig& scenario);

  const ScenarioConfig& scenario() const { return scenario_; }
  const SimCascade& cascade() const { return cascade_; }
  const SimGeometry& geometry() const { return cascade_.geometry(); }
  const CorrelationMatrix& correlation() const { return correlation_; }
  int users() const { return scenario_.users; }
  int action_dim() const { return geometry().layers() * geometry().atoms() + users(); }

  // SIM mode draws N-vectors at the output layer; direct mode draws one
  // Rician scalar per user towards a single BS antenna (stored as 1-vectors).
  ChannelRealization sample_channels(const std::vector<MuKinematics>& users, int slot,
                                     Rng& rng) const;

  SecrecyReport evaluate(const PhaseConfig& phases, const std::vector<double>& powers,
                         const ChannelRealization& channels) const;
  LinkSnapshot snapshot(const PhaseConfig& phases, const std::vector<double>& powers,
                        const ChannelRealization& channels) const;

 private:
  ScenarioConfig scenario_;
  SimCascade cascade_;
  CorrelationMatrix correlation_;
};

}  // namespace simsec
