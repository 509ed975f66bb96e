#include "simsec/system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simsec {

SimLayout ScenarioConfig::layout() const {
  SimLayout layout;
  layout.layers = layers;
  layout.atoms_per_layer = atoms_per_layer;
  layout.antennas = users;
  layout.wavelength = wavelength();
  layout.thickness_in_wavelengths = thickness_in_wavelengths;
  layout.pitch_in_wavelengths = pitch_in_wavelengths;
  layout.atom_size_in_wavelengths = atom_size_in_wavelengths;
  return layout;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (users < 1) fail("users must be >= 1");
  if (layers < 1) fail("layers must be >= 1");
  if (atoms_per_layer < 1) fail("atoms_per_layer must be >= 1");
  if (!(carrier_hz > 0.0)) fail("carrier frequency must be positive");
  if (!(area.x_max > area.x_min) || !(area.y_max > area.y_min)) fail("service area is empty");
  if (!(mobility.slot_duration > 0.0)) fail("slot duration must be positive");
  if (mobility.max_speed < 0.0 || mobility.heading_spread < 0.0) fail("mobility limits must be >= 0");
  if (!(sim_path.reference_gain > 0.0) || !(eve_path.reference_gain > 0.0)) fail("path loss rho must be > 0");
  if (sim_path.exponent < 0.0 || eve_path.exponent < 0.0) fail("path loss exponent must be >= 0");
  if (sim_rician.factor < 0.0 || eve_rician.factor < 0.0) fail("Rician factor must be >= 0");
  if (!(noise_watts > 0.0)) fail("noise power must be positive");
  if (impairment < 0.0) fail("impairment level must be >= 0");
  if (!(max_power_watts > 0.0)) fail("maximum power must be positive");
  if (bs_position.z() <= 0.0) fail("BS must be above the ground plane");
  SimGeometry{layout()};
}

SecureUplinkSystem::SecureUplinkSystem(const ScenarioConfig& scenario)
    : scenario_((scenario.validate(), scenario)),
      cascade_(SimGeometry(scenario.layout())),
      correlation_(correlation_matrix(cascade_.geometry())) {}

ChannelRealization SecureUplinkSystem::sample_channels(const std::vector<MuKinematics>& users,
                                                       int slot, Rng& rng) const {
  if (static_cast<int>(users.size()) != scenario_.users) {
    throw std::invalid_argument("expected " + std::to_string(scenario_.users) + " users");
  }
  ChannelRealization real;
  real.slot = slot;
  for (const MuKinematics& mu : users) {
    const Vec3 pos = mu.position();
    if (scenario_.receiver == ReceiverMode::kSim) {
      real.h_sim.push_back(sample_sim_channel(pos, scenario_.bs_position, geometry(),
                                              scenario_.sim_path, scenario_.sim_rician,
                                              correlation_, rng));
    } else {
      const double beta = path_loss(pos, scenario_.bs_position, scenario_.sim_path);
      const double xi = scenario_.sim_rician.factor;
      ComplexVector h(1);
      // Single-element steering vector is 1.
      h(0) = std::isinf(xi) ? Complex(std::sqrt(beta), 0.0)
                            : std::sqrt(beta / (1.0 + xi)) * (std::sqrt(xi) + complex_normal(rng));
      real.h_sim.push_back(h);
    }
    real.h_eve.push_back(sample_eve_channel(pos, scenario_.eve_position, scenario_.wavelength(),
                                            scenario_.eve_path, scenario_.eve_rician, rng));
  }
  return real;
}

LinkSnapshot SecureUplinkSystem::snapshot(const PhaseConfig& phases,
                                          const std::vector<double>& powers,
                                          const ChannelRealization& channels) const {
  const std::vector<double> kappa(static_cast<std::size_t>(scenario_.users), scenario_.impairment);
  if (scenario_.receiver == ReceiverMode::kSim) {
    return make_snapshot(cascade_, phases, channels, powers, kappa, scenario_.noise_watts);
  }
  LinkSnapshot snap;
  snap.powers = powers;
  snap.impairments = kappa;
  snap.noise = scenario_.noise_watts;
  for (std::size_t k = 0; k < channels.h_sim.size(); ++k) {
    snap.gains.push_back(std::norm(channels.h_sim[k](0)));
    snap.eve_gains.push_back(std::norm(channels.h_eve[k]));
  }
  snap.validate();
  return snap;
}

SecrecyReport SecureUplinkSystem::evaluate(const PhaseConfig& phases,
                                           const std::vector<double>& powers,
                                           const ChannelRealization& channels) const {
  return secrecy_report(snapshot(phases, powers, channels));
}

}  // namespace simsec
