#include "simsec/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace simsec {

void RewardConfig::validate() const {
  if (gain_diff < 0.0 || gain_pro < 0.0 || gain_sta < 0.0) {
    throw std::invalid_argument("reward gains must be non-negative");
  }
  if (stability_band < 0.0) throw std::invalid_argument("stability band must be non-negative");
}

void EnvConfig::validate() const {
  scenario.validate();
  reward.validate();
  if (slots_per_episode < 1) throw std::invalid_argument("slots_per_episode must be >= 1");
  if (history < 1) throw std::invalid_argument("history window must be >= 1");
}

std::vector<double> MdpState::flatten() const {
  std::vector<double> out;
  out.reserve(positions.size() + secrecy.size() + sinr.size() + 1);
  out.insert(out.end(), positions.begin(), positions.end());
  out.insert(out.end(), secrecy.begin(), secrecy.end());
  out.insert(out.end(), sinr.begin(), sinr.end());
  out.push_back(mean_secrecy);
  return out;
}

DecodedAction decode_action(const Eigen::VectorXd& action, int layers, int atoms, int users,
                            double max_power) {
  const Eigen::Index expected = static_cast<Eigen::Index>(layers) * atoms + users;
  if (action.size() != expected) {
    throw std::invalid_argument("action length " + std::to_string(action.size()) + ", expected " +
                                std::to_string(expected));
  }
  if (!action.allFinite()) throw std::invalid_argument("non-finite action");
  Eigen::MatrixXd phases(layers, atoms);
  for (int m = 0; m < layers; ++m) {
    for (int n = 0; n < atoms; ++n) {
      const double x = std::clamp(action(m * atoms + n), -1.0, 1.0);
      phases(m, n) = wrap_phase((x + 1.0) * kPi);
    }
  }
  std::vector<double> powers;
  powers.reserve(static_cast<std::size_t>(users));
  for (int k = 0; k < users; ++k) {
    const double x = std::clamp(action(static_cast<Eigen::Index>(layers) * atoms + k), -1.0, 1.0);
    powers.push_back(0.5 * (x + 1.0) * max_power);
  }
  return {PhaseConfig::from_matrix(phases), std::move(powers)};
}

Eigen::VectorXd uniform_action(int layers, int atoms, int users, double phase,
                               double power_fraction) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(layers) * atoms + users);
  a.head(static_cast<Eigen::Index>(layers) * atoms).setConstant(phase / kPi - 1.0);
  a.tail(users).setConstant(2.0 * power_fraction - 1.0);
  return a;
}

RewardTerms compute_reward(const SecrecyReport& prev, const SecrecyReport& next,
                           const RewardConfig& cfg) {
  RewardTerms t;
  const double delta = next.mean_secrecy - prev.mean_secrecy;
  t.diff = delta;
  t.pro = 1.0 - std::exp(-next.mean_secrecy);
  t.sta = std::abs(delta) > cfg.stability_band ? std::abs(delta) : 0.0;
  t.feasible = next.secrecy.empty() || next.min_secrecy() >= cfg.min_secrecy;
  if (!t.feasible) {
    t.pro = 0.0;
    t.diff = std::min(t.diff, 0.0);
  }
  t.total = cfg.gain_diff * t.diff + cfg.gain_pro * t.pro - cfg.gain_sta * t.sta;
  return t;
}

Eigen::VectorXd observe(const MdpState& state, const ScenarioConfig& scenario) {
  const std::vector<double> raw = state.flatten();
  const int k_users = static_cast<int>(state.secrecy.size());
  Eigen::VectorXd obs(static_cast<Eigen::Index>(raw.size()));
  const ServiceArea& a = scenario.area;
  for (int k = 0; k < k_users; ++k) {
    obs(2 * k) = 2.0 * (raw[2 * k] - a.x_min) / (a.x_max - a.x_min) - 1.0;
    obs(2 * k + 1) = 2.0 * (raw[2 * k + 1] - a.y_min) / (a.y_max - a.y_min) - 1.0;
    obs(2 * k_users + k) = raw[2 * k_users + k] / 4.0;
    obs(3 * k_users + k) = std::log1p(raw[3 * k_users + k]) / 4.0;
  }
  obs(4 * k_users) = raw.back() / 4.0;
  return obs;
}

SecureUplinkEnv::SecureUplinkEnv(const EnvConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      system_(config.scenario),
      mobility_rng_(make_stream(seed, 1)),
      fading_rng_(make_stream(seed, 2)) {}

MdpState SecureUplinkEnv::assemble(const SecrecyReport& report) const {
  MdpState s;
  for (const MuKinematics& mu : users_) {
    s.positions.push_back(mu.x);
    s.positions.push_back(mu.y);
  }
  s.secrecy = report.secrecy;
  s.sinr = report.sinr;
  s.mean_secrecy = report.mean_secrecy;
  return s;
}

void SecureUplinkEnv::push_observation() {
  history_.push_back(observe(state_, config_.scenario));
  while (static_cast<int>(history_.size()) > config_.history) history_.pop_front();
}

const MdpState& SecureUplinkEnv::reset() {
  const ScenarioConfig& sc = config_.scenario;
  users_.clear();
  for (int k = 0; k < sc.users; ++k) users_.push_back(spawn_user(sc.area, mobility_rng_));
  slot_ = 0;
  ++episode_;
  started_ = true;
  channels_ = system_.sample_channels(users_, 0, fading_rng_);
  const PhaseConfig phases(sc.layers, sc.atoms_per_layer, kPi);
  const std::vector<double> powers(static_cast<std::size_t>(sc.users), 0.5 * sc.max_power_watts);
  report_ = system_.evaluate(phases, powers, channels_);
  state_ = assemble(report_);
  history_.clear();
  push_observation();
  return state_;
}

StepResult SecureUplinkEnv::step(const Eigen::VectorXd& action) {
  const ScenarioConfig& sc = config_.scenario;
  DecodedAction decoded =
      decode_action(action, sc.layers, sc.atoms_per_layer, sc.users, sc.max_power_watts);
  return step_decoded(decoded.phases, decoded.powers);
}

StepResult SecureUplinkEnv::step_decoded(const PhaseConfig& phases,
                                         const std::vector<double>& powers) {
  if (!started_) throw std::logic_error("step before reset");
  if (done()) throw std::logic_error("step after episode end");
  const ScenarioConfig& sc = config_.scenario;
  for (MuKinematics& mu : users_) mu = step_mobility(mu, sc.mobility, sc.area, mobility_rng_);
  ++slot_;
  channels_ = system_.sample_channels(users_, slot_, fading_rng_);
  const SecrecyReport next = system_.evaluate(phases, powers, channels_);

  StepResult result;
  result.terms = compute_reward(report_, next, config_.reward);
  result.reward = result.terms.total;
  result.report = next;
  report_ = next;
  state_ = assemble(next);
  result.state = state_;
  result.done = done();
  push_observation();

  if (trace_ != nullptr) {
    nlohmann::json rec;
    rec["episode"] = episode_;
    rec["slot"] = slot_;
    rec["positions"] = state_.positions;
    rec["powers"] = powers;
    rec["secrecy"] = next.secrecy;
    rec["mean_secrecy"] = next.mean_secrecy;
    rec["reward"] = result.reward;
    *trace_ << rec.dump() << '\n';
  }
  return result;
}

Eigen::MatrixXd SecureUplinkEnv::window() const {
  if (history_.empty()) throw std::logic_error("window before reset");
  const int h = config_.history;
  Eigen::MatrixXd w(history_.front().size(), h);
  const int pad = h - static_cast<int>(history_.size());
  for (int t = 0; t < h; ++t) {
    const int idx = std::max(0, t - pad);
    w.col(t) = history_[static_cast<std::size_t>(idx)];
  }
  return w;
}

}  // namespace simsec
