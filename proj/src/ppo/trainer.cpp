#include "simsec/ppo/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "simsec/nn/checkpoint.hpp"
#include "simsec/ppo/objectives.hpp"

namespace simsec::ppo {

namespace {

constexpr int kForwardChunk = 256;

nn::AdamWConfig optimizer_config(const TrainerConfig& c) {
  nn::AdamWConfig a;
  a.learning_rate = c.learning_rate;
  a.weight_decay = c.weight_decay;
  return a;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void TrainerConfig::validate() const {
  if (episodes < 0 || warmup_episodes < 0 || evolution_rounds < 0 || update_interval < 0) {
    throw std::invalid_argument("episode counts must be non-negative");
  }
  if (batch_size < 1 || update_epochs < 1) throw std::invalid_argument("batch size and epochs must be positive");
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("clip epsilon must lie in (0, 1)");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  if (!(clipped_discount >= 0.0 && clipped_discount <= 1.0)) {
    throw std::invalid_argument("clipped discount must lie in [0, 1]");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("GAE lambda must lie in [0, 1]");
  if (!(alpha_min > 0.0 && alpha_min <= 1.0) || !(alpha_init >= alpha_min && alpha_init <= 1.0)) {
    throw std::invalid_argument("need 0 < alpha_min <= alpha_init <= 1");
  }
  if (!(target_kl > 0.0) || !(kl_threshold > 0.0)) throw std::invalid_argument("KL thresholds must be positive");
  if (!(probability_weighting >= 0.0)) throw std::invalid_argument("probability weighting must be non-negative");
  if (!(value_coef >= 0.0) || !(max_grad_norm > 0.0)) {
    throw std::invalid_argument("value coefficient must be >= 0 and grad clip > 0");
  }
  if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0)) {
    throw std::invalid_argument("learning rate and weight decay must be non-negative");
  }
  if (checkpoint_every < 0 || eval_episodes < 0) throw std::invalid_argument("negative schedule value");
  replay.validate();
}

int TrainerConfig::effective_update_interval() const {
  if (update_interval > 0) return update_interval;
  const int remaining = std::max(0, episodes - warmup_episodes);
  if (evolution_rounds == 0 || remaining == 0) return 1;
  return std::max(1, (remaining + evolution_rounds - 1) / evolution_rounds);
}

EnvFactory default_env_factory(const EnvConfig& config) {
  return [config](std::uint64_t seed) { return std::make_unique<SecureUplinkEnv>(config, seed); };
}

nn::NetworkConfig network_for(const EnvConfig& env, nn::NetworkConfig base) {
  base.obs_dim = 4 * env.scenario.users + 1;
  base.action_dim = env.scenario.layers * env.scenario.atoms_per_layer + env.scenario.users;
  base.history = env.history;
  return base;
}

EvaluationResult evaluate_actions(SecureUplinkEnv& env, int episodes, const ActionPolicy& policy) {
  if (episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  EvaluationResult res;
  res.episodes = episodes;
  double reward_total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    double asr = 0.0;
    int slots = 0;
    while (!env.done()) {
      const StepResult step = env.step(policy(env));
      asr += step.report.sum_secrecy;
      reward_total += step.reward;
      ++slots;
    }
    res.episode_asr.push_back(slots > 0 ? asr / slots : 0.0);
  }
  res.mean_asr = mean_of(res.episode_asr);
  double var = 0.0;
  for (double a : res.episode_asr) var += (a - res.mean_asr) * (a - res.mean_asr);
  res.std_asr = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
  res.mean_reward = reward_total / episodes;
  return res;
}

ActionPolicy greedy_policy(const nn::ActorCritic& net) {
  return [&net](const SecureUplinkEnv& env) -> Eigen::VectorXd {
    const Eigen::MatrixXd w = env.window();
    const nn::ActorCritic::Output out = net.forward(nn::ActorCritic::pack({&w}), nullptr);
    return out.mean.col(0).cwiseMax(-1.0).cwiseMin(1.0);
  };
}

Trainer::Trainer(const EnvFactory& factory, const nn::NetworkConfig& net, const TrainerConfig& config)
    : config_(config),
      factory_(factory),
      env_(factory(config.seed)),
      net_(std::make_unique<nn::ActorCritic>(network_for(env_->config(), net), config.seed)),
      optimizer_(net_->params(), optimizer_config(config)),
      buffer_(config.replay),
      policy_rng_(make_stream(config.seed, 23)),
      batch_rng_(make_stream(config.seed, 29)),
      alpha_(config.alpha_init) {
  config_.validate();
}

std::vector<double> Trainer::log_densities(const std::vector<const Transition*>& items,
                                           std::vector<double>* values, bool next_values) const {
  std::vector<double> out;
  out.reserve(items.size());
  if (values != nullptr) values->clear();
  const Eigen::VectorXd log_std = net_->log_std();
  for (std::size_t start = 0; start < items.size(); start += kForwardChunk) {
    const std::size_t stop = std::min(items.size(), start + kForwardChunk);
    std::vector<const Eigen::MatrixXd*> windows;
    Eigen::MatrixXd actions(net_->config().action_dim, static_cast<Eigen::Index>(stop - start));
    for (std::size_t i = start; i < stop; ++i) {
      windows.push_back(next_values ? &items[i]->next_window : &items[i]->window);
      actions.col(static_cast<Eigen::Index>(i - start)) = items[i]->action;
    }
    const nn::ActorCritic::Output o = net_->forward(nn::ActorCritic::pack(windows), nullptr);
    if (!next_values) {
      const Eigen::RowVectorXd lp = nn::gaussian_log_density(actions, o.mean, log_std);
      out.insert(out.end(), lp.data(), lp.data() + lp.size());
    }
    if (values != nullptr) values->insert(values->end(), o.value.data(), o.value.data() + o.value.size());
  }
  return out;
}

UpdateBatch Trainer::build_batch(const std::vector<std::vector<Transition>>& fresh, RoundStats& stats) {
  const TrainerConfig& c = config_;
  const int b = c.batch_size;
  const int n_off = c.use_opdu && !buffer_.empty() ? static_cast<int>(std::ceil(alpha_ * b)) : 0;

  std::vector<const Transition*> items;
  std::vector<double> log_behavior, log_old, advantages, targets;

  // Fresh episodes: GAE on the critic's values, PF or discounted targets.
  std::vector<const Transition*> fresh_items;
  std::vector<double> fresh_adv, fresh_target, fresh_logp;
  for (const std::vector<Transition>& episode : fresh) {
    if (episode.empty()) continue;
    std::vector<const Transition*> ep;
    for (const Transition& t : episode) ep.push_back(&t);
    std::vector<double> values;
    const std::vector<double> logp = log_densities(ep, &values, false);
    std::vector<double> rewards;
    std::vector<std::uint8_t> dones;
    for (const Transition* t : ep) {
      rewards.push_back(t->reward);
      dones.push_back(t->done ? 1 : 0);
    }
    double next_value = 0.0;
    if (!ep.back()->done) {
      std::vector<double> nv;
      log_densities({ep.back()}, &nv, true);
      next_value = nv.front();
    }
    const AdvantageBatch gae = gae_advantages(rewards, values, dones, next_value, c.discount, c.gae_lambda);
    std::vector<double> tgt;
    if (c.use_pf) {
      std::vector<double> w;
      for (double l : logp) w.push_back(pbe_step_weight(l, c.probability_weighting));
      tgt = pbe_return(rewards, w, c.clipped_discount);
    } else {
      tgt = discounted_returns(rewards, c.discount);
    }
    fresh_items.insert(fresh_items.end(), ep.begin(), ep.end());
    fresh_adv.insert(fresh_adv.end(), gae.advantages.begin(), gae.advantages.end());
    fresh_target.insert(fresh_target.end(), tgt.begin(), tgt.end());
    fresh_logp.insert(fresh_logp.end(), logp.begin(), logp.end());
  }

  std::vector<std::size_t> order(fresh_items.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), batch_rng_);
  const std::size_t n_on = std::min(order.size(), static_cast<std::size_t>(std::max(0, b - n_off)));
  for (std::size_t j = 0; j < n_on; ++j) {
    const std::size_t i = order[j];
    items.push_back(fresh_items[i]);
    log_old.push_back(fresh_logp[i]);
    log_behavior.push_back(fresh_logp[i]);
    advantages.push_back(fresh_adv[i]);
    targets.push_back(fresh_target[i]);
  }

  // Replay samples: one-step TD advantages and bootstrapped targets.
  stats.kl_behavior = 0.0;
  if (n_off > 0) {
    std::vector<const Transition*> off;
    for (std::size_t slot : buffer_.sample(static_cast<std::size_t>(n_off), batch_rng_)) {
      off.push_back(&buffer_.at(slot));
    }
    std::vector<double> values, next_values;
    const std::vector<double> logp = log_densities(off, &values, false);
    log_densities(off, &next_values, true);
    std::vector<double> log_mu;
    for (const Transition* t : off) log_mu.push_back(t->log_behavior);
    stats.kl_behavior = kl_estimate(log_mu, logp);
    for (std::size_t i = 0; i < off.size(); ++i) {
      const Transition& t = *off[i];
      const double live = t.done ? 0.0 : 1.0;
      items.push_back(off[i]);
      log_old.push_back(logp[i]);
      log_behavior.push_back(t.log_behavior);
      advantages.push_back(t.reward + c.discount * next_values[i] * live - values[i]);
      if (c.use_pf) {
        const double w = pbe_step_weight(logp[i], c.probability_weighting);
        targets.push_back(w * (t.reward + c.clipped_discount * next_values[i] * live));
      } else {
        targets.push_back(t.reward + c.discount * next_values[i] * live);
      }
    }
    alpha_ = adapt_alpha(alpha_, stats.kl_behavior, c.kl_threshold, c.alpha_min);
  }
  stats.online = static_cast<int>(n_on);
  stats.offline = n_off;
  stats.alpha = alpha_;

  if (items.empty()) throw std::logic_error("update round without data");
  normalize(advantages);
  UpdateBatch batch;
  std::vector<const Eigen::MatrixXd*> windows;
  batch.actions.resize(net_->config().action_dim, static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    windows.push_back(&items[i]->window);
    batch.actions.col(static_cast<Eigen::Index>(i)) = items[i]->action;
  }
  batch.windows = nn::ActorCritic::pack(windows);
  batch.log_behavior = std::move(log_behavior);
  batch.log_old = std::move(log_old);
  batch.advantages = std::move(advantages);
  batch.targets = std::move(targets);
  return batch;
}

RoundStats Trainer::update_round(const std::vector<std::vector<Transition>>& fresh) {
  RoundStats stats;
  const UpdateBatch batch = build_batch(fresh, stats);
  nn::ParameterStore& store = net_->params();
  for (int e = 0; e < config_.update_epochs; ++e) {
    store.zero_grad();
    const UpdateLoss loss = evaluate_update(*net_, batch, config_.clip, config_.value_coef, true);
    if (!std::isfinite(loss.total) || !store.grads_finite()) {
      throw DivergenceError("non-finite loss or gradient in update round " + std::to_string(rounds_) +
                            " epoch " + std::to_string(e) + " (policy " + std::to_string(loss.policy) +
                            ", value " + std::to_string(loss.value) + ")");
    }
    if (e == 0) stats.first = loss;
    stats.last = loss;
    stats.kl_update = loss.approx_kl;
    if (e > 0 && loss.approx_kl > config_.target_kl) break;
    store.clip_grad_norm(config_.max_grad_norm);
    optimizer_.step();
    stats.epochs = e + 1;
  }
  stats.ran = true;
  ++rounds_;
  return stats;
}

EpisodeRecord Trainer::run_episode() {
  const auto start = std::chrono::steady_clock::now();
  EpisodeRecord rec;
  rec.episode = episode_;
  SecureUplinkEnv& env = *env_;
  env.reset();
  const int k_users = env.config().scenario.users;
  rec.user_asr.assign(static_cast<std::size_t>(k_users), 0.0);
  std::vector<Transition> episode;
  double reward_sum = 0.0;
  const Eigen::VectorXd log_std = net_->log_std();
  while (!env.done()) {
    Transition t;
    t.window = env.window();
    const nn::ActorCritic::Output out = net_->forward(nn::ActorCritic::pack({&t.window}), nullptr);
    const nn::PolicySample s = nn::sample_gaussian(out.mean.col(0), log_std, policy_rng_);
    const StepResult step = env.step(s.clipped);
    t.next_window = env.window();
    t.action = s.raw;
    t.reward = step.reward;
    t.done = step.done;
    t.log_behavior = s.log_density;
    reward_sum += step.reward;
    rec.mean_asr += step.report.sum_secrecy;
    for (int k = 0; k < k_users; ++k) rec.user_asr[static_cast<std::size_t>(k)] += step.report.secrecy[static_cast<std::size_t>(k)];
    buffer_.insert(t);
    episode.push_back(std::move(t));
  }
  const double slots = static_cast<double>(episode.size());
  rec.mean_reward = reward_sum / slots;
  rec.mean_asr /= slots;
  for (double& u : rec.user_asr) u /= slots;
  ++episode_;

  fresh_.push_back(std::move(episode));
  if (episode_ > config_.warmup_episodes) {
    const int since = episode_ - config_.warmup_episodes;
    if (since % config_.effective_update_interval() == 0) {
      if (rounds_ < config_.evolution_rounds && buffer_.size() >= static_cast<std::size_t>(config_.batch_size)) {
        rec.round = update_round(fresh_);
      }
      fresh_.clear();
    }
  } else {
    fresh_.clear();
  }
  rec.round.alpha = alpha_;

  if (!checkpoint_dir_.empty() && config_.checkpoint_every > 0 && episode_ % config_.checkpoint_every == 0) {
    std::filesystem::create_directories(checkpoint_dir_);
    nn::save_checkpoint(checkpoint_dir_ + "/checkpoint_" + std::to_string(episode_) + ".json", *net_);
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (log_ != nullptr) *log_ << to_json_line(rec) << '\n';
  return rec;
}

std::vector<EpisodeRecord> Trainer::train() {
  std::vector<EpisodeRecord> out;
  while (episode_ < config_.episodes) out.push_back(run_episode());
  return out;
}

EvaluationResult Trainer::evaluate(int episodes, std::uint64_t seed) const {
  std::unique_ptr<SecureUplinkEnv> env = factory_(seed);
  return evaluate_actions(*env, episodes, greedy_policy(*net_));
}

std::string to_json_line(const EpisodeRecord& r) {
  nlohmann::json j;
  j["episode"] = r.episode;
  j["mean_reward"] = r.mean_reward;
  j["mean_ASR"] = r.mean_asr;
  j["user_ASR"] = r.user_asr;
  j["updated"] = r.round.ran;
  j["KL"] = r.round.kl_update;
  j["KL_behavior"] = r.round.kl_behavior;
  j["alpha_KL"] = r.round.alpha;
  j["epochs"] = r.round.epochs;
  j["online"] = r.round.online;
  j["offline"] = r.round.offline;
  j["policy_loss"] = r.round.last.policy;
  j["value_loss"] = r.round.last.value;
  j["wall_time"] = r.wall_time;
  return j.dump();
}

}  // namespace simsec::ppo
