#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "simsec/ppo/objectives.hpp"
#include "simsec/ppo/replay_buffer.hpp"
#include "simsec/ppo/trainer.hpp"

using namespace simsec;
using namespace simsec::ppo;

namespace {

EnvConfig small_env() {
  EnvConfig env;
  env.scenario.layers = 2;
  env.scenario.atoms_per_layer = 4;
  env.slots_per_episode = 6;
  env.history = 3;
  return env;
}

nn::NetworkConfig small_net() {
  nn::NetworkConfig net;
  net.hidden = 8;
  net.lstm_layers = 1;
  net.heads = 2;
  return net;
}

TrainerConfig small_trainer() {
  TrainerConfig t;
  t.episodes = 6;
  t.warmup_episodes = 2;
  t.update_interval = 1;
  t.batch_size = 8;
  t.update_epochs = 3;
  t.seed = 5;
  return t;
}

Transition transition(double reward) {
  Transition t;
  t.reward = reward;
  return t;
}

}  // namespace

TEST_CASE("gae") {
  const std::vector<double> r{1.0, -0.5, 2.0};
  const std::vector<double> v{0.3, 0.7, -0.2};
  const std::vector<std::uint8_t> d{0, 0, 1};
  const double g = 0.9;
  const AdvantageBatch one = gae_advantages(r, v, d, 5.0, g, 0.0);
  CHECK(one.advantages[0] == r[0] + g * v[1] - v[0]);
  CHECK(one.advantages[1] == r[1] + g * v[2] - v[1]);
  CHECK(one.advantages[2] == r[2] - v[2]);
  CHECK(one.returns[1] == doctest::Approx(one.advantages[1] + v[1]));

  // lambda = 1: Monte-Carlo return minus the baseline.
  const AdvantageBatch mc = gae_advantages(r, v, d, 5.0, g, 1.0);
  CHECK(mc.advantages[0] == doctest::Approx(r[0] + g * r[1] + g * g * r[2] - v[0]).epsilon(1e-14));
  CHECK(mc.advantages[1] == doctest::Approx(r[1] + g * r[2] - v[1]).epsilon(1e-14));
  CHECK(mc.advantages[2] == doctest::Approx(r[2] - v[2]).epsilon(1e-14));

  // Fixed point of the Bellman equation.
  const int n = 50;
  const double c = 0.7;
  const std::vector<double> rc(n, c), vc(n, c / (1.0 - 0.98));
  const std::vector<std::uint8_t> live(n, 0);
  const AdvantageBatch fp = gae_advantages(rc, vc, live, c / (1.0 - 0.98), 0.98, 0.95);
  for (double a : fp.advantages) CHECK(std::abs(a) < 1e-10);

  // Done cuts the bootstrap and the lambda trace.
  const AdvantageBatch cut = gae_advantages({1.0, 1.0}, {0.0, 0.0}, {1, 0}, 10.0, 0.5, 1.0);
  CHECK(cut.advantages[0] == 1.0);
  CHECK(cut.advantages[1] == 6.0);

  CHECK_THROWS(gae_advantages({}, {}, {}, 0.0, 0.9, 0.9));
  CHECK_THROWS(gae_advantages({1.0}, {1.0, 2.0}, {0}, 0.0, 0.9, 0.9));
}

TEST_CASE("advantage normalisation") {
  std::vector<double> a{1.0, 2.0, 3.0, 10.0};
  normalize(a);
  double m = 0.0, s = 0.0;
  for (double x : a) m += x;
  m /= 4.0;
  for (double x : a) s += (x - m) * (x - m);
  CHECK(std::abs(m) < 1e-15);
  CHECK(s / 4.0 == doctest::Approx(1.0));
  std::vector<double> single{3.0};
  normalize(single);
  CHECK(single[0] == 0.0);
}

TEST_CASE("clipped surrogate") {
  const std::vector<double> adv{0.5, -1.0, 2.0};
  const std::vector<double> same{-3.0, 1.0, 0.25};
  const SurrogateLoss unit = clipped_policy_loss(same, same, adv, 0.3);
  CHECK(unit.loss == doctest::Approx(-(0.5 - 1.0 + 2.0) / 3.0));
  CHECK(unit.clip_fraction == 0.0);

  CHECK(clipped_surrogate(1.5, 1.0, 0.7, 1.3) == doctest::Approx(1.3));
  const SurrogateLoss hi = clipped_policy_loss({std::log(1.5)}, {0.0}, {1.0}, 0.3);
  CHECK(hi.loss == doctest::Approx(-1.3));
  CHECK(hi.d_log_pi[0] == 0.0);
  // Negative advantage with a collapsing ratio is held at (1 - eps) A.
  for (double ratio : {0.5, 1e-3, 1e-12}) {
    CHECK(clipped_surrogate(ratio, -2.0, 0.7, 1.3) == doctest::Approx(-1.4));
    CHECK(clipped_surrogate_grad(ratio, -2.0, 0.7, 1.3) == 0.0);
  }
  // Inside the band the gradient is r A.
  CHECK(clipped_surrogate_grad(1.1, -2.0, 0.7, 1.3) == doctest::Approx(-2.2));

  // Bound: contribution never exceeds (1 + eps)|A|, inclusive of the gradient sign.
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> lp, lo, a;
  for (int i = 0; i < 500; ++i) {
    lp.push_back(g(rng));
    lo.push_back(g(rng));
    a.push_back(3.0 * g(rng));
  }
  for (int i = 0; i < 500; ++i) {
    const double ratio = std::exp(lp[i] - lo[i]);
    CHECK(clipped_surrogate(ratio, a[i], 0.7, 1.3) <= 1.3 * std::abs(a[i]) + 1e-12);
  }
  // d_log_pi matches finite differences away from the kinks.
  const SurrogateLoss l0 = clipped_policy_loss(lp, lo, a, 0.3);
  for (int i = 0; i < 500; i += 7) {
    std::vector<double> up = lp, dn = lp;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double fd = (clipped_policy_loss(up, lo, a, 0.3).loss - clipped_policy_loss(dn, lo, a, 0.3).loss) / 2e-6;
    CHECK(l0.d_log_pi[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-9));
  }
}

TEST_CASE("off-policy surrogate") {
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 0.4);
  std::vector<double> lp, lo, adv;
  for (int i = 0; i < 64; ++i) {
    lp.push_back(g(rng));
    lo.push_back(g(rng));
    adv.push_back(g(rng) * 5.0);
  }
  const SurrogateLoss a = opdu_loss(lp, lo, lo, adv, 0.3);
  const SurrogateLoss b = clipped_policy_loss(lp, lo, adv, 0.3);
  CHECK(std::abs(a.loss - b.loss) < 1e-10);

  const SurrogateLoss all_one = opdu_loss(lo, lo, lo, adv, 0.3);
  double mean = 0.0;
  for (double x : adv) mean += x / 64.0;
  CHECK(all_one.loss == doctest::Approx(-mean));

  // pi_old / mu = 2: bounds (1.4, 2.6).
  const double lmu = std::log(0.25);
  const double lold = std::log(0.5);
  auto contribution = [&](double ratio, double advantage) {
    return -opdu_loss({lmu + std::log(ratio)}, {lold}, {lmu}, {advantage}, 0.3).loss;
  };
  CHECK(contribution(3.0, 1.0) == doctest::Approx(2.6));
  CHECK(contribution(2.0, 1.0) == doctest::Approx(2.0));
  CHECK(contribution(1.0, -1.0) == doctest::Approx(-1.4));
  CHECK(contribution(1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS(opdu_loss({0.0}, {0.0}, {0.0}, {1.0}, 1.5));
  CHECK_THROWS(opdu_loss({}, {}, {}, {}, 0.3));
}

TEST_CASE("kl estimate") {
  CHECK(kl_estimate({-1.0, 2.0}, {-1.0, 2.0}) == 0.0);
  Rng rng(11);
  const Eigen::VectorXd mu_mean = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd shift = (Eigen::VectorXd(3) << 0.3, -0.2, 0.5).finished();
  const Eigen::VectorXd log_std = Eigen::VectorXd::Constant(3, std::log(0.6));
  std::vector<double> lmu, lpi;
  for (int i = 0; i < 100000; ++i) {
    const nn::PolicySample s = nn::sample_gaussian(mu_mean, log_std, rng);
    lmu.push_back(s.log_density);
    lpi.push_back(nn::gaussian_log_density(s.raw, shift, log_std));
  }
  const double closed = shift.squaredNorm() / (2.0 * 0.36);
  CHECK(std::abs(kl_estimate(lmu, lpi) / closed - 1.0) < 0.05);

  // Unequal variances: the two directions differ.
  const Eigen::VectorXd narrow = Eigen::VectorXd::Constant(1, std::log(0.5));
  const Eigen::VectorXd wide = Eigen::VectorXd::Constant(1, std::log(1.5));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  std::vector<double> a1, a2, b1, b2;
  for (int i = 0; i < 50000; ++i) {
    const nn::PolicySample s = nn::sample_gaussian(zero, narrow, rng);
    a1.push_back(s.log_density);
    a2.push_back(nn::gaussian_log_density(s.raw, zero, wide));
    const nn::PolicySample t = nn::sample_gaussian(zero, wide, rng);
    b1.push_back(t.log_density);
    b2.push_back(nn::gaussian_log_density(t.raw, zero, narrow));
  }
  CHECK(std::abs(kl_estimate(a1, a2) - kl_estimate(b1, b2)) > 0.5);
}

TEST_CASE("alpha adaptation") {
  CHECK(adapt_alpha(0.5, 1.0, 0.5, 0.05) == 0.25);
  CHECK(adapt_alpha(0.5, 1.0, 0.5, 0.3) == 0.3);
  double a = 0.5;
  for (int i = 0; i < 5; ++i) a = adapt_alpha(a, 0.1, 0.5, 0.05);
  CHECK(a == doctest::Approx(0.5 * std::pow(1.05, 5)));
  for (int i = 0; i < 100; ++i) a = adapt_alpha(a, 0.5, 0.5, 0.05);
  CHECK(a == 1.0);
  CHECK(adapt_alpha(0.8, 1e300, 0.5, 0.05) == 0.05);
  Rng rng(8);
  std::exponential_distribution<double> kl(1.0);
  a = 0.5;
  for (int i = 0; i < 1000; ++i) {
    a = adapt_alpha(a, kl(rng), 0.5, 0.05);
    CHECK(a >= 0.05);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("policy-weighted returns") {
  const std::vector<double> r{1.0, 2.0, 4.0};
  const std::vector<double> ones(3, 1.0);
  const std::vector<double> plain = pbe_return(r, ones, 0.7);
  const std::vector<double> disc = discounted_returns(r, 0.7);
  for (int i = 0; i < 3; ++i) CHECK(plain[i] == doctest::Approx(disc[i]).epsilon(1e-15));
  CHECK(pbe_return({3.0}, {0.25}, 0.7)[0] == 0.75);

  const std::vector<double> w{0.5, 0.25, 0.75};
  const double g = 0.5;
  const std::vector<double> out = pbe_return(r, w, g);
  CHECK(out[0] == 1.0 * 0.5 + g * 2.0 * (0.5 * 0.25) + g * g * 4.0 * (0.5 * 0.25 * 0.75));
  CHECK(out[1] == 2.0 * 0.25 + g * 4.0 * (0.25 * 0.75));
  CHECK(out[2] == 4.0 * 0.75);
  CHECK_THROWS(pbe_return({}, {}, 0.7));

  CHECK(pbe_step_weight(0.3, 0.7) == 1.0);
  CHECK(pbe_step_weight(std::log(0.25), 0.7) == doctest::Approx(std::pow(0.25, 0.7)));

  CHECK(pbe_q_backup(1.5, {3.0, 4.0}, 0.9, true) == 1.5);
  CHECK(pbe_q_backup(1.5, {3.0}, 0.9, false) == doctest::Approx(1.5 + 0.9 * 3.0));
  CHECK(pbe_q_backup(1.0, {0.5, 0.5}, {2.0, 6.0}, 0.5, false) == doctest::Approx(1.0 + 0.5 * 4.0));
  CHECK(pbe_q_backup(1.0, {2.0, 6.0}, 0.5, false) == doctest::Approx(3.0));
}

TEST_CASE("critic loss") {
  const CriticLoss zero = critic_loss({1.0, -2.0}, {1.0, -2.0});
  CHECK(zero.loss == 0.0);
  CHECK(critic_loss({0.0, 0.0, 0.0}, {1.7, 1.7, 1.7}).loss == doctest::Approx(1.7 * 1.7));
  const CriticLoss l = critic_loss({1.0, 3.0}, {0.0, 0.0});
  CHECK(l.d_value[1] == doctest::Approx(3.0));
  CHECK_THROWS(critic_loss({}, {}));
}

TEST_CASE("replay buffer sampling") {
  ReplayConfig cfg;
  cfg.threshold_decay = 1.0;
  ReplayBuffer buf(cfg);
  CHECK_THROWS(buf.sample(1, *std::make_unique<Rng>(1)));
  for (int i = 0; i < 10; ++i) buf.insert(transition(1.0));
  Rng rng(21);
  std::vector<int> counts(10, 0);
  for (std::size_t s : buf.sample(10000, rng)) ++counts[s];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 21.666);  // chi-square, 9 dof, p = 0.01

  ReplayBuffer prop(cfg);
  for (int i = 1; i <= 4; ++i) prop.insert(transition(static_cast<double>(i)));
  CHECK(prop.total_priority() == doctest::Approx(10.0));
  std::vector<int> pc(4, 0);
  for (std::size_t s : prop.sample(40000, rng)) ++pc[s];
  for (int i = 0; i < 4; ++i) CHECK(pc[i] / 40000.0 == doctest::Approx((i + 1) / 10.0).epsilon(0.05));
}

TEST_CASE("replay buffer eviction") {
  ReplayConfig cfg;
  cfg.capacity = 2;
  cfg.threshold_decay = 1.0;
  ReplayBuffer buf(cfg);
  buf.insert(transition(1.0));
  buf.insert(transition(5.0));
  buf.insert(transition(3.0));
  REQUIRE(buf.size() == 2);
  std::vector<double> kept;
  for (std::size_t s : buf.occupied()) kept.push_back(buf.at(s).reward);
  std::sort(kept.begin(), kept.end());
  CHECK(kept == std::vector<double>{3.0, 5.0});
  CHECK_FALSE(buf.insert(transition(-4.0)));
  CHECK(buf.min_priority() == 3.0);

  // Floor and threshold tracking.
  ReplayConfig ema;
  ema.threshold_decay = 0.5;
  ema.initial_threshold = 2.0;
  ReplayBuffer e(ema);
  e.insert(transition(1.0));
  CHECK(e.priority(0) == ema.priority_floor);
  CHECK(e.threshold() == 1.5);
  e.insert(transition(4.0));
  CHECK(e.priority(1) == 2.5);
  e.update_priority(1, -3.0);
  CHECK(e.priority(1) == ema.priority_floor);
  CHECK(e.total_priority() == doctest::Approx(2 * ema.priority_floor));

  // Capacity and a monotone retained minimum under pressure.
  ReplayConfig press;
  press.capacity = 16;
  press.threshold_decay = 0.9;
  ReplayBuffer p(press);
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  double last_min = 0.0;
  for (int i = 0; i < 500; ++i) {
    p.insert(transition(g(rng)));
    CHECK(p.size() <= 16);
    if (p.size() == 16) {
      CHECK(p.min_priority() >= last_min);
      last_min = p.min_priority();
    }
    for (std::size_t s : p.occupied()) CHECK(p.priority(s) > 0.0);
  }
}

TEST_CASE("trainer configuration") {
  TrainerConfig t;
  CHECK(t.effective_update_interval() == 4);
  t.update_interval = 2;
  CHECK(t.effective_update_interval() == 2);
  t.clip = 1.0;
  CHECK_THROWS(t.validate());
  t = TrainerConfig{};
  t.alpha_init = 0.01;
  CHECK_THROWS(t.validate());
  t = TrainerConfig{};
  t.discount = 1.0;
  CHECK_THROWS(t.validate());
}

TEST_CASE("stored behaviour densities are reproduced before an update") {
  TrainerConfig t = small_trainer();
  t.warmup_episodes = 100;
  Trainer tr(default_env_factory(small_env()), small_net(), t);
  tr.run_episode();
  const ReplayBuffer& buf = tr.buffer();
  REQUIRE(buf.size() == 6);
  const nn::ActorCritic& net = tr.network();
  for (std::size_t s : buf.occupied()) {
    const Transition& x = buf.at(s);
    const nn::ActorCritic::Output o = net.forward(nn::ActorCritic::pack({&x.window}), nullptr);
    const double lp = nn::gaussian_log_density(x.action, o.mean.col(0), net.log_std());
    CHECK(std::abs(lp - x.log_behavior) < 1e-10);
  }
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  TrainerConfig t = small_trainer();
  t.learning_rate = 0.0;
  Trainer tr(default_env_factory(small_env()), small_net(), t);
  std::vector<Eigen::MatrixXd> before;
  for (const nn::Parameter& p : tr.network().params().entries()) before.push_back(p.value);
  const std::vector<EpisodeRecord> log = tr.train();
  CHECK(tr.rounds_done() == 4);
  CHECK(log.back().round.ran);
  std::size_t i = 0;
  for (const nn::Parameter& p : tr.network().params().entries()) CHECK(p.value == before[i++]);
}

TEST_CASE("training is deterministic") {
  auto run = [] {
    Trainer tr(default_env_factory(small_env()), small_net(), small_trainer());
    std::vector<std::string> lines;
    for (EpisodeRecord r : tr.train()) {
      r.wall_time = 0.0;
      lines.push_back(to_json_line(r));
    }
    lines.push_back(std::to_string(tr.evaluate(2, 77).mean_asr));
    return lines;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
}

TEST_CASE("training updates and logs") {
  TrainerConfig t = small_trainer();
  t.checkpoint_every = 3;
  Trainer tr(default_env_factory(small_env()), small_net(), t);
  std::ostringstream log;
  tr.set_log(&log);
  const auto dir = std::filesystem::temp_directory_path() / "simsec_trainer_ckpt";
  std::filesystem::remove_all(dir);
  tr.set_checkpoint_dir(dir.string());
  std::vector<Eigen::MatrixXd> before;
  for (const nn::Parameter& p : tr.network().params().entries()) before.push_back(p.value);
  const std::vector<EpisodeRecord> recs = tr.train();
  CHECK(recs.size() == 6);
  CHECK_FALSE(recs[1].round.ran);
  CHECK(recs[2].round.ran);
  for (const EpisodeRecord& r : recs) {
    CHECK(r.round.alpha >= t.alpha_min);
    CHECK(r.round.alpha <= 1.0);
    if (r.round.ran) {
      CHECK(r.round.epochs >= 1);
      CHECK(r.round.epochs <= t.update_epochs);
      CHECK(r.round.online + r.round.offline <= t.batch_size);
    }
  }
  bool changed = false;
  std::size_t i = 0;
  for (const nn::Parameter& p : tr.network().params().entries()) changed |= p.value != before[i++];
  CHECK(changed);
  std::istringstream in(log.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    for (const char* key : {"episode", "mean_reward", "mean_ASR", "user_ASR", "KL", "alpha_KL",
                            "policy_loss", "value_loss", "wall_time"}) {
      CHECK(j.contains(key));
    }
    CHECK(j["user_ASR"].size() == 2);
    ++n;
  }
  CHECK(n == 6);
  CHECK(std::filesystem::exists(dir / "checkpoint_3.json"));
  CHECK(std::filesystem::exists(dir / "checkpoint_6.json"));
  std::filesystem::remove_all(dir);

  const EvaluationResult ev = tr.evaluate(3, 123);
  CHECK(ev.episodes == 3);
  CHECK(ev.episode_asr.size() == 3);
  CHECK(ev.std_asr >= 0.0);
}

TEST_CASE("non-finite loss aborts the round") {
  Trainer tr(default_env_factory(small_env()), small_net(), small_trainer());
  tr.run_episode();
  std::vector<std::vector<Transition>> fresh(1);
  Transition x = tr.buffer().at(0);
  x.reward = std::nan("");
  fresh[0].push_back(x);
  CHECK_THROWS_AS(tr.update_round(fresh), DivergenceError);
}

TEST_CASE("ablated trainer is plain recurrent PPO") {
  TrainerConfig t = small_trainer();
  t.use_opdu = false;
  t.use_pf = false;
  t.warmup_episodes = 100;
  Trainer tr(default_env_factory(small_env()), small_net(), t);
  tr.run_episode();
  tr.run_episode();
  std::vector<std::vector<Transition>> fresh(1);
  for (std::size_t s : tr.buffer().occupied()) {
    if (s < 6) fresh[0].push_back(tr.buffer().at(s));
  }
  RoundStats stats;
  const UpdateBatch batch = tr.build_batch(fresh, stats);
  CHECK(stats.offline == 0);
  CHECK(batch.size() == 6);
  CHECK(batch.log_behavior == batch.log_old);

  // Reference: GAE on the critic, discounted-return targets, standard loss.
  nn::ActorCritic& net = tr.network();
  std::vector<const Eigen::MatrixXd*> w;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  for (const Transition& x : fresh[0]) {
    w.push_back(&x.window);
    rewards.push_back(x.reward);
    dones.push_back(x.done ? 1 : 0);
  }
  const nn::ActorCritic::Output o = net.forward(nn::ActorCritic::pack(w), nullptr);
  const std::vector<double> values(o.value.data(), o.value.data() + o.value.size());
  std::vector<double> adv = gae_advantages(rewards, values, dones, 0.0, t.discount, t.gae_lambda).advantages;
  const std::vector<double> ret = discounted_returns(rewards, t.discount);
  // The batch order is shuffled; match entries by reward and target.
  std::vector<double> adv_sorted = adv;
  normalize(adv_sorted);
  std::vector<double> got_adv = batch.advantages, got_ret = batch.targets;
  std::vector<double> want_ret = ret;
  std::sort(adv_sorted.begin(), adv_sorted.end());
  std::sort(got_adv.begin(), got_adv.end());
  std::sort(got_ret.begin(), got_ret.end());
  std::sort(want_ret.begin(), want_ret.end());
  for (int i = 0; i < 6; ++i) {
    CHECK(got_adv[i] == doctest::Approx(adv_sorted[i]).epsilon(1e-10));
    CHECK(got_ret[i] == doctest::Approx(want_ret[i]).epsilon(1e-12));
  }

  const UpdateLoss loss = evaluate_update(net, batch, t.clip, t.value_coef, false);
  const nn::ActorCritic::Output ob = net.forward(batch.windows, nullptr);
  const Eigen::RowVectorXd lp = nn::gaussian_log_density(batch.actions, ob.mean, net.log_std());
  const std::vector<double> log_pi(lp.data(), lp.data() + lp.size());
  const std::vector<double> v(ob.value.data(), ob.value.data() + ob.value.size());
  const double expect = clipped_policy_loss(log_pi, batch.log_old, batch.advantages, t.clip).loss +
                        t.value_coef * critic_loss(v, batch.targets).loss;
  CHECK(std::abs(loss.total - expect) < 1e-12);
}
