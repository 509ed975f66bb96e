#include "simsec/ppo/replay_buffer.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace simsec::ppo {

void ReplayConfig::validate() const {
  if (capacity < 1) throw std::invalid_argument("replay capacity must be positive");
  if (!(priority_floor > 0.0)) throw std::invalid_argument("priority floor must be positive");
  if (!(threshold_decay >= 0.0 && threshold_decay <= 1.0)) {
    throw std::invalid_argument("threshold decay must lie in [0, 1]");
  }
  if (!std::isfinite(initial_threshold)) throw std::invalid_argument("initial threshold must be finite");
}

ReplayBuffer::ReplayBuffer(const ReplayConfig& config)
    : config_(config), threshold_(config.initial_threshold) {
  config_.validate();
  while (leaves_ < 16 && leaves_ < config_.capacity) leaves_ *= 2;
  tree_.assign(2 * leaves_, 0.0);
}

double ReplayBuffer::min_priority() const {
  if (by_priority_.empty()) throw std::logic_error("empty replay buffer");
  return by_priority_.begin()->first;
}

void ReplayBuffer::set_leaf(std::size_t slot, double value) {
  if (slot >= leaves_) {
    std::size_t grown = leaves_;
    while (grown <= slot) grown *= 2;
    std::vector<double> tree(2 * grown, 0.0);
    for (std::size_t i = 0; i < leaves_; ++i) tree[grown + i] = tree_[leaves_ + i];
    for (std::size_t i = grown - 1; i >= 1; --i) tree[i] = tree[2 * i] + tree[2 * i + 1];
    tree_ = std::move(tree);
    leaves_ = grown;
  }
  std::size_t i = leaves_ + slot;
  tree_[i] = value;
  for (i /= 2; i >= 1; i /= 2) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

bool ReplayBuffer::insert(Transition t) {
  const double p = std::max(t.reward - threshold_, config_.priority_floor);
  threshold_ = config_.threshold_decay * threshold_ + (1.0 - config_.threshold_decay) * t.reward;

  std::size_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
    slots_[slot] = std::move(t);
  } else {
    slot = slots_.size();
    slots_.push_back(std::move(t));
    used_.push_back(0);
    order_.push_back(0);
  }
  const std::uint64_t id = next_id_++;
  used_[slot] = 1;
  order_[slot] = id;
  slot_of_id_[id] = slot;
  by_priority_.emplace(p, id);
  set_leaf(slot, p);
  ++size_;

  if (size_ <= config_.capacity) return true;
  const auto victim = by_priority_.begin();
  const std::size_t vslot = slot_of_id_.at(victim->second);
  const bool evicted_new = victim->second == id;
  slot_of_id_.erase(victim->second);
  by_priority_.erase(victim);
  set_leaf(vslot, 0.0);
  used_[vslot] = 0;
  slots_[vslot] = Transition{};
  free_.push_back(vslot);
  --size_;
  return !evicted_new;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> out;
  out.reserve(count);
  const double total = tree_[1];
  for (std::size_t n = 0; n < count; ++n) {
    double target = u(rng) * total;
    std::size_t i = 1;
    while (i < leaves_) {
      const std::size_t left = 2 * i;
      if (target < tree_[left] || tree_[left + 1] <= 0.0) {
        i = left;
      } else {
        target -= tree_[left];
        i = left + 1;
      }
    }
    out.push_back(i - leaves_);
  }
  return out;
}

const Transition& ReplayBuffer::at(std::size_t slot) const {
  if (slot >= used_.size() || used_[slot] == 0) throw std::out_of_range("replay slot not occupied");
  return slots_[slot];
}

double ReplayBuffer::priority(std::size_t slot) const {
  if (slot >= used_.size() || used_[slot] == 0) throw std::out_of_range("replay slot not occupied");
  return tree_[leaves_ + slot];
}

void ReplayBuffer::update_priority(std::size_t slot, double priority) {
  if (slot >= used_.size() || used_[slot] == 0) throw std::out_of_range("replay slot not occupied");
  const double p = std::max(priority, config_.priority_floor);
  by_priority_.erase({tree_[leaves_ + slot], order_[slot]});
  by_priority_.emplace(p, order_[slot]);
  set_leaf(slot, p);
}

std::vector<std::size_t> ReplayBuffer::occupied() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < used_.size(); ++s) {
    if (used_[s] != 0) out.push_back(s);
  }
  return out;
}

}  // namespace simsec::ppo
