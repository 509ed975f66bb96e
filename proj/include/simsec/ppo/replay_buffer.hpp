#pragma once

// Prioritised store of past transitions for off-policy reuse.
//
// priority = max(reward - threshold, floor), where threshold is an
// exponential moving average of inserted rewards. Sampling is proportional to
// priority (sum tree). When full, the lowest-priority entry is evicted, which
// may be the one just inserted; ties evict the oldest.

#include <cstdint>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simsec/types.hpp"

namespace simsec::ppo {

struct Transition {
  Eigen::MatrixXd window;       // obs_dim x H at s_t
  Eigen::MatrixXd next_window;  // obs_dim x H at s_{t+1}
  Eigen::VectorXd action;       // raw (pre-clip) draw
  double reward = 0.0;
  bool done = false;
  double log_behavior = 0.0;    // log mu(a | s) at collection time
};

struct ReplayConfig {
  std::size_t capacity = 1000000;
  double priority_floor = 1e-3;
  double threshold_decay = 0.99;  // 1.0 freezes the threshold
  double initial_threshold = 0.0;

  void validate() const;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(const ReplayConfig& config);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  bool empty() const { return size_ == 0; }
  double threshold() const { return threshold_; }
  double total_priority() const { return tree_[1]; }
  double min_priority() const;

  // Returns false when the new entry was itself evicted.
  bool insert(Transition t);
  // Indices into storage, drawn with replacement; throws when empty.
  std::vector<std::size_t> sample(std::size_t count, Rng& rng) const;
  const Transition& at(std::size_t slot) const;
  double priority(std::size_t slot) const;
  void update_priority(std::size_t slot, double priority);
  std::vector<std::size_t> occupied() const;

 private:
  void set_leaf(std::size_t slot, double value);

  ReplayConfig config_;
  std::size_t leaves_ = 1;
  std::vector<double> tree_;       // 1-based heap layout
  std::vector<Transition> slots_;
  std::vector<std::uint8_t> used_;
  std::vector<std::uint64_t> order_;
  std::set<std::pair<double, std::uint64_t>> by_priority_;  // (priority, insertion id)
  std::vector<std::size_t> free_;
  std::unordered_map<std::uint64_t, std::size_t> slot_of_id_;
  std::uint64_t next_id_ = 0;
  std::size_t size_ = 0;
  double threshold_;
};

}  // namespace simsec::ppo
