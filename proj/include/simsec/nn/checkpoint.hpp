#pragma once

// JSON checkpoints: network configuration plus every named parameter array.
// Doubles are written with round-trip precision, so load(save(x)) == x.

#include <memory>
#include <string>

#include "simsec/nn/actor_critic.hpp"

namespace simsec::nn {

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ActorCritic& net);
// Throws std::runtime_error on I/O failure, version or shape mismatch.
std::unique_ptr<ActorCritic> load_checkpoint(const std::string& path);
void load_parameters(const std::string& path, ParameterStore& store);

}  // namespace simsec::nn
