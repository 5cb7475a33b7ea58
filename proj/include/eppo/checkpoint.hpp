#pragma once

#include <filesystem>

#include "json.hpp"

#include "eppo/ppo.hpp"

namespace eppo::harness {

inline constexpr int kCheckpointVersion = 1;

// Parameters, log-std, Adam states and normalizer statistics of an agent. Doubles are
// written in shortest round-trip form, so save/load is bit-exact.
nlohmann::ordered_json checkpoint_to_json(const ppo::Agent& agent);
// Overwrites the agent's state; throws std::runtime_error on a version or shape mismatch.
void restore_checkpoint(const nlohmann::json& j, ppo::Agent& agent);

void save_checkpoint(const std::filesystem::path& path, const ppo::Agent& agent);
void load_checkpoint(const std::filesystem::path& path, ppo::Agent& agent);

}  // namespace eppo::harness
