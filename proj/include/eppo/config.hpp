#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "eppo/ppo.hpp"

namespace eppo::harness {

// One (algorithm, environment, schedule, seed) training run. Algorithm, kappa and the
// hyperprior live inside `train`.
struct RunConfig {
  std::string environment = "slippery-car";
  std::string schedule = "decreasing";
  int n_tasks = 15;
  std::int64_t steps_per_task = 20000;
  std::int64_t eval_interval = 2000;
  int eval_episodes = 10;
  std::uint64_t seed = 1;
  std::filesystem::path output = "runs";
  ppo::TrainConfig train;

  // Throws ConfigError naming the offending key.
  void validate() const;
  // "<environment>_<schedule>" with ':' replaced by '-'; the experiment key used for aggregation.
  std::string experiment() const;
};

// Serialized form with every field explicit:
// {
//   "algorithm", "environment", "schedule", "n_tasks", "steps_per_task", "eval_interval",
//   "eval_episodes", "seed", "kappa", "output",
//   "train": {"horizon", "epochs", "minibatch", "clip_epsilon", "actor_lr", "critic_lr",
//             "gamma", "lambda", "max_grad_norm", "actor_hidden", "critic_hidden", "layer_norm"},
//   "hyperprior": {"mu_omega0", "sigma_omega0", "nu_shape", "nu_rate", "alpha_shape",
//                  "alpha_rate", "beta_shape", "beta_rate", "alpha_shift", "xi"}
// }
// Missing keys keep their defaults; unknown keys and wrong types raise ConfigError.
nlohmann::ordered_json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace eppo::harness
