#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eppo/adam.hpp"
#include "eppo/envs.hpp"
#include "eppo/evidential.hpp"
#include "eppo/gae.hpp"
#include "eppo/mlp.hpp"
#include "eppo/policy.hpp"

namespace eppo::ppo {

enum class Algorithm { kPpo, kEppoMean, kEppoCor, kEppoInd };

std::string to_string(Algorithm a);
// Accepts "ppo", "eppo-mean", "eppo-cor", "eppo-ind"; throws std::invalid_argument.
Algorithm parse_algorithm(const std::string& name);
bool uses_evidential_critic(Algorithm a);
gae::Variant advantage_variant(Algorithm a);

struct TrainConfig {
  int horizon = 2048;
  int epochs = 10;
  int minibatch = 256;
  double clip_epsilon = 0.2;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double lambda = 0.95;
  double max_grad_norm = 0.5;
  std::vector<int> actor_hidden = {64, 64};
  std::vector<int> critic_hidden = {64, 64};
  bool layer_norm = true;
  Algorithm algorithm = Algorithm::kEppoMean;
  // Confidence radius; only used by eppo-cor and eppo-ind.
  double kappa = 0.0;
  evidential::HyperpriorConfig hyperprior;

  void validate() const;
  gae::GaeConfig gae_config() const;
};

// Running mean/variance of observations (parallel-update form). Statistics keep
// accumulating across task changes.
class ObservationNormalizer {
 public:
  static constexpr double kClip = 10.0;

  ObservationNormalizer() = default;
  explicit ObservationNormalizer(int dim);

  void update(std::span<const double> obs);
  std::vector<double> normalize(std::span<const double> obs) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& var() const { return var_; }
  double count() const { return count_; }
  void restore(std::vector<double> mean, std::vector<double> var, double count);

 private:
  std::vector<double> mean_;
  std::vector<double> var_;
  double count_ = 1e-4;
};

struct ValueMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Actor (Gaussian policy) and critic (evidential 4-output head or scalar value) with their
// optimizers and the observation normalizer.
class Agent {
 public:
  Agent(int obs_dim, int act_dim, const TrainConfig& cfg, std::uint64_t seed);

  int obs_dim() const { return actor_spec_.input_dim; }
  int act_dim() const { return actor_spec_.output_dim; }
  bool evidential() const { return critic_spec_.output_dim == 4; }

  PolicyOutput policy(std::span<const double> normalized_obs) const;
  evidential::EvidentialParams evidential_params(std::span<const double> normalized_obs) const;
  ValueMoments value(std::span<const double> normalized_obs) const;

  const nn::MlpSpec& actor_spec() const { return actor_spec_; }
  const nn::MlpSpec& critic_spec() const { return critic_spec_; }
  nn::ParamSet& actor_params() { return actor_; }
  const nn::ParamSet& actor_params() const { return actor_; }
  nn::ParamSet& critic_params() { return critic_; }
  const nn::ParamSet& critic_params() const { return critic_; }
  std::vector<double>& log_std() { return log_std_; }
  const std::vector<double>& log_std() const { return log_std_; }
  nn::AdamState& actor_optimizer() { return actor_opt_; }
  const nn::AdamState& actor_optimizer() const { return actor_opt_; }
  nn::AdamState& log_std_optimizer() { return log_std_opt_; }
  const nn::AdamState& log_std_optimizer() const { return log_std_opt_; }
  nn::AdamState& critic_optimizer() { return critic_opt_; }
  const nn::AdamState& critic_optimizer() const { return critic_opt_; }
  ObservationNormalizer& normalizer() { return normalizer_; }
  const ObservationNormalizer& normalizer() const { return normalizer_; }

  // FNV-1a over every parameter and optimizer moment; for equality checks in tests.
  std::uint64_t checksum() const;

 private:
  nn::MlpSpec actor_spec_;
  nn::MlpSpec critic_spec_;
  nn::ParamSet actor_;
  nn::ParamSet critic_;
  std::vector<double> log_std_;
  nn::AdamState actor_opt_;
  nn::AdamState log_std_opt_;
  nn::AdamState critic_opt_;
  ObservationNormalizer normalizer_;
};

// One fixed-horizon on-policy batch. values[t] describes s_t; next_values[t] describes the
// true successor s_{t+1} (pre-reset), which differs from values[t+1] at episode ends.
struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> states;   // T x obs_dim, normalized as seen by the policy
  std::vector<double> actions;  // T x act_dim, unclipped samples
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<bool> terminated;
  std::vector<bool> truncated;
  std::vector<ValueMoments> values;
  std::vector<ValueMoments> next_values;
  // Populated for the evidential critic: params of s_t and of the successor.
  std::vector<evidential::EvidentialParams> evidential;
  std::vector<evidential::EvidentialParams> next_evidential;

  // Filled by compute_targets_and_advantages.
  std::vector<double> value_targets;
  std::vector<double> advantage_means;
  std::vector<double> advantage_variances;
  std::vector<double> advantage_ucb;
  std::vector<double> advantages;  // normalized UCB, fed to the surrogate

  RolloutBuffer() = default;
  RolloutBuffer(int obs_dim, int act_dim);

  std::size_t size() const { return rewards.size(); }
  void clear();
  // Step t ends a segment: the episode ended there or the batch ends there.
  bool segment_end(std::size_t t) const;
  std::span<const double> state(std::size_t t) const;
  std::span<const double> action(std::size_t t) const;
};

// Discounted returns with bootstrap at truncation/horizon cut, then per-segment GAE mean,
// variant variance and UCB; advantages = normalize_batch(ucb) over the whole buffer.
void compute_targets_and_advantages(RolloutBuffer& buffer, const TrainConfig& cfg);

struct CriticLoss {
  double loss = 0.0;
  // d loss / d raw outputs, output_dim x batch, batch mean applied.
  nn::Matrix grad_raw;
};

// Batch mean of evl_loss(head_transform(raw_i), target_i).
CriticLoss critic_loss_evidential(const nn::Matrix& raw, std::span<const double> targets,
                                  const evidential::HyperpriorConfig& cfg);
// Batch mean of (prediction - target)^2.
CriticLoss critic_loss_mse(const nn::Matrix& predictions, std::span<const double> targets);

// Buffer-level forms over the collection-time critic outputs.
double critic_loss_evidential(const RolloutBuffer& buffer, const evidential::HyperpriorConfig& cfg);
double critic_loss_mse(const RolloutBuffer& buffer);

struct ActorLoss {
  SurrogateResult surrogate;
  std::vector<double> new_logp;
  nn::ParamSet grads;                // d loss / d actor parameters
  std::vector<double> log_std_grads;  // d loss / d log_std
};

// Clipped surrogate of a batch (columns of obs/actions) and its gradient through the
// policy network and the log-std vector.
ActorLoss actor_loss_and_gradient(const Agent& agent, const nn::Matrix& obs,
                                  const nn::Matrix& actions, std::span<const double> old_logp,
                                  std::span<const double> advantages, double clip_epsilon,
                                  nn::ForwardCache* cache = nullptr);

struct CriticGradient {
  double loss = 0.0;
  nn::ParamSet grads;
};

// The agent's critic loss (evidential or squared error) and its parameter gradient.
CriticGradient critic_loss_and_gradient(const Agent& agent, const nn::Matrix& obs,
                                        std::span<const double> targets,
                                        const evidential::HyperpriorConfig& cfg,
                                        nn::ForwardCache* cache = nullptr);

struct UpdateDiagnostics {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double clip_fraction = 0.0;
  double first_surrogate_loss = 0.0;
  double first_max_ratio_deviation = 0.0;
  int minibatches = 0;
};

// cfg.epochs passes of shuffled minibatches: clipped surrogate for the actor, the
// algorithm's critic loss, global-norm clipping and an Adam step per network.
// Throws DivergedError on a non-finite loss.
UpdateDiagnostics update(const RolloutBuffer& buffer, Agent& agent, const TrainConfig& cfg,
                         std::mt19937_64& rng);

// Drives one agent on one environment: collection, targets and updates.
class Trainer {
 public:
  Trainer(envs::Environment& env, const TrainConfig& cfg, std::uint64_t seed);

  // Advances the environment one step; when the horizon fills, runs an update.
  std::optional<UpdateDiagnostics> step();

  // Deterministic-mean evaluation on a separate environment. Normalizer is not updated.
  std::vector<double> evaluate(envs::Environment& eval_env, int episodes) const;

  Agent& agent() { return agent_; }
  const Agent& agent() const { return agent_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  std::int64_t steps_taken() const { return steps_; }

 private:
  envs::Environment& env_;
  TrainConfig cfg_;
  Agent agent_;
  RolloutBuffer buffer_;
  std::mt19937_64 action_rng_;
  std::mt19937_64 update_rng_;
  std::vector<double> obs_;
  std::int64_t steps_ = 0;
};

}  // namespace eppo::ppo
