#pragma once

#include <span>
#include <string>
#include <vector>

namespace eppo::gae {

// How the advantage variance is propagated from the per-state value variances.
enum class Variant {
  kMean,         // no variance; UCB degenerates to the mean
  kCorrelated,   // k-step estimators share V_t
  kIndependent,  // k-step estimators treated as independent
};

std::string to_string(Variant v);

struct GaeConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double kappa = 0.0;
  Variant variant = Variant::kMean;

  void validate() const;
  // kappa for UCB construction; always 0 for Variant::kMean.
  double effective_kappa() const { return variant == Variant::kMean ? 0.0 : kappa; }
};

// Per-state value moments for one rollout segment. `means` and `variances` carry one
// extra bootstrap entry beyond the T steps; terminated[t] masks V_{t+1} for step t.
struct ValueSequence {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<bool> terminated;

  std::size_t steps() const { return terminated.size(); }
  void validate() const;
};

struct AdvantageEstimate {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> ucb;
};

// E[delta_t] = r_t + gamma * E[V_{t+1}] (dropped when terminated) - E[V_t].
std::vector<double> td_residual_means(std::span<const double> rewards, const ValueSequence& vals,
                                      double gamma);

// Backward recursion A_t = delta_t + gamma * lambda * A_{t+1}, reset at terminations.
std::vector<double> gae_mean(std::span<const double> deltas, const GaeConfig& cfg,
                             const std::vector<bool>& terminated);

// var[V_t] + sum_{l>=1} ((1-lambda)/lambda)^2 (gamma lambda)^{2l} var[V_{t+l}], with the sum
// cut at the episode or segment end (the bootstrap entry included unless terminated).
std::vector<double> gae_var_correlated(const ValueSequence& vals, const GaeConfig& cfg);

// Same tail; the var[V_t] term is down-weighted by (1-lambda)/(1+lambda).
std::vector<double> gae_var_independent(const ValueSequence& vals, const GaeConfig& cfg);

// mean + kappa * sqrt(variance). Throws std::invalid_argument on negative variance.
std::vector<double> ucb_advantage(std::span<const double> mean, std::span<const double> variance,
                                  double kappa);

// Zero mean, unit population standard deviation (denominator std + 1e-8).
std::vector<double> normalize_batch(std::span<const double> adv);

// Mean, variant variance and UCB for one segment (no normalization).
AdvantageEstimate estimate(std::span<const double> rewards, const ValueSequence& vals,
                           const GaeConfig& cfg);

}  // namespace eppo::gae
