#pragma once

#include <random>
#include <span>
#include <vector>

namespace eppo::ppo {

// Diagonal Gaussian with a state-independent log standard deviation.
struct PolicyOutput {
  std::vector<double> mean;
  std::vector<double> log_std;
};

double policy_log_prob(const PolicyOutput& out, std::span<const double> action);

// mean + exp(log_std) * N(0, I).
std::vector<double> sample_action(const PolicyOutput& out, std::mt19937_64& rng);

struct SurrogateResult {
  double loss = 0.0;
  // d loss / d new_logp per sample (batch mean already applied).
  std::vector<double> grad_new_logp;
  double clip_fraction = 0.0;
};

// mean over the batch of -min(rho A, clip(rho, 1 - eps, 1 + eps) A), rho = exp(new - old).
SurrogateResult clipped_surrogate(std::span<const double> new_logp,
                                  std::span<const double> old_logp,
                                  std::span<const double> advantages, double epsilon);

}  // namespace eppo::ppo
