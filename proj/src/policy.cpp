#include "eppo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eppo/errors.hpp"

namespace eppo::ppo {

namespace {
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

double policy_log_prob(const PolicyOutput& out, std::span<const double> action) {
  if (out.mean.size() != action.size() || out.log_std.size() != action.size()) {
    throw ShapeError("policy_log_prob: action dimension mismatch");
  }
  double logp = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    const double z = (action[i] - out.mean[i]) * std::exp(-out.log_std[i]);
    logp += -0.5 * z * z - out.log_std[i] - kHalfLogTwoPi;
  }
  return logp;
}

std::vector<double> sample_action(const PolicyOutput& out, std::mt19937_64& rng) {
  if (out.mean.size() != out.log_std.size()) throw ShapeError("sample_action: size mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> action(out.mean.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    action[i] = out.mean[i] + std::exp(out.log_std[i]) * normal(rng);
  }
  return action;
}

SurrogateResult clipped_surrogate(std::span<const double> new_logp,
                                  std::span<const double> old_logp,
                                  std::span<const double> advantages, double epsilon) {
  if (new_logp.size() != old_logp.size() || new_logp.size() != advantages.size()) {
    throw ShapeError("clipped_surrogate: batch lengths differ");
  }
  if (new_logp.empty()) throw ShapeError("clipped_surrogate: empty batch");
  const double n = static_cast<double>(new_logp.size());
  SurrogateResult result;
  result.grad_new_logp.assign(new_logp.size(), 0.0);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < new_logp.size(); ++i) {
    const double ratio = std::exp(new_logp[i] - old_logp[i]);
    const double adv = advantages[i];
    const double unclipped = ratio * adv;
    const double bounded = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * adv;
    if (unclipped <= bounded) {
      result.loss -= unclipped;
      result.grad_new_logp[i] = -unclipped / n;
    } else {
      result.loss -= bounded;
    }
    if (std::abs(ratio - 1.0) > epsilon) ++clipped;
  }
  result.loss /= n;
  result.clip_fraction = static_cast<double>(clipped) / n;
  return result;
}

}  // namespace eppo::ppo
