#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace eppo::nn {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double lr)
      : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}

  bool operator==(const AdamState&) const = default;
};

// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// L2 norm over every group together.
double global_norm(std::span<const std::span<double>> groups);

// Rescales all groups jointly so their global norm is at most `max_norm`. Returns the
// norm measured before clipping. Throws DivergedError on a non-finite gradient.
double clip_global_norm(std::span<const std::span<double>> groups, double max_norm);

}  // namespace eppo::nn
