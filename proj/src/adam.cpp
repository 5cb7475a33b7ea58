#include "eppo/adam.hpp"

#include <cmath>

#include "eppo/errors.hpp"

namespace eppo::nn {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ShapeError("adam: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

double global_norm(std::span<const std::span<double>> groups) {
  double sq = 0.0;
  for (auto group : groups) {
    for (double g : group) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_global_norm(std::span<const std::span<double>> groups, double max_norm) {
  const double norm = global_norm(groups);
  if (!std::isfinite(norm)) {
    throw DivergedError("gradient global norm is not finite");
  }
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto group : groups) {
      for (double& g : group) g *= scale;
    }
  }
  return norm;
}

}  // namespace eppo::nn
