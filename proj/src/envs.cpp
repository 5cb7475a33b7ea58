#include "eppo/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eppo/special_functions.hpp"

namespace eppo::envs {

Environment::Environment(std::size_t state_dim, int act_dim) : state_(state_dim, 0.0) {
  dynamics_.friction = 1.0;
  dynamics_.torque_scales.assign(static_cast<std::size_t>(act_dim), 1.0);
}

DynamicsParams Environment::nominal_dynamics() const {
  return {1.0, std::vector<double>(static_cast<std::size_t>(act_dim()), 1.0)};
}

std::vector<double> Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

std::vector<double> Environment::reset() {
  std::uniform_real_distribution<double> noise(-kResetNoise, kResetNoise);
  for (double& s : state_) s = noise(rng_);
  steps_ = 0;
  return observe();
}

std::vector<double> Environment::reset_to(std::span<const double> state) {
  if (state.size() != state_.size()) throw std::invalid_argument("reset_to: state size mismatch");
  std::copy(state.begin(), state.end(), state_.begin());
  steps_ = 0;
  return observe();
}

StepResult Environment::step(std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(act_dim())) {
    throw std::invalid_argument("step: action has wrong dimension");
  }
  std::vector<double> commanded(action.size());
  std::vector<double> applied(action.size());
  double cost = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) throw std::invalid_argument("step: action is not finite");
    commanded[i] = std::clamp(action[i], -1.0, 1.0);
    applied[i] = commanded[i] * dynamics_.torque_scales[i];
    cost += commanded[i] * commanded[i];
  }
  const double forward_velocity = integrate(applied);
  ++steps_;
  StepResult result;
  result.observation = observe();
  result.reward = forward_velocity - kActionCost * cost;
  result.terminated = out_of_bounds();
  result.truncated = !result.terminated && steps_ >= kEpisodeLimit;
  return result;
}

void Environment::set_dynamics(const DynamicsParams& params) {
  if (!(params.friction > 0.0) || !std::isfinite(params.friction)) {
    throw std::invalid_argument("set_dynamics: friction must be positive and finite");
  }
  if (params.torque_scales.size() != static_cast<std::size_t>(act_dim())) {
    throw std::invalid_argument("set_dynamics: one torque scale per actuator is required");
  }
  for (double s : params.torque_scales) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("set_dynamics: torque scales must lie in [0, 1]");
    }
  }
  dynamics_ = params;
}

// --- SlipperyCar ---

SlipperyCar::SlipperyCar() : Environment(3, 1) {}

std::vector<std::size_t> SlipperyCar::paralysis_actuators(const std::string& scheme) const {
  if (scheme == "drive") return {0};
  throw std::invalid_argument("slippery-car: unknown paralysis scheme '" + scheme + "'");
}

std::vector<double> SlipperyCar::observe() const {
  return {0.1 * state_[0], state_[1], state_[2]};
}

double SlipperyCar::integrate(std::span<const double> applied) {
  double& x = state_[0];
  double& v = state_[1];
  double& force = state_[2];
  force = kMaxForce * applied[0];
  v += kTimestep * (force - dynamics().friction * kGroundDrag * v);
  x += kTimestep * v;
  return v;
}

bool SlipperyCar::out_of_bounds() const { return state_[0] < kRearEdge; }

// --- TwoJointWalker ---

namespace {

constexpr double kJointDamping = 1.0;
constexpr double kJointStiffness = 2.0;
constexpr double kJointLimit = 1.0;
constexpr double kThrustGain = 2.0;
constexpr double kWalkerDrag = 0.5;
constexpr double kContactSharpness = 4.0;
constexpr double kPitchCoupling = 0.4;
constexpr double kPitchStiffness = 4.0;
constexpr double kPitchDamping = 1.0;

enum WalkerIndex : std::size_t { kX, kV, kPitch, kPitchRate, kTheta0, kOmega0, kTheta1, kOmega1 };

}  // namespace

TwoJointWalker::TwoJointWalker() : Environment(8, 2) {}

std::vector<std::size_t> TwoJointWalker::paralysis_actuators(const std::string& scheme) const {
  if (scheme == "back-one") return {0};
  if (scheme == "front-one") return {1};
  if (scheme == "both") return {0, 1};
  throw std::invalid_argument("two-joint-walker: unknown paralysis scheme '" + scheme + "'");
}

std::vector<double> TwoJointWalker::observe() const {
  return {state_[kV],      state_[kPitch],  state_[kPitchRate], state_[kTheta0],
          state_[kOmega0], state_[kTheta1], state_[kOmega1],    0.1 * state_[kX]};
}

double TwoJointWalker::integrate(std::span<const double> applied) {
  const double friction = dynamics().friction;
  const double grip = friction / (friction + 1.0);
  double thrust = 0.0;
  for (std::size_t leg = 0; leg < 2; ++leg) {
    double& theta = state_[kTheta0 + 2 * leg];
    double& omega = state_[kOmega0 + 2 * leg];
    const double torque = kMaxTorque * applied[leg];
    omega += kTimestep * (torque - kJointDamping * omega - kJointStiffness * theta);
    theta += kTimestep * omega;
    if (theta > kJointLimit) {
      theta = kJointLimit;
      omega = std::min(omega, 0.0);
    } else if (theta < -kJointLimit) {
      theta = -kJointLimit;
      omega = std::max(omega, 0.0);
    }
    const double contact = math::sigmoid(kContactSharpness * theta);
    thrust += contact * (-omega);
  }
  double& v = state_[kV];
  v += kTimestep * (kThrustGain * grip * thrust - friction * kWalkerDrag * v);
  state_[kX] += kTimestep * v;

  const double pitch_torque =
      kPitchCoupling * kMaxTorque * (applied[0] - applied[1]) - kPitchStiffness * state_[kPitch] -
      kPitchDamping * state_[kPitchRate];
  state_[kPitchRate] += kTimestep * pitch_torque;
  state_[kPitch] += kTimestep * state_[kPitchRate];
  return v;
}

bool TwoJointWalker::out_of_bounds() const { return std::abs(state_[kPitch]) > kPitchLimit; }

std::vector<std::string> environment_ids() { return {"slippery-car", "two-joint-walker"}; }

std::unique_ptr<Environment> make_environment(const std::string& id) {
  if (id == "slippery-car") return std::make_unique<SlipperyCar>();
  if (id == "two-joint-walker") return std::make_unique<TwoJointWalker>();
  throw std::invalid_argument("unknown environment '" + id + "'");
}

}  // namespace eppo::envs
