#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace eppo::envs {

// Externally adjustable dynamics: ground friction and per-actuator torque capacity.
struct DynamicsParams {
  double friction = 1.0;
  std::vector<double> torque_scales;

  bool operator==(const DynamicsParams&) const = default;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

inline constexpr double kTimestep = 0.05;
inline constexpr int kEpisodeLimit = 200;
inline constexpr double kActionCost = 0.01;
inline constexpr double kResetNoise = 0.05;

// Deterministic continuous-control task. Actions are clipped to [-1, 1]; the reward is
// forward velocity minus kActionCost * |a|^2 of the commanded (clipped) action. Episodes
// truncate after kEpisodeLimit steps and terminate when the state leaves its bounds.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  // Names of the actuator groups accepted by paralysis schedules.
  virtual std::vector<std::string> paralysis_schemes() const = 0;
  virtual std::vector<std::size_t> paralysis_actuators(const std::string& scheme) const = 0;

  // Reseeds the reset-noise stream, then resets.
  std::vector<double> reset(std::uint64_t seed);
  // Resets using the next draws of the current stream.
  std::vector<double> reset();
  // Places the system at an exact state with the step counter at 0.
  std::vector<double> reset_to(std::span<const double> state);

  StepResult step(std::span<const double> action);

  void set_dynamics(const DynamicsParams& params);
  const DynamicsParams& dynamics() const { return dynamics_; }
  DynamicsParams nominal_dynamics() const;

  int step_count() const { return steps_; }
  std::span<const double> state() const { return state_; }

 protected:
  explicit Environment(std::size_t state_dim, int act_dim);

  virtual std::vector<double> observe() const = 0;
  // Integrates one timestep with torque-scaled actions; returns the forward velocity.
  virtual double integrate(std::span<const double> applied) = 0;
  virtual bool out_of_bounds() const = 0;

  std::vector<double> state_;

 private:
  DynamicsParams dynamics_;
  std::mt19937_64 rng_;
  int steps_ = 0;
};

// Point mass on a line. Drive force F_max * a; ground force -friction * k * v.
// Observation: (0.1 x, v, applied force). Falls off the rear edge at x < -2.
class SlipperyCar final : public Environment {
 public:
  static constexpr double kMaxForce = 1.0;
  static constexpr double kGroundDrag = 1.0;
  static constexpr double kRearEdge = -2.0;

  SlipperyCar();

  std::string id() const override { return "slippery-car"; }
  int obs_dim() const override { return 3; }
  int act_dim() const override { return 1; }
  std::vector<std::string> paralysis_schemes() const override { return {"drive"}; }
  std::vector<std::size_t> paralysis_actuators(const std::string& scheme) const override;

 protected:
  std::vector<double> observe() const override;
  double integrate(std::span<const double> applied) override;
  bool out_of_bounds() const override;
};

// Planar body propelled by two swinging legs (back, front). A leg pushes the body
// forward while it sweeps backward in ground contact (angle > 0); traction grows with
// friction while ground drag is proportional to it. Unbalanced joint torques pitch the
// body; |pitch| > 0.8 rad counts as a fall.
// State/observation: (v, pitch, pitch rate, theta_back, omega_back, theta_front,
// omega_front, 0.1 x).
class TwoJointWalker final : public Environment {
 public:
  static constexpr double kMaxTorque = 4.0;
  static constexpr double kPitchLimit = 0.8;

  TwoJointWalker();

  std::string id() const override { return "two-joint-walker"; }
  int obs_dim() const override { return 8; }
  int act_dim() const override { return 2; }
  std::vector<std::string> paralysis_schemes() const override {
    return {"back-one", "front-one", "both"};
  }
  std::vector<std::size_t> paralysis_actuators(const std::string& scheme) const override;

 protected:
  std::vector<double> observe() const override;
  double integrate(std::span<const double> applied) override;
  bool out_of_bounds() const override;
};

std::vector<std::string> environment_ids();
// Throws std::invalid_argument for an unknown id.
std::unique_ptr<Environment> make_environment(const std::string& id);

}  // namespace eppo::envs
