#include "eppo/schedule.hpp"

#include <stdexcept>

namespace eppo::harness {

namespace {
constexpr const char* kParalysisPrefix = "paralysis:";
}

std::string schedule_family(const std::string& kind) {
  if (kind == "decreasing" || kind == "increasing") return "slippery";
  if (kind.rfind(kParalysisPrefix, 0) == 0) return "paralysis";
  throw std::invalid_argument("unknown schedule '" + kind + "'");
}

std::string schedule_strategy(const std::string& kind) {
  if (schedule_family(kind) == "paralysis") {
    return kind.substr(std::string(kParalysisPrefix).size());
  }
  return kind;
}

TaskSchedule build_schedule(const std::string& kind, const envs::Environment& env, int n_tasks,
                            std::int64_t steps_per_task) {
  if (steps_per_task < 1) throw std::invalid_argument("steps_per_task must be >= 1");
  TaskSchedule schedule;
  schedule.steps_per_task = steps_per_task;
  const envs::DynamicsParams nominal = env.nominal_dynamics();

  if (schedule_family(kind) == "slippery") {
    if (n_tasks < 1) throw std::invalid_argument("n_tasks must be >= 1");
    const bool decreasing = kind == "decreasing";
    const double step =
        n_tasks > 1 ? (kMaxFriction - kMinFriction) / static_cast<double>(n_tasks - 1) : 0.0;
    for (int k = 0; k < n_tasks; ++k) {
      envs::DynamicsParams p = nominal;
      // The last task lands exactly on the opposite bound.
      if (k == n_tasks - 1 && n_tasks > 1) {
        p.friction = decreasing ? kMinFriction : kMaxFriction;
      } else {
        p.friction = decreasing ? kMaxFriction - step * k : kMinFriction + step * k;
      }
      schedule.tasks.push_back(std::move(p));
    }
    return schedule;
  }

  const std::vector<std::size_t> actuators = env.paralysis_actuators(schedule_strategy(kind));
  for (double scale : kParalysisPattern) {
    envs::DynamicsParams p = nominal;
    for (std::size_t a : actuators) p.torque_scales.at(a) = scale;
    schedule.tasks.push_back(std::move(p));
  }
  return schedule;
}

}  // namespace eppo::harness
