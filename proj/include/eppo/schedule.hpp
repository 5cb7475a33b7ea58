#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eppo/envs.hpp"

namespace eppo::harness {

inline constexpr double kMinFriction = 0.5;
inline constexpr double kMaxFriction = 4.0;
inline constexpr int kDefaultSlipperyTasks = 15;
// Torque capacity per task of a paralysis schedule.
inline constexpr double kParalysisPattern[] = {1.0, 0.75, 0.5, 0.25, 0.0, 0.25, 0.5, 0.75, 1.0};

struct TaskSchedule {
  std::vector<envs::DynamicsParams> tasks;
  std::int64_t steps_per_task = 0;

  std::size_t size() const { return tasks.size(); }
  std::int64_t total_steps() const { return steps_per_task * static_cast<std::int64_t>(size()); }
};

// kind: "decreasing" | "increasing" (friction from 4.0 down / 0.5 up in uniform steps) or
// "paralysis:<scheme>" (nine tasks following kParalysisPattern on the scheme's actuators;
// n_tasks is ignored). A single slippery task is a stationary schedule at the start value.
TaskSchedule build_schedule(const std::string& kind, const envs::Environment& env, int n_tasks,
                            std::int64_t steps_per_task);

// "slippery" or "paralysis".
std::string schedule_family(const std::string& kind);
// "decreasing", "increasing" or the paralysis scheme name.
std::string schedule_strategy(const std::string& kind);

}  // namespace eppo::harness
