#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eppo/config.hpp"
#include "eppo/metrics.hpp"
#include "eppo/ppo.hpp"
#include "eppo/schedule.hpp"

namespace eppo::harness {

struct RunHooks {
  // Called after the dynamics switch and the start-of-task evaluation, before training.
  std::function<void(int task, const ppo::Agent&)> on_task_start;
  // Called after the last training step of a task, before its end-of-task evaluation.
  std::function<void(int task, const ppo::Agent&)> on_task_end;
  std::function<void(std::int64_t global_step, const ppo::UpdateDiagnostics&)> on_update;
};

struct RunOptions {
  RunHooks hooks;
  // Disabling evaluation skips every metrics row; training is unaffected.
  bool evaluate = true;
  // Metrics CSV, manifest and final checkpoint under cfg.output.
  bool write_artifacts = true;
};

struct RunResult {
  RunConfig config;
  std::vector<MetricsRecord> records;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;
  std::filesystem::path metrics_path;
  std::filesystem::path manifest_path;
  std::optional<std::filesystem::path> checkpoint_path;
};

// "<algorithm>_<environment>_<schedule>_seed<k>", with ':' in the schedule replaced by '-'.
std::string run_stem(const RunConfig& cfg);

// Trains through the whole schedule. Dynamics switch at task boundaries while networks,
// optimizers and normalizer carry over. Evaluation runs at the start and end of every task
// and every eval_interval global steps, on a separate environment seeded seed + 100, using
// the policy mean. A DivergedError marks the run failed and keeps the rows gathered so far.
RunResult run(const RunConfig& cfg, const RunOptions& options = {});

// Executes independent runs on at most `parallel` worker threads. Results keep input order.
// `on_complete` is called once per run, serialized across workers.
std::vector<RunResult> run_many(const std::vector<RunConfig>& configs, int parallel,
                                const std::function<void(const RunResult&)>& on_complete = {},
                                const RunOptions& options = {});

// Writes the manifest for an already finished run.
void write_manifest(const RunResult& result);

// Scans `dir` for metrics files named like run_stem(...).csv. A sibling manifest, when
// present, supplies the failure status and task length. Throws std::runtime_error naming the
// offending file on malformed input, and when no metrics file is found.
std::vector<RunScore> collect_run_scores(const std::filesystem::path& dir);

}  // namespace eppo::harness
