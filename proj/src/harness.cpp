#include "eppo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "eppo/checkpoint.hpp"
#include "eppo/envs.hpp"
#include "eppo/errors.hpp"

namespace eppo::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kEvalSeedOffset = 100;

MetricsRecord evaluate_point(const ppo::Trainer& trainer, envs::Environment& eval_env,
                             const RunConfig& cfg, std::int64_t global_step, int task) {
  const std::vector<double> returns = trainer.evaluate(eval_env, cfg.eval_episodes);
  const MeanSe stats = mean_and_se(returns);
  MetricsRecord r;
  r.seed = static_cast<std::int64_t>(cfg.seed);
  r.global_step = global_step;
  r.task_index = task;
  r.eval_return_mean = stats.mean;
  r.eval_return_se = stats.se;
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_stem(const std::string& stem) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = stem.find('_', start);
    parts.push_back(stem.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool is_metrics_stem(const std::string& stem) {
  const auto parts = split_stem(stem);
  if (parts.size() != 4 || parts[3].size() <= 4 || parts[3].rfind("seed", 0) != 0) return false;
  return std::all_of(parts[3].begin() + 4, parts[3].end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string run_stem(const RunConfig& cfg) {
  return ppo::to_string(cfg.train.algorithm) + "_" + cfg.experiment() + "_seed" +
         std::to_string(cfg.seed);
}

void write_manifest(const RunResult& result) {
  ordered_json j;
  j["seed"] = result.config.seed;
  j["status"] = result.failed ? "failed" : "completed";
  if (result.failed) j["error"] = result.error;
  j["wall_clock_seconds"] = result.wall_seconds;
  j["metrics_rows"] = result.records.size();
  ordered_json artifacts;
  artifacts["metrics"] = result.metrics_path.generic_string();
  artifacts["manifest"] = result.manifest_path.generic_string();
  if (result.checkpoint_path) artifacts["checkpoint"] = result.checkpoint_path->generic_string();
  j["artifacts"] = artifacts;
  j["config"] = to_json(result.config);
  write_text(result.manifest_path, j.dump(2) + "\n");
}

RunResult run(const RunConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  RunResult result;
  result.config = cfg;
  if (options.write_artifacts) {
    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    if (ec) throw ConfigError("output", "cannot create " + cfg.output.string() + ": " + ec.message());
    const std::string stem = run_stem(cfg);
    result.metrics_path = cfg.output / (stem + ".csv");
    result.manifest_path = cfg.output / (stem + ".manifest.json");
  }

  auto train_env = envs::make_environment(cfg.environment);
  auto eval_env = envs::make_environment(cfg.environment);
  const TaskSchedule schedule =
      build_schedule(cfg.schedule, *train_env, cfg.n_tasks, cfg.steps_per_task);
  eval_env->reset(cfg.seed + kEvalSeedOffset);
  ppo::Trainer trainer(*train_env, cfg.train, cfg.seed);

  const RunHooks& hooks = options.hooks;
  std::int64_t global_step = 0;
  try {
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const int task = static_cast<int>(k);
      train_env->set_dynamics(schedule.tasks[k]);
      eval_env->set_dynamics(schedule.tasks[k]);
      if (options.evaluate) {
        result.records.push_back(evaluate_point(trainer, *eval_env, cfg, global_step, task));
      }
      if (hooks.on_task_start) hooks.on_task_start(task, trainer.agent());

      const std::int64_t task_end = global_step + schedule.steps_per_task;
      while (global_step < task_end) {
        const auto diag = trainer.step();
        ++global_step;
        if (diag && hooks.on_update) hooks.on_update(global_step, *diag);
        // The end-of-task evaluation below covers an interval point on the boundary.
        if (options.evaluate && global_step % cfg.eval_interval == 0 && global_step != task_end) {
          result.records.push_back(evaluate_point(trainer, *eval_env, cfg, global_step, task));
        }
      }
      if (hooks.on_task_end) hooks.on_task_end(task, trainer.agent());
      if (options.evaluate) {
        result.records.push_back(evaluate_point(trainer, *eval_env, cfg, global_step, task));
      }
    }
  } catch (const DivergedError& e) {
    result.failed = true;
    result.error = std::string(e.what()) + " at global step " + std::to_string(global_step);
  }

  if (options.write_artifacts) {
    write_metrics_csv(result.metrics_path, result.records);
    if (!result.failed) {
      result.checkpoint_path = cfg.output / (run_stem(cfg) + ".checkpoint.json");
      save_checkpoint(*result.checkpoint_path, trainer.agent());
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (options.write_artifacts) write_manifest(result);
  return result;
}

std::vector<RunResult> run_many(const std::vector<RunConfig>& configs, int parallel,
                                const std::function<void(const RunResult&)>& on_complete,
                                const RunOptions& options) {
  if (parallel < 1) throw std::invalid_argument("parallel must be >= 1");
  std::vector<RunResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        results[i] = run(configs[i], options);
        if (on_complete) {
          std::lock_guard<std::mutex> lock(report_mutex);
          on_complete(results[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallel),
                                                    std::max<std::size_t>(configs.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<RunScore> collect_run_scores(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (is_metrics_stem(entry.path().stem().string())) files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error("no metrics files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<RunScore> scores;
  for (const auto& path : files) {
    const std::string stem = path.stem().string();
    const auto parts = split_stem(stem);
    RunScore score;
    score.algorithm = parts[0];
    score.experiment = parts[1] + "_" + parts[2];
    score.seed = std::stoll(parts[3].substr(4));

    std::optional<std::int64_t> steps_per_task;
    const fs::path manifest = dir / (stem + ".manifest.json");
    if (fs::exists(manifest)) {
      std::ifstream in(manifest);
      try {
        const json j = json::parse(in);
        score.failed = j.at("status").get<std::string>() == "failed";
        steps_per_task = j.at("config").at("steps_per_task").get<std::int64_t>();
      } catch (const json::exception& e) {
        throw std::runtime_error(manifest.string() + ": " + e.what());
      }
    }
    const auto records = read_metrics_csv(path);
    if (records.empty()) score.failed = true;
    if (!score.failed) {
      score.aulc = aulc(records);
      try {
        score.final_return = final_return(records, steps_per_task);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
      }
    }
    scores.push_back(std::move(score));
  }
  return scores;
}

}  // namespace eppo::harness
