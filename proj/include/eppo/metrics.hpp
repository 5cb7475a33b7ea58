#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eppo::harness {

// One evaluation point of a run.
struct MetricsRecord {
  std::int64_t seed = 0;
  std::int64_t global_step = 0;
  int task_index = 0;
  double eval_return_mean = 0.0;
  double eval_return_se = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

inline constexpr const char* kMetricsHeader =
    "seed,global_step,task_index,eval_return_mean,eval_return_se";

// Header plus one LF-terminated row per record; reals printed with 17 significant digits.
std::string format_metrics_csv(const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
// Throws std::runtime_error naming the file and line on malformed input.
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);
std::vector<MetricsRecord> parse_metrics_csv(const std::string& text,
                                             const std::string& source = "<memory>");

// Mean and standard error (sample std / sqrt(n); 0 for n == 1).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanSe mean_and_se(const std::vector<double>& values);

// Mean evaluation return over every record of one run.
double aulc(const std::vector<MetricsRecord>& records);

// Mean over tasks of the end-of-task evaluation (the latest global step of each task index).
// Task indices must cover 0..max without gaps; with steps_per_task given, each task's last
// record must sit exactly at its end step. Throws std::invalid_argument otherwise.
double final_return(const std::vector<MetricsRecord>& records,
                    std::optional<std::int64_t> steps_per_task = std::nullopt);

// Per-run scores used for aggregation.
struct RunScore {
  std::string algorithm;
  std::string experiment;
  std::int64_t seed = 0;
  bool failed = false;
  double aulc = 0.0;
  double final_return = 0.0;
};

struct SummaryTable {
  std::vector<std::string> metrics;  // "aulc", "final_return"
  std::vector<std::string> algorithms;
  std::vector<std::string> experiments;
  // cells[metric][algorithm][experiment]
  std::map<std::string, std::map<std::string, std::map<std::string, MeanSe>>> cells;
  std::map<std::string, std::map<std::string, double>> average_score;
  std::map<std::string, std::map<std::string, double>> average_rank;
  std::map<std::string, int> failed_runs;
};

// Mean/se over seeds per (algorithm, experiment); per algorithm the average of the means
// across experiments and the average rank (1 = highest mean, ties share the mean rank).
// Failed runs are excluded and counted.
SummaryTable aggregate(const std::vector<RunScore>& runs);

// One row per (metric, algorithm): <experiment>_mean/_se columns, then average score,
// average rank and failed-run count.
std::string format_summary_csv(const SummaryTable& table);

// Canonical display order: ppo, eppo-mean, eppo-cor, eppo-ind, then the rest sorted.
std::vector<std::string> order_algorithms(std::vector<std::string> names);

}  // namespace eppo::harness
