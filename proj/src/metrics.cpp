#include "eppo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eppo::harness {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& field, const std::string& source, std::size_t line) {
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_same_v<T, double>) {
      value = std::stod(field, &used);
    } else {
      value = static_cast<T>(std::stoll(field, &used));
    }
    if (used != field.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": cannot parse '" + field +
                             "'");
  }
}

}  // namespace

std::string format_metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : records) {
    out += std::to_string(r.seed) + "," + std::to_string(r.global_step) + "," +
           std::to_string(r.task_index) + "," + format_real(r.eval_return_mean) + "," +
           format_real(r.eval_return_se) + "\n";
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_metrics_csv(records);
}

std::vector<MetricsRecord> parse_metrics_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kMetricsHeader) {
        throw std::runtime_error(source + ":1: unexpected header '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": expected 5 fields");
    }
    MetricsRecord r;
    r.seed = parse_number<std::int64_t>(fields[0], source, line_no);
    r.global_step = parse_number<std::int64_t>(fields[1], source, line_no);
    r.task_index = parse_number<int>(fields[2], source, line_no);
    r.eval_return_mean = parse_number<double>(fields[3], source, line_no);
    r.eval_return_se = parse_number<double>(fields[4], source, line_no);
    records.push_back(r);
  }
  if (line_no == 0) throw std::runtime_error(source + ": empty metrics file");
  return records;
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_metrics_csv(buf.str(), path.string());
}

MeanSe mean_and_se(const std::vector<double>& values) {
  MeanSe out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(sq / static_cast<double>(values.size() - 1));
    out.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

double aulc(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aulc: no evaluation records");
  // Sorted summation keeps the result independent of record order.
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(r.eval_return_mean);
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double final_return(const std::vector<MetricsRecord>& records,
                    std::optional<std::int64_t> steps_per_task) {
  if (records.empty()) throw std::invalid_argument("final_return: no evaluation records");
  std::map<int, const MetricsRecord*> last;
  for (const auto& r : records) {
    auto it = last.find(r.task_index);
    if (it == last.end() || r.global_step > it->second->global_step ||
        (r.global_step == it->second->global_step &&
         r.eval_return_mean > it->second->eval_return_mean)) {
      last[r.task_index] = &r;
    }
  }
  int expected = 0;
  double sum = 0.0;
  for (const auto& [task, rec] : last) {
    if (task != expected) {
      throw std::invalid_argument("final_return: missing records for task " +
                                  std::to_string(expected));
    }
    if (steps_per_task && rec->global_step != (task + 1) * *steps_per_task) {
      throw std::invalid_argument("final_return: missing end-of-task record for task " +
                                  std::to_string(task));
    }
    sum += rec->eval_return_mean;
    ++expected;
  }
  return sum / static_cast<double>(last.size());
}

std::vector<std::string> order_algorithms(std::vector<std::string> names) {
  static const std::vector<std::string> kCanonical = {"ppo", "eppo-mean", "eppo-cor", "eppo-ind"};
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    const auto ia = std::find(kCanonical.begin(), kCanonical.end(), a) - kCanonical.begin();
    const auto ib = std::find(kCanonical.begin(), kCanonical.end(), b) - kCanonical.begin();
    if (ia != ib) return ia < ib;
    return a < b;
  });
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

SummaryTable aggregate(const std::vector<RunScore>& runs) {
  SummaryTable table;
  table.metrics = {"aulc", "final_return"};
  std::set<std::string> algorithms;
  std::set<std::string> experiments;
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>> values;
  for (const auto& run : runs) {
    algorithms.insert(run.algorithm);
    table.failed_runs.try_emplace(run.algorithm, 0);
    if (run.failed) {
      ++table.failed_runs[run.algorithm];
      continue;
    }
    experiments.insert(run.experiment);
    values["aulc"][run.algorithm][run.experiment].push_back(run.aulc);
    values["final_return"][run.algorithm][run.experiment].push_back(run.final_return);
  }
  table.algorithms = order_algorithms({algorithms.begin(), algorithms.end()});
  table.experiments = {experiments.begin(), experiments.end()};

  for (const auto& metric : table.metrics) {
    std::map<std::string, std::vector<double>> ranks;
    std::map<std::string, std::vector<double>> means;
    for (const auto& exp : table.experiments) {
      std::vector<std::pair<double, std::string>> scored;
      for (const auto& alg : table.algorithms) {
        const auto& seeds = values[metric][alg][exp];
        if (seeds.empty()) continue;
        const MeanSe ms = mean_and_se(seeds);
        table.cells[metric][alg][exp] = ms;
        means[alg].push_back(ms.mean);
        scored.emplace_back(ms.mean, alg);
      }
      // Higher is better; tied means share the average of their positions.
      std::sort(scored.begin(), scored.end(),
                [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t i = 0; i < scored.size();) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[scored[k].second].push_back(shared);
        i = j;
      }
    }
    for (const auto& alg : table.algorithms) {
      if (means[alg].empty()) continue;
      table.average_score[metric][alg] = mean_and_se(means[alg]).mean;
      table.average_rank[metric][alg] = mean_and_se(ranks[alg]).mean;
    }
  }
  return table;
}

std::string format_summary_csv(const SummaryTable& table) {
  std::string out = "metric,algorithm";
  for (const auto& exp : table.experiments) out += "," + exp + "_mean," + exp + "_se";
  out += ",average_score,average_rank,failed_runs\n";
  for (const auto& metric : table.metrics) {
    for (const auto& alg : table.algorithms) {
      out += metric + "," + alg;
      const auto metric_it = table.cells.find(metric);
      for (const auto& exp : table.experiments) {
        const MeanSe* cell = nullptr;
        if (metric_it != table.cells.end()) {
          const auto alg_it = metric_it->second.find(alg);
          if (alg_it != metric_it->second.end()) {
            const auto exp_it = alg_it->second.find(exp);
            if (exp_it != alg_it->second.end()) cell = &exp_it->second;
          }
        }
        out += cell ? "," + format_real(cell->mean) + "," + format_real(cell->se) : ",,";
      }
      const auto score = table.average_score.find(metric);
      const auto rank = table.average_rank.find(metric);
      const bool has = score != table.average_score.end() && score->second.count(alg) > 0;
      out += has ? "," + format_real(score->second.at(alg)) + "," +
                       format_real(rank->second.at(alg))
                 : ",,";
      const auto failed = table.failed_runs.find(alg);
      out += "," + std::to_string(failed == table.failed_runs.end() ? 0 : failed->second) + "\n";
    }
  }
  return out;
}

}  // namespace eppo::harness
