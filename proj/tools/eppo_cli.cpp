#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eppo/config.hpp"
#include "eppo/errors.hpp"
#include "eppo/harness.hpp"
#include "eppo/metrics.hpp"
#include "eppo/sweep.hpp"
#include "eppo/verify.hpp"

namespace fs = std::filesystem;
using namespace eppo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitVerify = 3;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.front() == '-') throw ConfigError("--seed", "invalid seed '" + s + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("--seed", "no seeds given");
  return seeds;
}

std::vector<double> parse_reals(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ConfigError(flag, "invalid number '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(flag, "no values given");
  return out;
}

void say(const std::string& line) { std::cout << line << '\n' << std::flush; }

// Overrides shared by train and sweep.
struct Overrides {
  std::string seeds;
  std::string out;
  std::string algos;
  std::string env;
  std::string schedule;
  std::string kappa;
};

harness::RunConfig apply_common(harness::RunConfig cfg, const Overrides& o) {
  if (!o.out.empty()) cfg.output = o.out;
  if (!o.env.empty()) cfg.environment = o.env;
  if (!o.schedule.empty()) cfg.schedule = o.schedule;
  return cfg;
}

std::vector<harness::RunConfig> expand_train(const harness::RunConfig& base, const Overrides& o) {
  harness::RunConfig cfg = apply_common(base, o);
  std::vector<ppo::Algorithm> algos = {cfg.train.algorithm};
  if (!o.algos.empty()) {
    algos.clear();
    for (const auto& name : split_list(o.algos)) {
      try {
        algos.push_back(ppo::parse_algorithm(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--algo", e.what());
      }
    }
  }
  if (!o.kappa.empty()) {
    const auto k = parse_reals(o.kappa, "--kappa");
    if (k.size() != 1) throw ConfigError("--kappa", "train takes a single kappa");
    cfg.train.kappa = k.front();
  }
  const std::vector<std::uint64_t> seeds =
      o.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_seeds(o.seeds);
  std::vector<harness::RunConfig> runs;
  for (auto a : algos) {
    for (auto s : seeds) {
      harness::RunConfig r = cfg;
      r.train.algorithm = a;
      r.seed = s;
      r.validate();
      runs.push_back(std::move(r));
    }
  }
  return runs;
}

std::string describe(const harness::RunResult& r) {
  std::ostringstream s;
  s << (r.failed ? "FAILED " : "done   ") << harness::run_stem(r.config) << " rows="
    << r.records.size();
  if (!r.records.empty() && !r.failed) {
    s << " aulc=" << harness::aulc(r.records) << " final=" << harness::final_return(r.records);
  }
  if (r.failed) s << " (" << r.error << ")";
  s << " -> " << r.metrics_path.generic_string();
  return s.str();
}

int cmd_train(const std::string& config, const Overrides& o, int parallel,
              const std::string& resume) {
  if (!resume.empty()) {
    std::ifstream in(resume);
    if (!in) throw ConfigError(resume, "cannot open manifest");
    const auto manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("status")) {
      throw ConfigError(resume, "not a run manifest");
    }
    if (manifest["status"] == "completed") {
      say("run already completed: " + resume);
      return kExitOk;
    }
    std::cerr << "error: resuming an interrupted run is not supported; rerun from its config\n";
    return kExitConfig;
  }
  const auto runs = expand_train(harness::load_run_config(config), o);
  bool any_failed = false;
  harness::run_many(runs, parallel, [&](const harness::RunResult& r) {
    any_failed = any_failed || r.failed;
    say(describe(r));
  });
  return any_failed ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::string& config, const Overrides& o, int parallel) {
  harness::RunConfig base = apply_common(harness::load_run_config(config), o);
  base.validate();
  std::vector<harness::SweepGrid> grids = harness::default_sweep_grids();
  if (!o.algos.empty()) {
    std::vector<harness::SweepGrid> chosen;
    for (const auto& name : split_list(o.algos)) {
      const auto it = std::find_if(grids.begin(), grids.end(), [&](const auto& g) {
        return ppo::to_string(g.algorithm) == name;
      });
      if (it == grids.end()) throw ConfigError("--algo", "sweep covers eppo-cor and eppo-ind only");
      chosen.push_back(*it);
    }
    grids = chosen;
  }
  if (!o.kappa.empty()) {
    const auto grid = parse_reals(o.kappa, "--kappa");
    for (auto& g : grids) g.kappas = grid;
  }
  const auto seeds = o.seeds.empty() ? harness::kSweepSeeds : parse_seeds(o.seeds);
  for (auto s : seeds) {
    if (s >= harness::kFirstEvalSeed && s <= harness::kLastEvalSeed) {
      throw ConfigError("--seed", "sweep seeds must not overlap evaluation seeds 1-10");
    }
  }

  const auto result = harness::kappa_sweep({base}, grids, seeds, {}, parallel);
  fs::create_directories(base.output);
  std::ofstream cells(base.output / "kappa_sweep.csv", std::ios::binary);
  cells << "experiment,algorithm,kappa,mean_aulc,completed_runs,failed_runs\n";
  for (const auto& c : result.cells) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%d,%d\n", c.experiment.c_str(),
                  ppo::to_string(c.algorithm).c_str(), c.kappa, c.mean_aulc, c.completed_runs,
                  c.failed_runs);
    cells << line;
    say(std::string("kappa ") + line);
  }
  const fs::path table = base.output / "kappa_table.csv";
  std::ofstream(table, std::ios::binary) << harness::format_kappa_table(result);
  say("selection table -> " + table.generic_string());
  return kExitOk;
}

int cmd_report(const std::string& dir, const std::string& out) {
  const auto scores = harness::collect_run_scores(dir);
  const auto table = harness::aggregate(scores);
  const fs::path path = out.empty() ? fs::path(dir) / "summary.csv" : fs::path(out);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("--out", "cannot write " + path.string());
  file << harness::format_summary_csv(table);
  say("runs=" + std::to_string(scores.size()) + " summary -> " + path.generic_string());
  return kExitOk;
}

int cmd_verify(const std::string& filter, std::uint64_t seed, const std::string& fault) {
  verify::VerifyOptions opt;
  opt.filter = filter;
  opt.seed = seed;
  if (fault == "nll-constant") {
    opt.nll_offset = 1e-3;
  } else if (!fault.empty()) {
    throw ConfigError("--inject-fault", "unknown fault '" + fault + "'");
  }
  const auto results = verify::run_checks(opt);
  if (results.empty()) throw ConfigError("--filter", "no check matches '" + filter + "'");
  int failed = 0;
  for (const auto& r : results) {
    char line[512];
    std::snprintf(line, sizeof(line), "%s %-28s measured=%.3e tol=%.1e %s",
                  r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance,
                  r.detail.c_str());
    say(line);
    if (!r.passed) ++failed;
  }
  say(std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) +
      " checks passed");
  return failed == 0 ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential PPO: training, kappa sweeps, reports and property checks"};
  app.require_subcommand(1);

  std::string config;
  std::string resume;
  std::string filter;
  std::string fault;
  std::string report_dir;
  std::string verify_seed = "20240601";
  int parallel = 1;
  Overrides o;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run config (JSON)")->required();
    sub->add_option("--seed", o.seeds, "Seed or comma-separated seeds (overrides the config)");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
    sub->add_option("--algo", o.algos, "Algorithm or comma-separated algorithms");
    sub->add_option("--env", o.env, "Environment id");
    sub->add_option("--schedule", o.schedule, "decreasing | increasing | paralysis:<scheme>");
    sub->add_option("--kappa", o.kappa, "Confidence radius (sweep: comma-separated grid)");
  };

  CLI::App* train = app.add_subcommand("train", "Train over a task schedule");
  add_run_flags(train);
  train->add_option("--resume", resume, "Manifest of an earlier run");
  // --resume stands alone.
  train->get_option("--config")->required(false);

  CLI::App* sweep = app.add_subcommand("sweep", "Select kappa by grid search on sweep seeds");
  add_run_flags(sweep);

  CLI::App* report = app.add_subcommand("report", "Aggregate metrics files into a summary");
  report->add_option("dir", report_dir, "Directory holding metrics files")->required();
  report->add_option("--out", o.out, "Summary CSV path (default <dir>/summary.csv)");

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run oracle and property checks");
  verify_cmd->add_option("--filter", filter, "Run checks whose name contains this text");
  verify_cmd->add_option("--seed", verify_seed, "Seed for the randomized suites");
  verify_cmd->add_option("--inject-fault", fault, "Deliberate fault (nll-constant)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      if (config.empty() && resume.empty()) throw ConfigError("--config", "required");
      return cmd_train(config, o, parallel, resume);
    }
    if (*sweep) return cmd_sweep(config, o, parallel);
    if (*report) return cmd_report(report_dir, o.out);
    if (*verify_cmd) return cmd_verify(filter, parse_seeds(verify_seed).front(), fault);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
