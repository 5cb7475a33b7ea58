#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eppo/harness.hpp"

namespace eppo::harness {

struct SweepGrid {
  ppo::Algorithm algorithm = ppo::Algorithm::kEppoCor;
  std::vector<double> kappas;
};

// Default grids: eppo-cor {0.01, 0.1, 0.25}, eppo-ind {0.01, 0.05, 0.1}.
std::vector<SweepGrid> default_sweep_grids();
inline const std::vector<std::uint64_t> kSweepSeeds = {1001, 1002, 1003};
// Seeds reserved for the main results; sweep seeds must avoid them.
inline constexpr std::uint64_t kFirstEvalSeed = 1;
inline constexpr std::uint64_t kLastEvalSeed = 10;

struct SweepCell {
  std::string experiment;
  std::string environment;
  std::string schedule;
  ppo::Algorithm algorithm = ppo::Algorithm::kEppoCor;
  double kappa = 0.0;
  double mean_aulc = 0.0;
  int completed_runs = 0;
  int failed_runs = 0;
};

struct KappaChoice {
  std::string experiment;
  std::string environment;
  std::string schedule;
  std::map<ppo::Algorithm, double> kappa;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<KappaChoice> choices;  // one per base config, in input order
};

using RunFunction = std::function<RunResult(const RunConfig&)>;

// For every base config (one per experiment) and every grid value, runs the sweep seeds and
// averages AULC over completed runs; picks the argmax per (experiment, algorithm), with
// ties going to the smaller kappa. Throws std::invalid_argument on an empty grid or on sweep
// seeds inside the evaluation range, std::runtime_error if every run of a grid fails.
SweepResult kappa_sweep(const std::vector<RunConfig>& base_configs,
                        const std::vector<SweepGrid>& grids,
                        const std::vector<std::uint64_t>& seeds = kSweepSeeds,
                        const RunFunction& run_fn = {}, int parallel = 1);

// "experiment,environment,strategy,eppo_cor_kappa,eppo_ind_kappa"; the experiment column is
// the schedule family ("slippery" / "paralysis"), strategy the schedule direction or scheme.
std::string format_kappa_table(const SweepResult& result);

}  // namespace eppo::harness
