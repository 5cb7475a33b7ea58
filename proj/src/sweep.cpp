#include "eppo/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace eppo::harness {

std::vector<SweepGrid> default_sweep_grids() {
  return {{ppo::Algorithm::kEppoCor, {0.01, 0.1, 0.25}},
          {ppo::Algorithm::kEppoInd, {0.01, 0.05, 0.1}}};
}

namespace {

std::string format_kappa(double kappa) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), kappa);
  return std::string(buf, res.ptr);
}

}  // namespace

SweepResult kappa_sweep(const std::vector<RunConfig>& base_configs,
                        const std::vector<SweepGrid>& grids,
                        const std::vector<std::uint64_t>& seeds, const RunFunction& run_fn,
                        int parallel) {
  if (base_configs.empty()) throw std::invalid_argument("kappa_sweep: no base configs");
  if (grids.empty()) throw std::invalid_argument("kappa_sweep: no grids");
  if (seeds.empty()) throw std::invalid_argument("kappa_sweep: no sweep seeds");
  for (const auto& g : grids) {
    if (g.kappas.empty()) {
      throw std::invalid_argument("kappa_sweep: empty grid for " + ppo::to_string(g.algorithm));
    }
  }
  for (std::uint64_t s : seeds) {
    if (s >= kFirstEvalSeed && s <= kLastEvalSeed) {
      throw std::invalid_argument("kappa_sweep: sweep seed " + std::to_string(s) +
                                  " overlaps the evaluation seeds");
    }
  }

  // Flatten (base, grid, kappa, seed) into one job list.
  struct Job {
    std::size_t base;
    std::size_t grid;
    std::size_t kappa;
  };
  std::vector<RunConfig> configs;
  std::vector<Job> jobs;
  for (std::size_t b = 0; b < base_configs.size(); ++b) {
    for (std::size_t g = 0; g < grids.size(); ++g) {
      for (std::size_t k = 0; k < grids[g].kappas.size(); ++k) {
        for (std::uint64_t seed : seeds) {
          RunConfig cfg = base_configs[b];
          cfg.train.algorithm = grids[g].algorithm;
          cfg.train.kappa = grids[g].kappas[k];
          cfg.seed = seed;
          // Run files do not encode kappa, so each grid value gets its own directory.
          cfg.output = base_configs[b].output / ("kappa-" + format_kappa(grids[g].kappas[k]));
          configs.push_back(std::move(cfg));
          jobs.push_back({b, g, k});
        }
      }
    }
  }

  std::vector<RunResult> results;
  if (run_fn) {
    results.reserve(configs.size());
    for (const auto& cfg : configs) results.push_back(run_fn(cfg));
  } else {
    results = run_many(configs, parallel);
  }

  SweepResult out;
  for (std::size_t b = 0; b < base_configs.size(); ++b) {
    const RunConfig& base = base_configs[b];
    KappaChoice choice{base.experiment(), base.environment, base.schedule, {}};
    for (std::size_t g = 0; g < grids.size(); ++g) {
      std::vector<SweepCell> cells;
      for (std::size_t k = 0; k < grids[g].kappas.size(); ++k) {
        SweepCell cell{base.experiment(), base.environment, base.schedule, grids[g].algorithm,
                       grids[g].kappas[k], 0.0, 0, 0};
        double sum = 0.0;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
          if (jobs[j].base != b || jobs[j].grid != g || jobs[j].kappa != k) continue;
          if (results[j].failed || results[j].records.empty()) {
            ++cell.failed_runs;
            continue;
          }
          sum += aulc(results[j].records);
          ++cell.completed_runs;
        }
        if (cell.completed_runs > 0) cell.mean_aulc = sum / cell.completed_runs;
        cells.push_back(cell);
      }
      const SweepCell* best = nullptr;
      for (const auto& cell : cells) {
        if (cell.completed_runs == 0) continue;
        if (!best || cell.mean_aulc > best->mean_aulc ||
            (cell.mean_aulc == best->mean_aulc && cell.kappa < best->kappa)) {
          best = &cell;
        }
      }
      if (!best) {
        throw std::runtime_error("kappa_sweep: every run failed for " +
                                 ppo::to_string(grids[g].algorithm) + " on " + base.experiment());
      }
      choice.kappa[grids[g].algorithm] = best->kappa;
      out.cells.insert(out.cells.end(), cells.begin(), cells.end());
    }
    out.choices.push_back(std::move(choice));
  }
  return out;
}

std::string format_kappa_table(const SweepResult& result) {
  const auto cell = [](const KappaChoice& c, ppo::Algorithm a) -> std::string {
    const auto it = c.kappa.find(a);
    return it == c.kappa.end() ? "" : format_kappa(it->second);
  };
  std::string out = "experiment,environment,strategy,eppo_cor_kappa,eppo_ind_kappa\n";
  for (const auto& c : result.choices) {
    out += schedule_family(c.schedule) + "," + c.environment + "," +
           schedule_strategy(c.schedule) + "," + cell(c, ppo::Algorithm::kEppoCor) + "," +
           cell(c, ppo::Algorithm::kEppoInd) + "\n";
  }
  return out;
}

}  // namespace eppo::harness
