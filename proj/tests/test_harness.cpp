#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eppo/checkpoint.hpp"
#include "eppo/config.hpp"
#include "eppo/errors.hpp"
#include "eppo/harness.hpp"
#include "eppo/metrics.hpp"
#include "eppo/sweep.hpp"

using namespace eppo;
using namespace eppo::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eppo_test_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig tiny_config(const fs::path& out, ppo::Algorithm algo = ppo::Algorithm::kEppoMean) {
  RunConfig cfg;
  cfg.n_tasks = 2;
  cfg.steps_per_task = 1000;
  cfg.eval_interval = 500;
  cfg.eval_episodes = 2;
  cfg.output = out;
  cfg.train.horizon = 128;
  cfg.train.minibatch = 32;
  cfg.train.epochs = 2;
  cfg.train.actor_hidden = {16, 16};
  cfg.train.critic_hidden = {16, 16};
  cfg.train.algorithm = algo;
  return cfg;
}

MetricsRecord rec(std::int64_t step, int task, double ret, std::int64_t seed = 1) {
  return {seed, step, task, ret, 0.0};
}

}  // namespace

TEST_CASE("metrics csv") {
  const std::vector<MetricsRecord> records = {{3, 0, 0, -0.25, 0.125}, {3, 500, 0, 0.1, 1.0 / 3.0}};
  const std::string text = format_metrics_csv(records);
  CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  CHECK(text.find("3,0,0,-0.25,0.125\n") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(parse_metrics_csv(text) == records);

  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(parse_metrics_csv(crlf) == records);

  const auto dir = scratch("csv");
  write_metrics_csv(dir / "m.csv", records);
  CHECK(read_metrics_csv(dir / "m.csv") == records);

  SUBCASE("malformed input names the source and line") {
    try {
      parse_metrics_csv(std::string(kMetricsHeader) + "\n1,0,0,1.0,0.0\n1,x,0,1.0,0.0\n", "run.csv");
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("run.csv:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_metrics_csv("seed,step\n", "bad.csv"), std::runtime_error);
    CHECK_THROWS_AS(parse_metrics_csv(std::string(kMetricsHeader) + "\n1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_metrics_csv(""), std::runtime_error);
    CHECK_THROWS_AS(read_metrics_csv(dir / "missing.csv"), std::runtime_error);
  }
}

TEST_CASE("mean and standard error") {
  const auto s = mean_and_se({1.0, 2.0, 3.0});
  CHECK(s.mean == 2.0);
  CHECK(s.se == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(s.se == doctest::Approx(0.5774).epsilon(1e-4));
  CHECK(mean_and_se({0.0, 2.0}).se == doctest::Approx(1.0));
  CHECK(mean_and_se({4.0}).se == 0.0);
  CHECK(mean_and_se({4.0}).n == 1);
}

TEST_CASE("aulc") {
  CHECK(aulc({rec(0, 0, 7.5), rec(10, 0, 7.5), rec(20, 1, 7.5)}) == 7.5);
  CHECK(aulc({rec(0, 0, 0.0), rec(10, 0, 10.0)}) == 5.0);
  CHECK_THROWS_AS(aulc({}), std::invalid_argument);

  std::mt19937_64 rng(51);
  std::vector<MetricsRecord> r;
  for (int i = 0; i < 30; ++i) r.push_back(rec(i * 10, i / 10, std::normal_distribution<double>(0, 50)(rng)));
  const double base = aulc(r);
  const double base_final = final_return(r);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(r.begin(), r.end(), rng);
    CHECK(aulc(r) == base);
    CHECK(final_return(r) == base_final);
  }
}

TEST_CASE("final_return") {
  CHECK(final_return({rec(0, 0, 1.0), rec(5, 0, 2.0), rec(10, 0, 9.0)}) == 9.0);
  CHECK(final_return({rec(0, 0, 0.0), rec(10, 0, 3.0), rec(10, 1, -1.0), rec(20, 1, 5.0)}) == 4.0);
  CHECK_THROWS_AS(final_return({rec(0, 0, 1.0), rec(10, 2, 1.0)}), std::invalid_argument);
  CHECK_THROWS_AS(final_return({}), std::invalid_argument);
  // A run cut short inside task 1.
  const std::vector<MetricsRecord> partial = {rec(0, 0, 0.0), rec(10, 0, 3.0), rec(10, 1, 1.0), rec(15, 1, 2.0)};
  CHECK(final_return(partial) == 2.5);
  CHECK_THROWS_AS(final_return(partial, 10), std::invalid_argument);
  CHECK(final_return({rec(0, 0, 0.0), rec(10, 0, 3.0), rec(10, 1, 1.0), rec(20, 1, 2.0)}, 10) == 2.5);
}

TEST_CASE("aggregate") {
  SUBCASE("a single algorithm ranks first everywhere") {
    const auto t = aggregate({{"ppo", "a", 1, false, 3.0, 4.0}, {"ppo", "b", 1, false, 1.0, 2.0}});
    CHECK(t.average_rank.at("aulc").at("ppo") == 1.0);
    CHECK(t.average_rank.at("final_return").at("ppo") == 1.0);
    CHECK(t.average_score.at("aulc").at("ppo") == 2.0);
  }
  SUBCASE("higher means rank better") {
    const auto t = aggregate({{"x", "e", 1, false, 10.0, 0.0}, {"y", "e", 1, false, 20.0, 0.0}, {"z", "e", 1, false, 30.0, 0.0}});
    CHECK(t.average_rank.at("aulc").at("x") == 3.0);
    CHECK(t.average_rank.at("aulc").at("y") == 2.0);
    CHECK(t.average_rank.at("aulc").at("z") == 1.0);
    // Equal final returns share the mean rank.
    CHECK(t.average_rank.at("final_return").at("x") == 2.0);
  }
  SUBCASE("seeds average into mean and se; failed runs are excluded and counted") {
    const auto t = aggregate({{"ppo", "e", 1, false, 1.0, 0.0},
                              {"ppo", "e", 2, false, 2.0, 0.0},
                              {"ppo", "e", 3, false, 3.0, 0.0},
                              {"ppo", "e", 4, true, 1000.0, 0.0}});
    const auto& cell = t.cells.at("aulc").at("ppo").at("e");
    CHECK(cell.mean == 2.0);
    CHECK(cell.n == 3);
    CHECK(cell.se == doctest::Approx(0.5774).epsilon(1e-4));
    CHECK(t.failed_runs.at("ppo") == 1);
  }
  SUBCASE("summary csv layout") {
    const auto t = aggregate({{"eppo-cor", "car_dec", 1, false, 2.0, 1.0}, {"ppo", "car_dec", 1, false, 1.0, 1.5}});
    const std::string csv = format_summary_csv(t);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "metric,algorithm,car_dec_mean,car_dec_se,average_score,average_rank,failed_runs");
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("aulc,ppo,", 0) == 0);
    CHECK(rows[1].rfind("aulc,eppo-cor,", 0) == 0);
    CHECK(rows[2].rfind("final_return,ppo,", 0) == 0);
  }
  CHECK(order_algorithms({"zeta", "eppo-ind", "ppo", "alpha", "eppo-mean"}) ==
        std::vector<std::string>{"ppo", "eppo-mean", "eppo-ind", "alpha", "zeta"});
}

TEST_CASE("run config") {
  SUBCASE("json round trip") {
    RunConfig cfg;
    cfg.schedule = "paralysis:both";
    cfg.environment = "two-joint-walker";
    cfg.seed = 42;
    cfg.train.algorithm = ppo::Algorithm::kEppoInd;
    cfg.train.kappa = 0.05;
    cfg.train.actor_hidden = {32};
    cfg.train.hyperprior.xi = 0.02;
    const auto j = to_json(cfg);
    const RunConfig back = run_config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back) == j);
    CHECK(back.train.hyperprior == cfg.train.hyperprior);
    CHECK(back.experiment() == "two-joint-walker_paralysis-both");
    CHECK(run_stem(back) == "eppo-ind_two-joint-walker_paralysis-both_seed42");
  }
  SUBCASE("partial documents keep defaults") {
    const auto cfg = run_config_from_json(nlohmann::json::parse(R"({"seed": 3, "train": {"horizon": 64}})"));
    CHECK(cfg.seed == 3);
    CHECK(cfg.train.horizon == 64);
    CHECK(cfg.train.epochs == 10);
    CHECK(cfg.steps_per_task == 20000);
  }
  const auto key_of = [](const std::string& text) {
    try {
      run_config_from_json(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of(R"({"train": {"horizn": 64}})") == "train.horizn");
  CHECK(key_of(R"({"colour": 1})") == "colour");
  CHECK(key_of(R"({"seed": "one"})") == "seed");
  CHECK(key_of(R"({"seed": -1})") == "seed");
  CHECK(key_of(R"({"train": {"horizon": 1}})") == "train.horizon");
  CHECK(key_of(R"({"train": {"gamma": 1.0}})") == "train.gamma");
  CHECK(key_of(R"({"hyperprior": {"xi": -0.5}})") == "hyperprior.xi");
  CHECK(key_of(R"({"kappa": -0.5})") == "kappa");
  CHECK(key_of(R"({"algorithm": "sac"})") == "algorithm");
  CHECK(key_of(R"({"schedule": "sideways"})") == "schedule");
  CHECK(key_of(R"({"schedule": "paralysis:left"})") == "schedule");
  CHECK(key_of(R"({"environment": "ant"})") == "environment");
  CHECK(key_of(R"({"train": {"actor_hidden": [64, "x"]}})") == "train.actor_hidden");
  CHECK(key_of(R"({"n_tasks": 3})") == "<none>");

  SUBCASE("loading from disk") {
    const auto dir = scratch("config");
    try {
      load_run_config(dir / "absent.json");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("absent.json") != std::string::npos);
    }
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ConfigError);
    std::ofstream(dir / "ok.json") << R"({"algorithm": "ppo", "seed": 9})";
    const auto cfg = load_run_config(dir / "ok.json");
    CHECK(cfg.train.algorithm == ppo::Algorithm::kPpo);
    CHECK(cfg.seed == 9);
  }
}

TEST_CASE("run emits evaluations at task edges and intervals") {
  const auto dir = scratch("run");
  const auto result = run(tiny_config(dir));
  REQUIRE_FALSE(result.failed);
  std::vector<std::pair<std::int64_t, int>> points;
  for (const auto& r : result.records) points.emplace_back(r.global_step, r.task_index);
  const std::vector<std::pair<std::int64_t, int>> expected = {{0, 0}, {500, 0}, {1000, 0}, {1000, 1}, {1500, 1}, {2000, 1}};
  CHECK(points == expected);
  for (const auto& r : result.records) {
    CHECK(r.seed == 1);
    CHECK(std::isfinite(r.eval_return_mean));
    CHECK(r.eval_return_se >= 0.0);
  }

  CHECK(read_metrics_csv(result.metrics_path) == result.records);
  CHECK(result.metrics_path.filename() == "eppo-mean_slippery-car_decreasing_seed1.csv");
  REQUIRE(result.checkpoint_path.has_value());
  CHECK(fs::exists(*result.checkpoint_path));

  const auto manifest = nlohmann::json::parse(slurp(result.manifest_path));
  CHECK(manifest["status"] == "completed");
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["metrics_rows"] == 6);
  CHECK(manifest["config"]["steps_per_task"] == 1000);
  CHECK(run_config_from_json(manifest["config"]).train.algorithm == ppo::Algorithm::kEppoMean);
}

TEST_CASE("runs are reproducible and evaluation does not perturb training") {
  const auto dir_a = scratch("det_a");
  const auto dir_b = scratch("det_b");
  const auto a = run(tiny_config(dir_a, ppo::Algorithm::kEppoCor));
  const auto b = run(tiny_config(dir_b, ppo::Algorithm::kEppoCor));
  CHECK(slurp(a.metrics_path) == slurp(b.metrics_path));
  CHECK(slurp(*a.checkpoint_path) == slurp(*b.checkpoint_path));

  RunOptions quiet;
  quiet.evaluate = false;
  quiet.write_artifacts = false;
  std::vector<double> losses_quiet;
  quiet.hooks.on_update = [&](std::int64_t, const ppo::UpdateDiagnostics& d) { losses_quiet.push_back(d.critic_loss); };
  std::uint64_t end_quiet = 0;
  quiet.hooks.on_task_end = [&](int, const ppo::Agent& agent) { end_quiet = agent.checksum(); };
  const auto q = run(tiny_config(dir_a, ppo::Algorithm::kEppoCor), quiet);
  CHECK(q.records.empty());

  RunOptions loud = quiet;
  loud.evaluate = true;
  std::vector<double> losses_loud;
  loud.hooks.on_update = [&](std::int64_t, const ppo::UpdateDiagnostics& d) { losses_loud.push_back(d.critic_loss); };
  std::uint64_t end_loud = 0;
  loud.hooks.on_task_end = [&](int, const ppo::Agent& agent) { end_loud = agent.checksum(); };
  run(tiny_config(dir_a, ppo::Algorithm::kEppoCor), loud);
  CHECK(losses_quiet == losses_loud);
  CHECK(end_quiet == end_loud);
  CHECK(losses_quiet.size() == 2000 / 128);
}

TEST_CASE("every algorithm gets the same step budget") {
  const auto dir = scratch("budget");
  for (auto algo : {ppo::Algorithm::kPpo, ppo::Algorithm::kEppoMean}) {
    RunOptions opt;
    opt.write_artifacts = false;
    std::int64_t last = 0;
    opt.hooks.on_update = [&](std::int64_t step, const ppo::UpdateDiagnostics&) { last = step; };
    const auto r = run(tiny_config(dir, algo), opt);
    CHECK(r.records.back().global_step == 2000);
    CHECK(last == 1920);
  }
}

TEST_CASE("agent state carries across task boundaries") {
  const auto dir = scratch("carry");
  for (double lr : {0.0, 3e-4}) {
    RunConfig cfg = tiny_config(dir);
    cfg.n_tasks = 3;
    cfg.train.actor_lr = lr;
    cfg.train.critic_lr = lr;
    RunOptions opt;
    opt.write_artifacts = false;
    std::vector<std::uint64_t> ends, starts;
    std::vector<double> normalizer_count;
    std::vector<nn::ParamSet> actors;
    opt.hooks.on_task_end = [&](int, const ppo::Agent& a) {
      ends.push_back(a.checksum());
      actors.push_back(a.actor_params());
    };
    opt.hooks.on_task_start = [&](int, const ppo::Agent& a) {
      starts.push_back(a.checksum());
      normalizer_count.push_back(a.normalizer().count());
    };
    run(cfg, opt);
    REQUIRE(starts.size() == 3);
    CHECK(starts[1] == ends[0]);
    CHECK(starts[2] == ends[1]);
    CHECK(normalizer_count[2] > normalizer_count[1]);
    // Adam moments still accumulate at lr 0; the weights do not move.
    if (lr == 0.0) CHECK(actors[2] == actors[0]);
    if (lr > 0.0) CHECK_FALSE(actors[2] == actors[0]);
  }
}

TEST_CASE("run_many matches sequential runs") {
  const auto dir = scratch("many");
  std::vector<RunConfig> configs;
  for (std::uint64_t s : {1, 2, 3}) {
    RunConfig c = tiny_config(dir, ppo::Algorithm::kPpo);
    c.seed = s;
    configs.push_back(c);
  }
  RunOptions opt;
  opt.write_artifacts = false;
  int completed = 0;
  const auto parallel = run_many(configs, 3, [&](const RunResult&) { ++completed; }, opt);
  CHECK(completed == 3);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(parallel[i].config.seed == configs[i].seed);
    CHECK(parallel[i].records == run(configs[i], opt).records);
  }
  CHECK(parallel[0].records != parallel[1].records);
  CHECK_THROWS_AS(run_many(configs, 0), std::invalid_argument);
}

TEST_CASE("invalid run configs are rejected before training") {
  RunConfig cfg = tiny_config(scratch("invalid"));
  cfg.eval_interval = 0;
  CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("checkpoints restore bit-exactly") {
  const auto dir = scratch("ckpt");
  ppo::TrainConfig tc = tiny_config(dir).train;
  auto env = envs::make_environment("slippery-car");
  ppo::Trainer trainer(*env, tc, 5);
  for (int i = 0; i < 300; ++i) trainer.step();
  save_checkpoint(dir / "a.json", trainer.agent());

  ppo::Agent fresh(3, 1, tc, 99);
  CHECK(fresh.checksum() != trainer.agent().checksum());
  load_checkpoint(dir / "a.json", fresh);
  CHECK(fresh.checksum() == trainer.agent().checksum());
  CHECK(fresh.normalizer().mean() == trainer.agent().normalizer().mean());
  CHECK(fresh.normalizer().count() == trainer.agent().normalizer().count());
  CHECK(fresh.actor_optimizer() == trainer.agent().actor_optimizer());

  auto j = checkpoint_to_json(trainer.agent());
  j["version"] = kCheckpointVersion + 1;
  CHECK_THROWS_AS(restore_checkpoint(j, fresh), std::runtime_error);

  ppo::TrainConfig ppo_cfg = tc;
  ppo_cfg.algorithm = ppo::Algorithm::kPpo;
  ppo::Agent scalar(3, 1, ppo_cfg, 1);
  CHECK_THROWS_AS(restore_checkpoint(checkpoint_to_json(trainer.agent()), scalar), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.json", fresh), std::runtime_error);
}

TEST_CASE("collect_run_scores reads a results directory") {
  const auto dir = scratch("collect");
  CHECK_THROWS_AS(collect_run_scores(dir), std::runtime_error);
  CHECK_THROWS_AS(collect_run_scores(dir / "absent"), std::runtime_error);

  RunConfig cfg = tiny_config(dir, ppo::Algorithm::kEppoInd);
  cfg.seed = 4;
  const auto done = run(cfg);
  // Unrelated files are ignored.
  std::ofstream(dir / "summary.csv") << "metric\n";
  std::ofstream(dir / "notes_seedX.csv") << "x\n";

  // A failed run with a manifest saying so.
  RunResult failed;
  failed.config = tiny_config(dir, ppo::Algorithm::kPpo);
  failed.failed = true;
  failed.error = "critic loss is not finite";
  failed.records = {rec(0, 0, 1.0)};
  failed.metrics_path = dir / (run_stem(failed.config) + ".csv");
  failed.manifest_path = dir / (run_stem(failed.config) + ".manifest.json");
  write_metrics_csv(failed.metrics_path, failed.records);
  write_manifest(failed);

  const auto scores = collect_run_scores(dir);
  REQUIRE(scores.size() == 2);
  const auto& s_ind = scores[0].algorithm == "eppo-ind" ? scores[0] : scores[1];
  const auto& s_ppo = scores[0].algorithm == "ppo" ? scores[0] : scores[1];
  CHECK(s_ind.seed == 4);
  CHECK(s_ind.experiment == "slippery-car_decreasing");
  CHECK_FALSE(s_ind.failed);
  CHECK(s_ind.aulc == aulc(done.records));
  CHECK(s_ind.final_return == final_return(done.records));
  CHECK(s_ppo.failed);

  std::ofstream(dir / "ppo_slippery-car_decreasing_seed9.csv") << "garbage\n";
  CHECK_THROWS_AS(collect_run_scores(dir), std::runtime_error);
}

TEST_CASE("kappa_sweep") {
  RunConfig base = tiny_config(scratch("sweep"));
  // Injected runs: AULC is a known function of kappa and seed.
  const auto fixture = [](std::map<double, double> by_kappa) {
    return [by_kappa](const RunConfig& cfg) {
      RunResult r;
      r.config = cfg;
      const double v = by_kappa.at(cfg.train.kappa) + 0.01 * static_cast<double>(cfg.seed % 7);
      r.records = {rec(0, 0, v, static_cast<std::int64_t>(cfg.seed)), rec(10, 0, v, static_cast<std::int64_t>(cfg.seed))};
      return r;
    };
  };

  SUBCASE("the best mean AULC wins") {
    const auto res = kappa_sweep({base}, default_sweep_grids(), kSweepSeeds,
                                 fixture({{0.01, 1.0}, {0.05, 2.0}, {0.1, 3.0}, {0.25, 0.5}}));
    REQUIRE(res.choices.size() == 1);
    CHECK(res.choices[0].kappa.at(ppo::Algorithm::kEppoCor) == 0.1);
    CHECK(res.choices[0].kappa.at(ppo::Algorithm::kEppoInd) == 0.1);
    CHECK(res.cells.size() == 6);
    for (const auto& c : res.cells) CHECK(c.completed_runs == 3);
  }
  SUBCASE("ties go to the smaller kappa") {
    const auto res = kappa_sweep({base}, {{ppo::Algorithm::kEppoInd, {0.1, 0.05, 0.01}}}, kSweepSeeds,
                                 fixture({{0.01, 1.0}, {0.05, 2.0}, {0.1, 2.0}}));
    CHECK(res.choices[0].kappa.at(ppo::Algorithm::kEppoInd) == 0.05);
  }
  SUBCASE("a singleton grid is selected") {
    const auto res = kappa_sweep({base}, {{ppo::Algorithm::kEppoCor, {0.25}}}, kSweepSeeds, fixture({{0.25, -4.0}}));
    CHECK(res.choices[0].kappa.at(ppo::Algorithm::kEppoCor) == 0.25);
  }
  SUBCASE("runs land in per-kappa directories with the sweep seeds") {
    std::vector<RunConfig> seen;
    kappa_sweep({base}, {{ppo::Algorithm::kEppoCor, {0.01, 0.1}}}, kSweepSeeds, [&](const RunConfig& cfg) {
      seen.push_back(cfg);
      return fixture({{0.01, 1.0}, {0.1, 1.0}})(cfg);
    });
    REQUIRE(seen.size() == 6);
    CHECK(seen[0].output == base.output / "kappa-0.01");
    CHECK(seen[3].output == base.output / "kappa-0.1");
    CHECK(seen[0].seed == 1001);
    CHECK(seen[2].seed == 1003);
    CHECK(seen[0].train.algorithm == ppo::Algorithm::kEppoCor);
  }
  SUBCASE("failed runs are skipped, and all-failed grids are an error") {
    auto flaky = [&](const RunConfig& cfg) {
      RunResult r = fixture({{0.01, 1.0}, {0.1, 5.0}})(cfg);
      if (cfg.train.kappa == 0.1) r.failed = true;
      return r;
    };
    const auto res = kappa_sweep({base}, {{ppo::Algorithm::kEppoCor, {0.01, 0.1}}}, kSweepSeeds, flaky);
    CHECK(res.choices[0].kappa.at(ppo::Algorithm::kEppoCor) == 0.01);
    CHECK(res.cells[1].failed_runs == 3);
    CHECK_THROWS_AS(kappa_sweep({base}, {{ppo::Algorithm::kEppoCor, {0.1}}}, kSweepSeeds, flaky), std::runtime_error);
  }
  SUBCASE("invalid requests") {
    CHECK_THROWS_AS(kappa_sweep({base}, {{ppo::Algorithm::kEppoCor, {}}}), std::invalid_argument);
    CHECK_THROWS_AS(kappa_sweep({base}, default_sweep_grids(), {1001, 5}), std::invalid_argument);
    CHECK_THROWS_AS(kappa_sweep({}, default_sweep_grids()), std::invalid_argument);
  }
  SUBCASE("selection table") {
    RunConfig walker = base;
    walker.environment = "two-joint-walker";
    walker.schedule = "paralysis:back-one";
    const auto res = kappa_sweep({base, walker}, default_sweep_grids(), kSweepSeeds,
                                 fixture({{0.01, 1.0}, {0.05, 2.0}, {0.1, 0.0}, {0.25, 3.0}}));
    CHECK(format_kappa_table(res) ==
          "experiment,environment,strategy,eppo_cor_kappa,eppo_ind_kappa\n"
          "slippery,slippery-car,decreasing,0.25,0.05\n"
          "paralysis,two-joint-walker,back-one,0.25,0.05\n");
  }
}
