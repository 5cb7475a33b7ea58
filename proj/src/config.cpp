#include "eppo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "eppo/errors.hpp"
#include "eppo/schedule.hpp"

namespace eppo::harness {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    const std::string path = qualified(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(path, "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(path, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0) {
            throw ConfigError(path, "expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError(path, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(path, "expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        if (!it->is_array()) throw ConfigError(path, "expected an array of integers");
        for (const auto& v : *it) {
          if (!v.is_number_integer()) throw ConfigError(path, "expected an array of integers");
        }
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path, e.what());
    }
  }

  const json* child(const std::string& key) {
    known_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!known_.count(key)) throw ConfigError(qualified(key), "unknown key");
    }
  }

  std::string qualified(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string RunConfig::experiment() const {
  std::string sched = schedule;
  std::replace(sched.begin(), sched.end(), ':', '-');
  return environment + "_" + sched;
}

void RunConfig::validate() const {
  const auto ids = envs::environment_ids();
  require(std::find(ids.begin(), ids.end(), environment) != ids.end(), "environment",
          "unknown environment '" + environment + "'");
  try {
    const std::string family = schedule_family(schedule);
    if (family == "paralysis") {
      const auto schemes = envs::make_environment(environment)->paralysis_schemes();
      const std::string scheme = schedule_strategy(schedule);
      require(std::find(schemes.begin(), schemes.end(), scheme) != schemes.end(), "schedule",
              "unknown paralysis scheme '" + scheme + "' for " + environment);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("schedule", e.what());
  }
  require(n_tasks >= 1, "n_tasks", "must be >= 1");
  require(steps_per_task >= 1, "steps_per_task", "must be >= 1");
  require(eval_interval >= 1, "eval_interval", "must be >= 1");
  require(eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(!output.empty(), "output", "must not be empty");

  const ppo::TrainConfig& t = train;
  require(t.horizon >= 2, "train.horizon", "must be >= 2");
  require(t.epochs >= 1, "train.epochs", "must be >= 1");
  require(t.minibatch >= 1, "train.minibatch", "must be >= 1");
  require(positive(t.clip_epsilon), "train.clip_epsilon", "must be > 0");
  require(std::isfinite(t.actor_lr) && t.actor_lr >= 0.0, "train.actor_lr", "must be >= 0");
  require(std::isfinite(t.critic_lr) && t.critic_lr >= 0.0, "train.critic_lr", "must be >= 0");
  require(t.gamma > 0.0 && t.gamma < 1.0, "train.gamma", "must lie in (0, 1)");
  require(t.lambda >= 0.0 && t.lambda <= 1.0, "train.lambda", "must lie in [0, 1]");
  require(positive(t.max_grad_norm), "train.max_grad_norm", "must be > 0");
  for (int h : t.actor_hidden) require(h >= 1, "train.actor_hidden", "entries must be >= 1");
  for (int h : t.critic_hidden) require(h >= 1, "train.critic_hidden", "entries must be >= 1");
  require(std::isfinite(t.kappa) && t.kappa >= 0.0, "kappa", "must be >= 0");

  const evidential::HyperpriorConfig& h = t.hyperprior;
  require(std::isfinite(h.mu_omega0), "hyperprior.mu_omega0", "must be finite");
  require(positive(h.sigma_omega0), "hyperprior.sigma_omega0", "must be > 0");
  require(positive(h.nu_shape), "hyperprior.nu_shape", "must be > 0");
  require(positive(h.nu_rate), "hyperprior.nu_rate", "must be > 0");
  require(positive(h.alpha_shape), "hyperprior.alpha_shape", "must be > 0");
  require(positive(h.alpha_rate), "hyperprior.alpha_rate", "must be > 0");
  require(positive(h.beta_shape), "hyperprior.beta_shape", "must be > 0");
  require(positive(h.beta_rate), "hyperprior.beta_rate", "must be > 0");
  require(std::isfinite(h.alpha_shift), "hyperprior.alpha_shift", "must be finite");
  require(std::isfinite(h.xi) && h.xi >= 0.0, "hyperprior.xi", "must be >= 0");
}

ordered_json to_json(const RunConfig& cfg) {
  const ppo::TrainConfig& t = cfg.train;
  const evidential::HyperpriorConfig& h = t.hyperprior;
  ordered_json j;
  j["algorithm"] = ppo::to_string(t.algorithm);
  j["environment"] = cfg.environment;
  j["schedule"] = cfg.schedule;
  j["n_tasks"] = cfg.n_tasks;
  j["steps_per_task"] = cfg.steps_per_task;
  j["eval_interval"] = cfg.eval_interval;
  j["eval_episodes"] = cfg.eval_episodes;
  j["seed"] = cfg.seed;
  j["kappa"] = t.kappa;
  j["output"] = cfg.output.generic_string();
  j["train"] = {{"horizon", t.horizon},
                {"epochs", t.epochs},
                {"minibatch", t.minibatch},
                {"clip_epsilon", t.clip_epsilon},
                {"actor_lr", t.actor_lr},
                {"critic_lr", t.critic_lr},
                {"gamma", t.gamma},
                {"lambda", t.lambda},
                {"max_grad_norm", t.max_grad_norm},
                {"actor_hidden", t.actor_hidden},
                {"critic_hidden", t.critic_hidden},
                {"layer_norm", t.layer_norm}};
  j["hyperprior"] = {{"mu_omega0", h.mu_omega0},     {"sigma_omega0", h.sigma_omega0},
                     {"nu_shape", h.nu_shape},       {"nu_rate", h.nu_rate},
                     {"alpha_shape", h.alpha_shape}, {"alpha_rate", h.alpha_rate},
                     {"beta_shape", h.beta_shape},   {"beta_rate", h.beta_rate},
                     {"alpha_shift", h.alpha_shift}, {"xi", h.xi}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  ObjectReader root(j, "");
  std::string algorithm = ppo::to_string(cfg.train.algorithm);
  std::string output = cfg.output.generic_string();
  root.read("algorithm", algorithm);
  root.read("environment", cfg.environment);
  root.read("schedule", cfg.schedule);
  root.read("n_tasks", cfg.n_tasks);
  root.read("steps_per_task", cfg.steps_per_task);
  root.read("eval_interval", cfg.eval_interval);
  root.read("eval_episodes", cfg.eval_episodes);
  root.read("seed", cfg.seed);
  root.read("kappa", cfg.train.kappa);
  root.read("output", output);
  cfg.output = output;
  try {
    cfg.train.algorithm = ppo::parse_algorithm(algorithm);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("algorithm", e.what());
  }

  if (const json* train = root.child("train")) {
    ppo::TrainConfig& t = cfg.train;
    ObjectReader r(*train, "train");
    r.read("horizon", t.horizon);
    r.read("epochs", t.epochs);
    r.read("minibatch", t.minibatch);
    r.read("clip_epsilon", t.clip_epsilon);
    r.read("actor_lr", t.actor_lr);
    r.read("critic_lr", t.critic_lr);
    r.read("gamma", t.gamma);
    r.read("lambda", t.lambda);
    r.read("max_grad_norm", t.max_grad_norm);
    r.read("actor_hidden", t.actor_hidden);
    r.read("critic_hidden", t.critic_hidden);
    r.read("layer_norm", t.layer_norm);
    r.reject_unknown();
  }
  if (const json* prior = root.child("hyperprior")) {
    evidential::HyperpriorConfig& h = cfg.train.hyperprior;
    ObjectReader r(*prior, "hyperprior");
    r.read("mu_omega0", h.mu_omega0);
    r.read("sigma_omega0", h.sigma_omega0);
    r.read("nu_shape", h.nu_shape);
    r.read("nu_rate", h.nu_rate);
    r.read("alpha_shape", h.alpha_shape);
    r.read("alpha_rate", h.alpha_rate);
    r.read("beta_shape", h.beta_shape);
    r.read("beta_rate", h.beta_rate);
    r.read("alpha_shift", h.alpha_shift);
    r.read("xi", h.xi);
    r.reject_unknown();
  }
  root.reject_unknown();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed config: ") + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace eppo::harness
