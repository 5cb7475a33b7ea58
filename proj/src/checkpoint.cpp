#include "eppo/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace eppo::harness {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<double> checked(std::span<const double> values, const char* what) {
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw std::runtime_error(std::string("checkpoint: non-finite values in ") + what);
  }
  return {values.begin(), values.end()};
}

ordered_json adam_to_json(const nn::AdamState& s, const char* what) {
  ordered_json j;
  j["step"] = s.step;
  j["learning_rate"] = s.learning_rate;
  j["beta1"] = s.beta1;
  j["beta2"] = s.beta2;
  j["epsilon"] = s.epsilon;
  j["first_moment"] = checked(s.first_moment, what);
  j["second_moment"] = checked(s.second_moment, what);
  return j;
}

void copy_into(const json& j, std::span<double> dst, const char* what) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != dst.size()) {
    throw std::runtime_error(std::string("checkpoint: size mismatch for ") + what + " (" +
                             std::to_string(values.size()) + " vs " + std::to_string(dst.size()) +
                             ")");
  }
  std::copy(values.begin(), values.end(), dst.begin());
}

void adam_from_json(const json& j, nn::AdamState& s, const char* what) {
  s.step = j.at("step").get<std::int64_t>();
  s.learning_rate = j.at("learning_rate").get<double>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.epsilon = j.at("epsilon").get<double>();
  copy_into(j.at("first_moment"), s.first_moment, what);
  copy_into(j.at("second_moment"), s.second_moment, what);
}

}  // namespace

ordered_json checkpoint_to_json(const ppo::Agent& agent) {
  ordered_json j;
  j["version"] = kCheckpointVersion;
  j["obs_dim"] = agent.obs_dim();
  j["act_dim"] = agent.act_dim();
  j["evidential"] = agent.evidential();
  j["actor"] = checked(agent.actor_params().flat(), "actor");
  j["critic"] = checked(agent.critic_params().flat(), "critic");
  j["log_std"] = checked(agent.log_std(), "log_std");
  j["actor_optimizer"] = adam_to_json(agent.actor_optimizer(), "actor optimizer");
  j["log_std_optimizer"] = adam_to_json(agent.log_std_optimizer(), "log_std optimizer");
  j["critic_optimizer"] = adam_to_json(agent.critic_optimizer(), "critic optimizer");
  const auto& norm = agent.normalizer();
  j["normalizer"] = {{"count", norm.count()}, {"mean", norm.mean()}, {"var", norm.var()}};
  return j;
}

void restore_checkpoint(const json& j, ppo::Agent& agent) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    if (j.at("obs_dim").get<int>() != agent.obs_dim() ||
        j.at("act_dim").get<int>() != agent.act_dim() ||
        j.at("evidential").get<bool>() != agent.evidential()) {
      throw std::runtime_error("checkpoint: agent layout mismatch");
    }
    copy_into(j.at("actor"), agent.actor_params().flat(), "actor");
    copy_into(j.at("critic"), agent.critic_params().flat(), "critic");
    copy_into(j.at("log_std"), agent.log_std(), "log_std");
    adam_from_json(j.at("actor_optimizer"), agent.actor_optimizer(), "actor optimizer");
    adam_from_json(j.at("log_std_optimizer"), agent.log_std_optimizer(), "log_std optimizer");
    adam_from_json(j.at("critic_optimizer"), agent.critic_optimizer(), "critic optimizer");
    const json& norm = j.at("normalizer");
    auto mean = norm.at("mean").get<std::vector<double>>();
    auto var = norm.at("var").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(agent.obs_dim())) {
      throw std::runtime_error("checkpoint: normalizer size mismatch");
    }
    agent.normalizer().restore(std::move(mean), std::move(var), norm.at("count").get<double>());
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ppo::Agent& agent) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(agent).dump() << "\n";
}

void load_checkpoint(const std::filesystem::path& path, ppo::Agent& agent) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint: " + path.string() + ": " + e.what());
  }
  restore_checkpoint(j, agent);
}

}  // namespace eppo::harness
