#include "eppo/ppo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "eppo/errors.hpp"

namespace eppo::ppo {

namespace {

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

void fnv_mix(std::uint64_t& h, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
}

std::vector<double> finite_or_diverged(std::vector<double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DivergedError(std::string(what) + " output is not finite");
  }
  return values;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPpo:
      return "ppo";
    case Algorithm::kEppoMean:
      return "eppo-mean";
    case Algorithm::kEppoCor:
      return "eppo-cor";
    case Algorithm::kEppoInd:
      return "eppo-ind";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "ppo") return Algorithm::kPpo;
  if (name == "eppo-mean") return Algorithm::kEppoMean;
  if (name == "eppo-cor") return Algorithm::kEppoCor;
  if (name == "eppo-ind") return Algorithm::kEppoInd;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

bool uses_evidential_critic(Algorithm a) { return a != Algorithm::kPpo; }

gae::Variant advantage_variant(Algorithm a) {
  switch (a) {
    case Algorithm::kEppoCor:
      return gae::Variant::kCorrelated;
    case Algorithm::kEppoInd:
      return gae::Variant::kIndependent;
    default:
      return gae::Variant::kMean;
  }
}

void TrainConfig::validate() const {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (minibatch < 1) throw std::invalid_argument("minibatch must be >= 1");
  if (!(clip_epsilon > 0.0)) throw std::invalid_argument("clip_epsilon must be > 0");
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) {
    throw std::invalid_argument("learning rates must be >= 0");
  }
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("max_grad_norm must be > 0");
  gae_config().validate();
  hyperprior.validate();
  for (int h : actor_hidden) {
    if (h < 1) throw std::invalid_argument("actor_hidden entries must be >= 1");
  }
  for (int h : critic_hidden) {
    if (h < 1) throw std::invalid_argument("critic_hidden entries must be >= 1");
  }
}

gae::GaeConfig TrainConfig::gae_config() const {
  gae::GaeConfig g;
  g.gamma = gamma;
  g.lambda = lambda;
  g.variant = advantage_variant(algorithm);
  g.kappa = kappa;
  return g;
}

// --- ObservationNormalizer ---

ObservationNormalizer::ObservationNormalizer(int dim)
    : mean_(static_cast<std::size_t>(dim), 0.0), var_(static_cast<std::size_t>(dim), 1.0) {}

void ObservationNormalizer::update(std::span<const double> obs) {
  if (obs.size() != mean_.size()) throw ShapeError("normalizer: observation size mismatch");
  const double total = count_ + 1.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double delta = obs[i] - mean_[i];
    const double new_mean = mean_[i] + delta / total;
    const double m2 = var_[i] * count_ + delta * delta * count_ / total;
    mean_[i] = new_mean;
    var_[i] = m2 / total;
  }
  count_ = total;
}

std::vector<double> ObservationNormalizer::normalize(std::span<const double> obs) const {
  if (obs.size() != mean_.size()) throw ShapeError("normalizer: observation size mismatch");
  std::vector<double> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out[i] = std::clamp((obs[i] - mean_[i]) / std::sqrt(var_[i] + 1e-8), -kClip, kClip);
  }
  return out;
}

void ObservationNormalizer::restore(std::vector<double> mean, std::vector<double> var,
                                    double count) {
  if (mean.size() != var.size()) throw ShapeError("normalizer: mean/var size mismatch");
  mean_ = std::move(mean);
  var_ = std::move(var);
  count_ = count;
}

// --- Agent ---

Agent::Agent(int obs_dim, int act_dim, const TrainConfig& cfg, std::uint64_t seed)
    : actor_spec_{obs_dim, cfg.actor_hidden, act_dim, cfg.layer_norm, nn::Activation::kRelu},
      critic_spec_{obs_dim, cfg.critic_hidden, uses_evidential_critic(cfg.algorithm) ? 4 : 1,
                   cfg.layer_norm, nn::Activation::kRelu},
      log_std_(static_cast<std::size_t>(act_dim), 0.0),
      normalizer_(obs_dim) {
  auto rng = derive_rng(seed, 1);
  actor_ = nn::init_params(actor_spec_, rng, 0.01);
  critic_ = nn::init_params(critic_spec_, rng, 1.0);
  actor_opt_ = nn::AdamState(actor_.size(), cfg.actor_lr);
  log_std_opt_ = nn::AdamState(log_std_.size(), cfg.actor_lr);
  critic_opt_ = nn::AdamState(critic_.size(), cfg.critic_lr);
}

PolicyOutput Agent::policy(std::span<const double> normalized_obs) const {
  return {finite_or_diverged(nn::forward(actor_spec_, actor_, normalized_obs), "policy"),
          finite_or_diverged(log_std_, "log-std")};
}

evidential::EvidentialParams Agent::evidential_params(
    std::span<const double> normalized_obs) const {
  if (!evidential()) throw std::logic_error("agent: critic is not evidential");
  const auto raw = finite_or_diverged(nn::forward(critic_spec_, critic_, normalized_obs), "critic");
  return evidential::head_transform({raw[0], raw[1], raw[2], raw[3]});
}

ValueMoments Agent::value(std::span<const double> normalized_obs) const {
  if (evidential()) {
    const auto m = evidential_params(normalized_obs);
    return {evidential::predictive_mean(m), evidential::predictive_variance(m).total};
  }
  return {finite_or_diverged(nn::forward(critic_spec_, critic_, normalized_obs), "critic")[0], 0.0};
}

std::uint64_t Agent::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_mix(h, actor_.flat());
  fnv_mix(h, critic_.flat());
  fnv_mix(h, log_std_);
  for (const nn::AdamState* s : {&actor_opt_, &log_std_opt_, &critic_opt_}) {
    fnv_mix(h, s->first_moment);
    fnv_mix(h, s->second_moment);
  }
  return h;
}

// --- RolloutBuffer ---

RolloutBuffer::RolloutBuffer(int obs_dim_, int act_dim_) : obs_dim(obs_dim_), act_dim(act_dim_) {}

void RolloutBuffer::clear() {
  *this = RolloutBuffer(obs_dim, act_dim);
}

bool RolloutBuffer::segment_end(std::size_t t) const {
  return terminated[t] || truncated[t] || t + 1 == size();
}

std::span<const double> RolloutBuffer::state(std::size_t t) const {
  return std::span<const double>(states).subspan(t * static_cast<std::size_t>(obs_dim),
                                                 static_cast<std::size_t>(obs_dim));
}

std::span<const double> RolloutBuffer::action(std::size_t t) const {
  return std::span<const double>(actions).subspan(t * static_cast<std::size_t>(act_dim),
                                                  static_cast<std::size_t>(act_dim));
}

void compute_targets_and_advantages(RolloutBuffer& buffer, const TrainConfig& cfg) {
  const std::size_t n = buffer.size();
  if (n < 2) throw std::invalid_argument("rollout buffer needs at least two steps");
  if (buffer.values.size() != n || buffer.next_values.size() != n) {
    throw ShapeError("rollout buffer: value arrays incomplete");
  }
  const gae::GaeConfig gcfg = cfg.gae_config();
  buffer.value_targets.assign(n, 0.0);
  buffer.advantage_means.assign(n, 0.0);
  buffer.advantage_variances.assign(n, 0.0);
  buffer.advantage_ucb.assign(n, 0.0);

  std::size_t start = 0;
  for (std::size_t end = 0; end < n; ++end) {
    if (!buffer.segment_end(end)) continue;
    const std::size_t len = end - start + 1;
    gae::ValueSequence vals;
    vals.means.resize(len + 1);
    vals.variances.resize(len + 1);
    vals.terminated.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      vals.means[i] = buffer.values[start + i].mean;
      vals.variances[i] = buffer.values[start + i].variance;
      vals.terminated[i] = buffer.terminated[start + i];
    }
    vals.means[len] = buffer.next_values[end].mean;
    vals.variances[len] = buffer.next_values[end].variance;

    const std::span<const double> rewards(buffer.rewards.data() + start, len);
    const gae::AdvantageEstimate est = gae::estimate(rewards, vals, gcfg);

    double ret = buffer.terminated[end] ? 0.0 : vals.means[len];
    for (std::size_t i = len; i-- > 0;) {
      ret = rewards[i] + (vals.terminated[i] ? 0.0 : cfg.gamma * ret);
      buffer.value_targets[start + i] = ret;
      buffer.advantage_means[start + i] = est.mean[i];
      buffer.advantage_variances[start + i] = est.variance[i];
      buffer.advantage_ucb[start + i] = est.ucb[i];
    }
    start = end + 1;
  }
  buffer.advantages = gae::normalize_batch(buffer.advantage_ucb);
}

CriticLoss critic_loss_evidential(const nn::Matrix& raw, std::span<const double> targets,
                                  const evidential::HyperpriorConfig& cfg) {
  if (raw.rows() != 4 || static_cast<std::size_t>(raw.cols()) != targets.size()) {
    throw ShapeError("evidential critic loss: expected 4 x batch raw outputs");
  }
  const double n = static_cast<double>(targets.size());
  CriticLoss out;
  out.grad_raw.resize(4, raw.cols());
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const evidential::RawHead r = {raw(0, i), raw(1, i), raw(2, i), raw(3, i)};
    const auto m = evidential::head_transform(r);
    const double y = targets[static_cast<std::size_t>(i)];
    out.loss += evidential::evl_loss(m, y, cfg);
    const auto g = evidential::head_transform_backward(r, evidential::evl_gradient(m, y, cfg));
    for (int k = 0; k < 4; ++k) out.grad_raw(k, i) = g[static_cast<std::size_t>(k)] / n;
  }
  out.loss /= n;
  return out;
}

CriticLoss critic_loss_mse(const nn::Matrix& predictions, std::span<const double> targets) {
  if (predictions.rows() != 1 || static_cast<std::size_t>(predictions.cols()) != targets.size()) {
    throw ShapeError("mse critic loss: expected 1 x batch predictions");
  }
  const double n = static_cast<double>(targets.size());
  CriticLoss out;
  out.grad_raw.resize(1, predictions.cols());
  for (Eigen::Index i = 0; i < predictions.cols(); ++i) {
    const double err = predictions(0, i) - targets[static_cast<std::size_t>(i)];
    out.loss += err * err;
    out.grad_raw(0, i) = 2.0 * err / n;
  }
  out.loss /= n;
  return out;
}

double critic_loss_evidential(const RolloutBuffer& buffer,
                              const evidential::HyperpriorConfig& cfg) {
  if (buffer.evidential.size() != buffer.size() || buffer.value_targets.size() != buffer.size()) {
    throw ShapeError("evidential critic loss: buffer lacks evidential params or targets");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < buffer.size(); ++t) {
    total += evidential::evl_loss(buffer.evidential[t], buffer.value_targets[t], cfg);
  }
  return total / static_cast<double>(buffer.size());
}

double critic_loss_mse(const RolloutBuffer& buffer) {
  if (buffer.value_targets.size() != buffer.size()) {
    throw ShapeError("mse critic loss: buffer lacks targets");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < buffer.size(); ++t) {
    const double err = buffer.values[t].mean - buffer.value_targets[t];
    total += err * err;
  }
  return total / static_cast<double>(buffer.size());
}

ActorLoss actor_loss_and_gradient(const Agent& agent, const nn::Matrix& obs,
                                  const nn::Matrix& actions, std::span<const double> old_logp,
                                  std::span<const double> advantages, double clip_epsilon,
                                  nn::ForwardCache* cache) {
  const int act_dim = agent.act_dim();
  const Eigen::Index b = obs.cols();
  if (actions.rows() != act_dim || actions.cols() != b ||
      old_logp.size() != static_cast<std::size_t>(b) ||
      advantages.size() != static_cast<std::size_t>(b)) {
    throw ShapeError("actor loss: batch shapes disagree");
  }
  nn::ForwardCache local;
  nn::ForwardCache* c = cache ? cache : &local;
  const nn::Matrix mean = nn::forward_batch(agent.actor_params(), obs, c);
  const std::vector<double>& log_std = agent.log_std();

  ActorLoss out;
  out.new_logp.resize(static_cast<std::size_t>(b));
  PolicyOutput policy{std::vector<double>(static_cast<std::size_t>(act_dim)), log_std};
  std::vector<double> action(static_cast<std::size_t>(act_dim));
  for (Eigen::Index j = 0; j < b; ++j) {
    for (int k = 0; k < act_dim; ++k) {
      policy.mean[k] = mean(k, j);
      action[k] = actions(k, j);
    }
    out.new_logp[static_cast<std::size_t>(j)] = policy_log_prob(policy, action);
  }
  out.surrogate = clipped_surrogate(out.new_logp, old_logp, advantages, clip_epsilon);

  nn::Matrix grad_mean(act_dim, b);
  out.log_std_grads.assign(static_cast<std::size_t>(act_dim), 0.0);
  for (Eigen::Index j = 0; j < b; ++j) {
    const double g = out.surrogate.grad_new_logp[static_cast<std::size_t>(j)];
    for (int k = 0; k < act_dim; ++k) {
      const double inv_var = std::exp(-2.0 * log_std[k]);
      const double diff = actions(k, j) - mean(k, j);
      grad_mean(k, j) = g * diff * inv_var;
      out.log_std_grads[k] += g * (diff * diff * inv_var - 1.0);
    }
  }
  out.grads = nn::ParamSet(agent.actor_spec());
  nn::backward_batch(agent.actor_params(), *c, grad_mean, out.grads);
  return out;
}

CriticGradient critic_loss_and_gradient(const Agent& agent, const nn::Matrix& obs,
                                        std::span<const double> targets,
                                        const evidential::HyperpriorConfig& cfg,
                                        nn::ForwardCache* cache) {
  nn::ForwardCache local;
  nn::ForwardCache* c = cache ? cache : &local;
  const nn::Matrix raw = nn::forward_batch(agent.critic_params(), obs, c);
  const CriticLoss loss = agent.evidential() ? critic_loss_evidential(raw, targets, cfg)
                                             : critic_loss_mse(raw, targets);
  CriticGradient out;
  out.loss = loss.loss;
  out.grads = nn::ParamSet(agent.critic_spec());
  nn::backward_batch(agent.critic_params(), *c, loss.grad_raw, out.grads);
  return out;
}

UpdateDiagnostics update(const RolloutBuffer& buffer, Agent& agent, const TrainConfig& cfg,
                         std::mt19937_64& rng) {
  const std::size_t n = buffer.size();
  if (buffer.advantages.size() != n || buffer.value_targets.size() != n) {
    throw std::invalid_argument("update: targets and advantages must be computed first");
  }
  const int obs_dim = agent.obs_dim();
  const int act_dim = agent.act_dim();
  const auto minibatch = static_cast<std::size_t>(cfg.minibatch);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  nn::ForwardCache actor_cache;
  nn::ForwardCache critic_cache;

  UpdateDiagnostics diag;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < n; begin += minibatch) {
      const std::size_t count = std::min(minibatch, n - begin);
      const auto b = static_cast<Eigen::Index>(count);
      nn::Matrix obs(obs_dim, b);
      std::vector<double> old_logp(count);
      std::vector<double> adv(count);
      std::vector<double> targets(count);
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t idx = order[begin + j];
        const auto s = buffer.state(idx);
        for (int k = 0; k < obs_dim; ++k) obs(k, static_cast<Eigen::Index>(j)) = s[k];
        old_logp[j] = buffer.log_probs[idx];
        adv[j] = buffer.advantages[idx];
        targets[j] = buffer.value_targets[idx];
      }

      nn::Matrix actions(act_dim, b);
      for (std::size_t j = 0; j < count; ++j) {
        const auto a = buffer.action(order[begin + j]);
        for (int k = 0; k < act_dim; ++k) actions(k, static_cast<Eigen::Index>(j)) = a[k];
      }

      // Actor.
      ActorLoss actor = actor_loss_and_gradient(agent, obs, actions, old_logp, adv,
                                                cfg.clip_epsilon, &actor_cache);
      const SurrogateResult& surrogate = actor.surrogate;
      if (!std::isfinite(surrogate.loss)) throw DivergedError("actor loss is not finite");
      if (diag.minibatches == 0) {
        diag.first_surrogate_loss = surrogate.loss;
        for (std::size_t j = 0; j < count; ++j) {
          diag.first_max_ratio_deviation =
              std::max(diag.first_max_ratio_deviation,
                       std::abs(std::exp(actor.new_logp[j] - old_logp[j]) - 1.0));
        }
      }
      {
        const std::span<double> groups[] = {actor.grads.flat(), actor.log_std_grads};
        nn::clip_global_norm(groups, cfg.max_grad_norm);
      }
      nn::adam_step(agent.actor_optimizer(), agent.actor_params().flat(), actor.grads.flat());
      nn::adam_step(agent.log_std_optimizer(), agent.log_std(), actor.log_std_grads);

      // Critic.
      CriticGradient critic =
          critic_loss_and_gradient(agent, obs, targets, cfg.hyperprior, &critic_cache);
      if (!std::isfinite(critic.loss)) throw DivergedError("critic loss is not finite");
      {
        const std::span<double> groups[] = {critic.grads.flat()};
        nn::clip_global_norm(groups, cfg.max_grad_norm);
      }
      nn::adam_step(agent.critic_optimizer(), agent.critic_params().flat(), critic.grads.flat());

      diag.actor_loss += surrogate.loss;
      diag.critic_loss += critic.loss;
      diag.clip_fraction += surrogate.clip_fraction;
      ++diag.minibatches;
    }
  }
  if (diag.minibatches > 0) {
    diag.actor_loss /= diag.minibatches;
    diag.critic_loss /= diag.minibatches;
    diag.clip_fraction /= diag.minibatches;
  }
  return diag;
}

// --- Trainer ---

Trainer::Trainer(envs::Environment& env, const TrainConfig& cfg, std::uint64_t seed)
    : env_(env),
      cfg_(cfg),
      agent_(env.obs_dim(), env.act_dim(), cfg, seed),
      buffer_(env.obs_dim(), env.act_dim()),
      action_rng_(derive_rng(seed, 2)),
      update_rng_(derive_rng(seed, 3)) {
  cfg_.validate();
  obs_ = env_.reset(seed);
}

std::optional<UpdateDiagnostics> Trainer::step() {
  agent_.normalizer().update(obs_);
  const std::vector<double> state = agent_.normalizer().normalize(obs_);
  const PolicyOutput out = agent_.policy(state);
  const std::vector<double> action = finite_or_diverged(sample_action(out, action_rng_), "sampled action");
  const double logp = policy_log_prob(out, action);

  const auto critic_at = [this](std::span<const double> s, ValueMoments& moments,
                                evidential::EvidentialParams* params) {
    if (agent_.evidential()) {
      *params = agent_.evidential_params(s);
      moments = {evidential::predictive_mean(*params),
                 evidential::predictive_variance(*params).total};
    } else {
      moments = agent_.value(s);
    }
  };

  ValueMoments moments;
  evidential::EvidentialParams params;
  critic_at(state, moments, &params);

  const envs::StepResult result = env_.step(action);
  ++steps_;

  buffer_.states.insert(buffer_.states.end(), state.begin(), state.end());
  buffer_.actions.insert(buffer_.actions.end(), action.begin(), action.end());
  buffer_.log_probs.push_back(logp);
  buffer_.rewards.push_back(result.reward);
  buffer_.terminated.push_back(result.terminated);
  buffer_.truncated.push_back(result.truncated);
  buffer_.values.push_back(moments);
  buffer_.next_values.emplace_back();
  if (agent_.evidential()) {
    buffer_.evidential.push_back(params);
    buffer_.next_evidential.emplace_back();
  }

  const bool full = buffer_.size() == static_cast<std::size_t>(cfg_.horizon);
  const std::size_t t = buffer_.size() - 1;
  if (result.truncated || (full && !result.terminated)) {
    // Bootstrap from the true successor before any reset.
    const std::vector<double> next = agent_.normalizer().normalize(result.observation);
    critic_at(next, buffer_.next_values[t],
              agent_.evidential() ? &buffer_.next_evidential[t] : &params);
  }
  if (t > 0 && !buffer_.terminated[t - 1] && !buffer_.truncated[t - 1]) {
    buffer_.next_values[t - 1] = moments;
    if (agent_.evidential()) buffer_.next_evidential[t - 1] = params;
  }

  obs_ = (result.terminated || result.truncated) ? env_.reset() : result.observation;

  if (!full) return std::nullopt;
  compute_targets_and_advantages(buffer_, cfg_);
  UpdateDiagnostics diag = update(buffer_, agent_, cfg_, update_rng_);
  buffer_.clear();
  return diag;
}

std::vector<double> Trainer::evaluate(envs::Environment& eval_env, int episodes) const {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<double> obs = eval_env.reset();
    double total = 0.0;
    for (;;) {
      const std::vector<double> state = agent_.normalizer().normalize(obs);
      const std::vector<double> action = agent_.policy(state).mean;
      const envs::StepResult r = eval_env.step(action);
      total += r.reward;
      if (r.terminated || r.truncated) break;
      obs = r.observation;
    }
    returns.push_back(total);
  }
  return returns;
}

}  // namespace eppo::ppo
