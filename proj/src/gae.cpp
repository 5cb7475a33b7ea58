#include "eppo/gae.hpp"

#include <cmath>
#include <stdexcept>

#include "eppo/errors.hpp"

namespace eppo::gae {

namespace {

// S_t = sum_{l>=1} gamma^{2l} lambda^{2(l-1)} var[V_{t+l}] within the episode, so that the
// shared tail term is (1 - lambda)^2 S_t. Written without 1/lambda so lambda = 0 is exact.
std::vector<double> discounted_variance_tail(const ValueSequence& vals, const GaeConfig& cfg) {
  const std::size_t n = vals.steps();
  const double g2 = cfg.gamma * cfg.gamma;
  const double gl2 = g2 * cfg.lambda * cfg.lambda;
  std::vector<double> tail(n, 0.0);
  double next = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    if (vals.terminated[t]) {
      next = 0.0;
    } else {
      next = g2 * vals.variances[t + 1] + gl2 * next;
    }
    tail[t] = next;
  }
  return tail;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kMean:
      return "mean";
    case Variant::kCorrelated:
      return "correlated";
    case Variant::kIndependent:
      return "independent";
  }
  return "unknown";
}

void GaeConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gae: gamma must be in (0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("gae: lambda must be in [0,1]");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("gae: kappa must be >= 0");
  }
}

void ValueSequence::validate() const {
  const std::size_t n = steps();
  if (means.size() != n + 1 || variances.size() != n + 1) {
    throw ShapeError("value sequence: means/variances need one entry per step plus bootstrap");
  }
  for (double v : variances) {
    if (!(v >= 0.0)) throw std::invalid_argument("value sequence: variances must be >= 0");
  }
}

std::vector<double> td_residual_means(std::span<const double> rewards, const ValueSequence& vals,
                                      double gamma) {
  const std::size_t n = vals.steps();
  if (rewards.size() != n || vals.means.size() != n + 1) {
    throw ShapeError("td residuals: rewards/means lengths inconsistent");
  }
  std::vector<double> deltas(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double bootstrap = vals.terminated[t] ? 0.0 : gamma * vals.means[t + 1];
    deltas[t] = rewards[t] + bootstrap - vals.means[t];
  }
  return deltas;
}

std::vector<double> gae_mean(std::span<const double> deltas, const GaeConfig& cfg,
                             const std::vector<bool>& terminated) {
  if (deltas.size() != terminated.size()) {
    throw ShapeError("gae mean: deltas and termination flags differ in length");
  }
  const double decay = cfg.gamma * cfg.lambda;
  std::vector<double> adv(deltas.size());
  double next = 0.0;
  for (std::size_t t = deltas.size(); t-- > 0;) {
    next = terminated[t] ? deltas[t] : deltas[t] + decay * next;
    adv[t] = next;
  }
  return adv;
}

std::vector<double> gae_var_correlated(const ValueSequence& vals, const GaeConfig& cfg) {
  vals.validate();
  const std::vector<double> tail = discounted_variance_tail(vals, cfg);
  const double w = (1.0 - cfg.lambda) * (1.0 - cfg.lambda);
  std::vector<double> out(vals.steps());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = vals.variances[t] + w * tail[t];
  return out;
}

std::vector<double> gae_var_independent(const ValueSequence& vals, const GaeConfig& cfg) {
  vals.validate();
  const std::vector<double> tail = discounted_variance_tail(vals, cfg);
  const double w = (1.0 - cfg.lambda) * (1.0 - cfg.lambda);
  const double head = (1.0 - cfg.lambda) / (1.0 + cfg.lambda);
  std::vector<double> out(vals.steps());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = head * vals.variances[t] + w * tail[t];
  return out;
}

std::vector<double> ucb_advantage(std::span<const double> mean, std::span<const double> variance,
                                  double kappa) {
  if (mean.size() != variance.size()) throw ShapeError("ucb: mean/variance lengths differ");
  std::vector<double> out(mean.begin(), mean.end());
  for (double v : variance) {
    if (!(v >= 0.0)) throw std::invalid_argument("ucb: negative advantage variance");
  }
  if (kappa == 0.0) return out;
  for (std::size_t t = 0; t < out.size(); ++t) out[t] += kappa * std::sqrt(variance[t]);
  return out;
}

std::vector<double> normalize_batch(std::span<const double> adv) {
  if (adv.size() < 2) throw std::invalid_argument("normalize_batch: need at least two values");
  const double n = static_cast<double>(adv.size());
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= n;
  double sq = 0.0;
  for (double a : adv) sq += (a - mean) * (a - mean);
  const double denom = std::sqrt(sq / n) + 1e-8;
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) / denom;
  return out;
}

AdvantageEstimate estimate(std::span<const double> rewards, const ValueSequence& vals,
                           const GaeConfig& cfg) {
  cfg.validate();
  vals.validate();
  AdvantageEstimate est;
  est.mean = gae_mean(td_residual_means(rewards, vals, cfg.gamma), cfg, vals.terminated);
  switch (cfg.variant) {
    case Variant::kMean:
      est.variance.assign(est.mean.size(), 0.0);
      break;
    case Variant::kCorrelated:
      est.variance = gae_var_correlated(vals, cfg);
      break;
    case Variant::kIndependent:
      est.variance = gae_var_independent(vals, cfg);
      break;
  }
  est.ucb = ucb_advantage(est.mean, est.variance, cfg.effective_kappa());
  return est;
}

}  // namespace eppo::gae
