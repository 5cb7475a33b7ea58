#include "eppo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eppo/evidential.hpp"
#include "eppo/gae.hpp"
#include "eppo/mlp.hpp"
#include "eppo/policy.hpp"
#include "eppo/ppo.hpp"

namespace eppo::verify {

namespace {

using evidential::EvidentialParams;

constexpr double kFdStep = 1e-5;
constexpr double kGradTolerance = 1e-4;
// Below this magnitude gradient errors are judged in absolute terms.
constexpr double kGradScaleFloor = 1e-2;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

EvidentialParams random_params(std::mt19937_64& rng, double alpha_lo = 1.05) {
  return {uniform(rng, -5.0, 5.0), uniform(rng, 0.1, 10.0), uniform(rng, alpha_lo, 10.0),
          uniform(rng, 0.1, 10.0)};
}

std::string describe(const EvidentialParams& m) {
  std::ostringstream s;
  s.precision(6);
  s << "(omega=" << m.omega << ", nu=" << m.nu << ", alpha=" << m.alpha << ", beta=" << m.beta
    << ")";
  return s.str();
}

// Scaled gradient mismatch: relative above kGradScaleFloor, absolute (x 1/floor) below.
double grad_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradScaleFloor});
  const double err = std::abs(analytic - numeric) / scale;
  return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
}

// max() that lets a NaN through as infinity.
double worse(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
  return std::max(a, b);
}

// Central differences of f over every entry of x; returns the worst grad_error.
double fd_compare(std::span<double> x, std::span<const double> analytic,
                  const std::function<double()>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + kFdStep;
    const double up = f();
    x[i] = saved - kFdStep;
    const double down = f();
    x[i] = saved;
    worst = std::max(worst, grad_error(analytic[i], (up - down) / (2.0 * kFdStep)));
  }
  return worst;
}

CheckResult make(const std::string& name, double measured, double tolerance,
                 std::string detail = {}) {
  return {name, measured <= tolerance, measured, tolerance, std::move(detail)};  // NaN fails
}

// --- evidential ------------------------------------------------------------------------------

CheckResult nll_student_t(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 1000; ++i) {
    const EvidentialParams m = random_params(rng);
    const double y = m.omega + uniform(rng, -6.0, 6.0);
    const double scale = std::sqrt(m.beta * (1.0 + m.nu) / (m.nu * m.alpha));
    const boost::math::students_t_distribution<double> dist(2.0 * m.alpha);
    const double oracle = -(std::log(boost::math::pdf(dist, (y - m.omega) / scale)) - std::log(scale));
    const double err = std::abs(evidential::nll_loss(m, y) + opt.nll_offset - oracle);
    if (!(err <= worst)) {
      worst = err;
      where = describe(m);
    }
  }
  return make("evidential.nll_student_t", worst, 1e-10, "worst at " + where);
}

// p(y | m) by integrating N(y | mu, s) N(mu | omega, s / nu) IG(s | alpha, beta) over (mu, s).
double nig_marginal_density(const EvidentialParams& m, double y) {
  using boost::math::quadrature::gauss_kronrod;
  const double log_ig_norm = m.alpha * std::log(m.beta) - std::lgamma(m.alpha);
  const auto outer = [&](double u) {
    const double s = std::exp(u);
    if (!(s > 0.0) || !std::isfinite(s)) return 0.0;
    const double centre = (y + m.nu * m.omega) / (1.0 + m.nu);
    const double sd = std::sqrt(s / (1.0 + m.nu));
    const auto inner = [&](double mu) {
      const double a = (y - mu) * (y - mu) / s;
      const double b = m.nu * (mu - m.omega) * (mu - m.omega) / s;
      return std::sqrt(m.nu) / (2.0 * M_PI * s) * std::exp(-0.5 * (a + b));
    };
    const double joint =
        gauss_kronrod<double, 31>::integrate(inner, centre - 12.0 * sd, centre + 12.0 * sd, 10,
                                             1e-12);
    const double ig = std::exp(log_ig_norm - (m.alpha + 1.0) * u - m.beta / s);
    return joint * ig * s;  // ds = s du
  };
  // The integrand in u = log s vanishes double-exponentially below and exponentially above.
  const double centre = std::log(m.beta / (m.alpha + 1.0));
  return gauss_kronrod<double, 61>::integrate(outer, centre - 30.0, centre + 60.0, 15, 1e-12);
}

CheckResult nll_quadrature(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 1);
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 100; ++i) {
    const EvidentialParams m = {uniform(rng, -3.0, 3.0), uniform(rng, 0.2, 5.0),
                                uniform(rng, 1.2, 6.0), uniform(rng, 0.2, 5.0)};
    const double y = m.omega + uniform(rng, -3.0, 3.0);
    const double oracle = -std::log(nig_marginal_density(m, y));
    const double err = std::abs(evidential::nll_loss(m, y) + opt.nll_offset - oracle);
    if (!(err <= worst)) {
      worst = err;
      where = describe(m);
    }
  }
  return make("evidential.nll_quadrature", worst, 1e-4, "worst at " + where);
}

CheckResult variance_mc(const VerifyOptions& opt) {
  constexpr int kSamples = 1000000;
  std::mt19937_64 rng(opt.seed + 2);
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 20; ++i) {
    // alpha > 4 keeps the moments behind the standard errors finite.
    const EvidentialParams m = {uniform(rng, -3.0, 3.0), uniform(rng, 0.2, 5.0),
                                uniform(rng, 4.5, 10.0), uniform(rng, 0.2, 5.0)};
    std::gamma_distribution<double> precision(m.alpha, 1.0 / m.beta);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> sigma2(kSamples);
    std::vector<double> mu(kSamples);
    for (int k = 0; k < kSamples; ++k) {
      sigma2[k] = 1.0 / precision(rng);
      mu[k] = m.omega + std::sqrt(sigma2[k] / m.nu) * normal(rng);
    }
    const auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const double n = kSamples;
    const double s2_mean = mean_of(sigma2);
    double s2_var = 0.0;
    for (double x : sigma2) s2_var += (x - s2_mean) * (x - s2_mean);
    s2_var /= n - 1.0;
    const double mu_mean = mean_of(mu);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : mu) {
      const double d2 = (x - mu_mean) * (x - mu_mean);
      m2 += d2;
      m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    const double mu_var = m2 * n / (n - 1.0);

    const auto d = evidential::predictive_variance(m);
    const double z_alea = std::abs(s2_mean - d.aleatoric) / std::sqrt(s2_var / n);
    const double z_epi = std::abs(mu_var - d.epistemic) / std::sqrt((m4 - m2 * m2) / n);
    const double z = std::max(z_alea, z_epi);
    if (!(z <= worst)) {
      worst = z;
      where = describe(m);
    }
  }
  return make("evidential.variance_mc", worst, 3.0, "max |z| at " + where);
}

// --- gradients -------------------------------------------------------------------------------

void randomize(nn::ParamSet& p, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> normal(0.0, sd);
  for (double& v : p.flat()) v = normal(rng);
}

nn::Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

CheckResult grad_mlp(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 3);
  double worst = 0.0;
  for (bool norm : {true, false}) {
    const nn::MlpSpec spec{3, {6, 5}, 2, norm, nn::Activation::kRelu};
    nn::ParamSet params = nn::init_params(spec, rng);
    randomize(params, rng, 0.7);
    nn::Matrix input = random_matrix(3, 4, rng);
    const nn::Matrix out_grad = random_matrix(2, 4, rng);
    const auto loss = [&] { return nn::forward_batch(params, input).cwiseProduct(out_grad).sum(); };

    nn::ForwardCache cache;
    nn::forward_batch(params, input, &cache);
    nn::ParamSet grads(spec);
    const nn::Matrix input_grad = nn::backward_batch(params, cache, out_grad, grads);
    worst = std::max(worst, fd_compare(params.flat(), grads.flat(), loss));
    worst = std::max(worst, fd_compare(std::span<double>(input.data(), input.size()),
                                       std::span<const double>(input_grad.data(), input_grad.size()),
                                       loss));
  }
  return make("grad.mlp", worst, kGradTolerance);
}

CheckResult grad_evl(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 4);
  const evidential::HyperpriorConfig cfg;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    evidential::RawHead raw = {uniform(rng, -4.0, 4.0), uniform(rng, -3.0, 3.0),
                               uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)};
    const double y = uniform(rng, -6.0, 6.0);
    const EvidentialParams m = evidential::head_transform(raw);
    const auto g = evidential::evl_gradient(m, y, cfg);

    std::array<double, 4> x = {m.omega, m.nu, m.alpha, m.beta};
    const std::array<double, 4> analytic = {g.omega, g.nu, g.alpha, g.beta};
    worst = std::max(worst, fd_compare(x, analytic, [&] {
                       return evidential::evl_loss({x[0], x[1], x[2], x[3]}, y, cfg);
                     }));
    const auto graw = evidential::head_transform_backward(raw, g);
    worst = std::max(worst, fd_compare(raw, graw, [&] {
                       return evidential::evl_loss(evidential::head_transform(raw), y, cfg);
                     }));
  }
  return make("grad.evl", worst, kGradTolerance);
}

ppo::TrainConfig small_agent_config(ppo::Algorithm algorithm) {
  ppo::TrainConfig cfg;
  cfg.actor_hidden = {8, 8};
  cfg.critic_hidden = {8, 8};
  cfg.algorithm = algorithm;
  return cfg;
}

CheckResult grad_surrogate(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 5);
  constexpr int kBatch = 16;
  constexpr double kEps = 0.2;
  double worst = 0.0;

  // d loss / d new_logp, with samples on both sides of the clip range.
  std::vector<double> new_logp(kBatch), old_logp(kBatch), adv(kBatch);
  for (int j = 0; j < kBatch; ++j) {
    new_logp[j] = uniform(rng, -3.0, 0.0);
    old_logp[j] = new_logp[j] + (j % 3 == 0 ? uniform(rng, -0.6, 0.6) : uniform(rng, -0.1, 0.1));
    adv[j] = uniform(rng, -2.0, 2.0);
  }
  const auto s = ppo::clipped_surrogate(new_logp, old_logp, adv, kEps);
  worst = std::max(worst, fd_compare(new_logp, s.grad_new_logp, [&] {
                     return ppo::clipped_surrogate(new_logp, old_logp, adv, kEps).loss;
                   }));

  // Through the policy network and log-std.
  ppo::Agent agent(3, 2, small_agent_config(ppo::Algorithm::kPpo), opt.seed);
  randomize(agent.actor_params(), rng, 0.5);
  for (double& v : agent.log_std()) v = uniform(rng, -0.5, 0.5);
  const nn::Matrix obs = random_matrix(3, kBatch, rng);
  const nn::Matrix actions = random_matrix(2, kBatch, rng);
  const auto base = ppo::actor_loss_and_gradient(agent, obs, actions, old_logp, adv, kEps);
  for (int j = 0; j < kBatch; ++j) {
    // Anchor old log-probs near the current policy so some ratios clip and most do not.
    old_logp[j] = base.new_logp[j] + (j % 3 == 0 ? uniform(rng, -0.6, 0.6) : uniform(rng, -0.1, 0.1));
  }
  const auto actor = ppo::actor_loss_and_gradient(agent, obs, actions, old_logp, adv, kEps);
  const auto loss = [&] {
    return ppo::actor_loss_and_gradient(agent, obs, actions, old_logp, adv, kEps).surrogate.loss;
  };
  worst = std::max(worst, fd_compare(agent.actor_params().flat(), actor.grads.flat(), loss));
  worst = std::max(worst, fd_compare(agent.log_std(), actor.log_std_grads, loss));
  return make("grad.surrogate", worst, kGradTolerance,
              "actor parameters: " + std::to_string(agent.actor_params().size()));
}

CheckResult grad_critic(const VerifyOptions& opt, ppo::Algorithm algorithm,
                        const std::string& name) {
  std::mt19937_64 rng(opt.seed + 6);
  constexpr int kBatch = 16;
  ppo::Agent agent(3, 1, small_agent_config(algorithm), opt.seed);
  randomize(agent.critic_params(), rng, 0.5);
  const nn::Matrix obs = random_matrix(3, kBatch, rng);
  std::vector<double> targets(kBatch);
  for (double& t : targets) t = uniform(rng, -3.0, 3.0);
  const evidential::HyperpriorConfig prior;
  const auto critic = ppo::critic_loss_and_gradient(agent, obs, targets, prior);
  const double worst = fd_compare(agent.critic_params().flat(), critic.grads.flat(), [&] {
    return ppo::critic_loss_and_gradient(agent, obs, targets, prior).loss;
  });
  return make(name, worst, kGradTolerance,
              "critic parameters: " + std::to_string(agent.critic_params().size()));
}

// --- GAE -------------------------------------------------------------------------------------

struct Episode {
  std::vector<double> rewards;
  gae::ValueSequence vals;
  bool terminal = false;
};

Episode random_episode(std::mt19937_64& rng) {
  Episode e;
  const int T = std::uniform_int_distribution<int>(1, 16)(rng);
  e.terminal = std::bernoulli_distribution(0.5)(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < T; ++t) e.rewards.push_back(normal(rng));
  for (int t = 0; t <= T; ++t) {
    e.vals.means.push_back(3.0 * normal(rng));
    e.vals.variances.push_back(uniform(rng, 0.0, 2.0));
  }
  e.vals.terminated.assign(static_cast<std::size_t>(T), false);
  e.vals.terminated.back() = e.terminal;
  return e;
}

// Weight of V_{t+l} in the bootstrap sense: zero once the episode has terminated.
double future_variance(const Episode& e, std::size_t t, std::size_t l) {
  const std::size_t T = e.rewards.size();
  if (t + l == T && e.terminal) return 0.0;
  return e.vals.variances[t + l];
}

std::vector<double> kstep_gae(const Episode& e, double gamma, double lambda) {
  const std::size_t T = e.rewards.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t n = T - t;
    double total = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      double est = -e.vals.means[t];
      for (std::size_t l = 0; l < k; ++l) est += std::pow(gamma, l) * e.rewards[t + l];
      if (!(t + k == T && e.terminal)) est += std::pow(gamma, k) * e.vals.means[t + k];
      const double w = k < n ? (1.0 - lambda) * std::pow(lambda, k - 1) : std::pow(lambda, n - 1);
      total += w * est;
    }
    out[t] = total;
  }
  return out;
}

template <typename Oracle>
CheckResult gae_suite(const VerifyOptions& opt, const std::string& name, std::uint64_t salt,
                      gae::Variant variant, Oracle oracle) {
  std::mt19937_64 rng(opt.seed + salt);
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const Episode e = random_episode(rng);
    gae::GaeConfig cfg;
    cfg.gamma = uniform(rng, 0.8, 0.999);
    cfg.lambda = uniform(rng, 0.05, 0.95);
    cfg.variant = variant;
    const auto est = gae::estimate(e.rewards, e.vals, cfg);
    const std::vector<double> expected = oracle(e, cfg);
    const auto& actual = variant == gae::Variant::kMean ? est.mean : est.variance;
    for (std::size_t t = 0; t < expected.size(); ++t) {
      worst = worse(worst, std::abs(actual[t] - expected[t]));
    }
  }
  return make(name, worst, 1e-10, "200 random episodes, length <= 16");
}

std::vector<double> brute_correlated(const Episode& e, const gae::GaeConfig& cfg) {
  const std::size_t T = e.rewards.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double v = e.vals.variances[t];
    for (std::size_t l = 1; l <= T - t; ++l) {
      const double c = (1.0 - cfg.lambda) / cfg.lambda * std::pow(cfg.gamma * cfg.lambda, l);
      v += c * c * future_variance(e, t, l);
    }
    out[t] = v;
  }
  return out;
}

std::vector<double> brute_independent(const Episode& e, const gae::GaeConfig& cfg) {
  const std::size_t T = e.rewards.size();
  const double lam = cfg.lambda;
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    // Head: the var[V_t] share of every k-step estimator, summed until negligible.
    double head = 0.0;
    for (std::size_t l = 1;; ++l) {
      const double w = (1.0 - lam) * (1.0 - lam) * std::pow(lam, 2.0 * (l - 1));
      head += w;
      if (w < 1e-20 || l > 1000000) break;
    }
    double v = head * e.vals.variances[t];
    for (std::size_t l = 1; l <= T - t; ++l) {
      v += (1.0 - lam) * (1.0 - lam) * std::pow(lam, 2.0 * (l - 1)) *
           std::pow(cfg.gamma, 2.0 * l) * future_variance(e, t, l);
    }
    out[t] = v;
  }
  return out;
}

CheckResult gae_ordering(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 10);
  int violations = 0;
  for (int c = 0; c < 200; ++c) {
    Episode e = random_episode(rng);
    if (c % 4 == 0) e.vals.variances[0] = 0.0;
    gae::GaeConfig cfg;
    cfg.gamma = uniform(rng, 0.8, 0.999);
    cfg.lambda = c % 10 == 0 ? 0.0 : uniform(rng, 0.05, 0.95);
    cfg.variant = gae::Variant::kCorrelated;
    const auto cor = gae::gae_var_correlated(e.vals, cfg);
    const auto ind = gae::gae_var_independent(e.vals, cfg);
    for (std::size_t t = 0; t < cor.size(); ++t) {
      const bool should_tie = e.vals.variances[t] == 0.0 || cfg.lambda == 0.0;
      if (ind[t] > cor[t]) ++violations;
      if (should_tie && std::abs(ind[t] - cor[t]) > 1e-12 * std::max(1.0, cor[t])) ++violations;
      if (!should_tie && !(ind[t] < cor[t])) ++violations;
    }
  }
  return make("gae.ordering", violations, 0.0, "violations of independent <= correlated");
}

CheckResult gae_limits(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 11);
  int violations = 0;
  for (int c = 0; c < 200; ++c) {
    const Episode e = random_episode(rng);
    gae::GaeConfig cfg;
    cfg.gamma = uniform(rng, 0.8, 0.999);
    cfg.lambda = uniform(rng, 0.05, 0.95);

    cfg.variant = gae::Variant::kMean;
    const auto mean = gae::estimate(e.rewards, e.vals, cfg);
    for (auto v : {gae::Variant::kCorrelated, gae::Variant::kIndependent}) {
      cfg.variant = v;
      cfg.kappa = 0.0;
      if (gae::estimate(e.rewards, e.vals, cfg).ucb != mean.ucb) ++violations;
    }

    const auto deltas = gae::td_residual_means(e.rewards, e.vals, cfg.gamma);
    gae::GaeConfig zero = cfg;
    zero.lambda = 0.0;
    if (gae::gae_mean(deltas, zero, e.vals.terminated) != deltas) ++violations;

    gae::GaeConfig one = cfg;
    one.lambda = 1.0;
    const auto cor = gae::gae_var_correlated(e.vals, one);
    const auto ind = gae::gae_var_independent(e.vals, one);
    for (std::size_t t = 0; t < cor.size(); ++t) {
      if (cor[t] != e.vals.variances[t]) ++violations;
      if (ind[t] != 0.0) ++violations;
    }
  }
  return make("gae.limits", violations, 0.0, "kappa=0, lambda=0 and lambda=1 identities");
}

using CheckFn = std::function<CheckResult(const VerifyOptions&)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"evidential.nll_student_t", nll_student_t},
      {"evidential.nll_quadrature", nll_quadrature},
      {"evidential.variance_mc", variance_mc},
      {"grad.mlp", grad_mlp},
      {"grad.evl", grad_evl},
      {"grad.surrogate", grad_surrogate},
      {"grad.critic_mse",
       [](const VerifyOptions& o) { return grad_critic(o, ppo::Algorithm::kPpo, "grad.critic_mse"); }},
      {"grad.critic_evidential",
       [](const VerifyOptions& o) {
         return grad_critic(o, ppo::Algorithm::kEppoMean, "grad.critic_evidential");
       }},
      {"gae.mean_kstep",
       [](const VerifyOptions& o) {
         return gae_suite(o, "gae.mean_kstep", 7, gae::Variant::kMean,
                          [](const Episode& e, const gae::GaeConfig& c) {
                            return kstep_gae(e, c.gamma, c.lambda);
                          });
       }},
      {"gae.var_correlated",
       [](const VerifyOptions& o) {
         return gae_suite(o, "gae.var_correlated", 8, gae::Variant::kCorrelated, brute_correlated);
       }},
      {"gae.var_independent",
       [](const VerifyOptions& o) {
         return gae_suite(o, "gae.var_independent", 9, gae::Variant::kIndependent,
                          brute_independent);
       }},
      {"gae.ordering", gae_ordering},
      {"gae.limits", gae_limits},
  };
  return checks;
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

std::vector<CheckResult> run_checks(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  for (const auto& [name, fn] : registry()) {
    if (!options.filter.empty() && name.find(options.filter) == std::string::npos) continue;
    results.push_back(fn(options));
  }
  return results;
}

}  // namespace eppo::verify
