#include "doctest.h"

#include <cmath>
#include <random>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "eppo/evidential.hpp"
#include "eppo/special_functions.hpp"
#include "oracles.hpp"

using namespace eppo::evidential;
namespace math = eppo::math;

namespace {

EvidentialParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> omega(-5.0, 5.0);
  std::uniform_real_distribution<double> log_pos(std::log(0.05), std::log(20.0));
  std::uniform_real_distribution<double> alpha_excess(0.05, 10.0);
  return {omega(rng), std::exp(log_pos(rng)), 1.0 + alpha_excess(rng), std::exp(log_pos(rng))};
}

double gamma_log_pdf(double x, double shape, double rate) {
  return std::log(boost::math::pdf(boost::math::gamma_distribution<double>(shape, 1.0 / rate), x));
}

double hand_log_density(const EvidentialParams& m, const HyperpriorConfig& c) {
  const boost::math::normal_distribution<double> prior(c.mu_omega0, c.sigma_omega0);
  return std::log(boost::math::pdf(prior, m.omega)) + gamma_log_pdf(m.nu, c.nu_shape, c.nu_rate) +
         gamma_log_pdf(m.alpha - c.alpha_shift, c.alpha_shape, c.alpha_rate) +
         gamma_log_pdf(m.beta, c.beta_shape, c.beta_rate);
}

}  // namespace

TEST_CASE("log_gamma and digamma agree with Boost") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(std::log(0.5), std::log(1e6));
  for (int i = 0; i < 2000; ++i) {
    const double x = std::exp(u(rng));
    CHECK(math::log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-12));
    CHECK(math::digamma(x) == doctest::Approx(boost::math::digamma(x)).epsilon(1e-11));
  }
  CHECK(std::abs(math::log_gamma(1.0)) <= 1e-14);
  CHECK(math::log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
}

TEST_CASE("softplus and sigmoid are stable") {
  CHECK(math::softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(math::softplus(1000.0) == 1000.0);
  CHECK(math::softplus(-1000.0) >= 0.0);
  CHECK(math::softplus(-1000.0) < 1e-300);
  CHECK(math::sigmoid(0.0) == 0.5);
  CHECK(math::sigmoid(-1000.0) >= 0.0);
  CHECK(math::sigmoid(1000.0) == 1.0);
}

TEST_CASE("head_transform") {
  const auto zero = head_transform({0.0, 0.0, 0.0, 0.0});
  CHECK(zero.omega == 0.0);
  CHECK(zero.nu == doctest::Approx(std::log(2.0) + 1e-6).epsilon(1e-14));
  CHECK(zero.alpha == doctest::Approx(std::log(2.0) + 1.0 + 1e-6).epsilon(1e-14));
  CHECK(zero.beta == doctest::Approx(std::log(2.0) + 1e-6).epsilon(1e-14));

  const auto floor = head_transform({0.0, -1e6, -1e6, -1e6});
  CHECK(floor.nu == doctest::Approx(1e-6));
  CHECK(floor.nu > 0.0);
  CHECK(floor.alpha > 1.0);
  CHECK(floor.beta > 0.0);

  const double alpha10 = head_transform({0.0, 0.0, 10.0, 0.0}).alpha;
  CHECK(alpha10 == doctest::Approx(std::log1p(std::exp(10.0)) + 1.0 + 1e-6).epsilon(1e-15));
  CHECK(std::abs(alpha10 - 11.0000454) <= 2e-6);
  CHECK_THROWS_AS(head_transform({std::nan(""), 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("params validation") {
  CHECK_NOTHROW(EvidentialParams{0, 1, 2, 1}.validate());
  CHECK_THROWS_AS((EvidentialParams{0, 0, 2, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((EvidentialParams{0, 1, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((EvidentialParams{0, 1, 2, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((EvidentialParams{INFINITY, 1, 2, 1}.validate()), std::invalid_argument);
}

TEST_CASE("nll_loss reference value") {
  const EvidentialParams m{0.0, 1.0, 2.0, 1.0};
  // Student-t with df 4 and unit scale at its location.
  CHECK(nll_loss(m, 0.0) == doctest::Approx(oracle::student_t_nll(0.0, 0.0, 1.0, 2.0, 1.0)).epsilon(1e-12));
  CHECK(std::abs(nll_loss(m, 0.0) - 0.98079) <= 1e-4);
}

TEST_CASE("nll_loss equals the Student-t negative log-density") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_params(rng);
    const double y = m.omega + noise(rng);
    worst = std::max(worst, std::abs(nll_loss(m, y) - oracle::student_t_nll(y, m.omega, m.nu, m.alpha, m.beta)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("nll_loss agrees with quadrature marginalization") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    EvidentialParams m = random_params(rng);
    m.alpha = std::max(m.alpha, 1.5);
    const double y = m.omega + 0.7;
    CAPTURE(m.nu);
    CAPTURE(m.alpha);
    CAPTURE(m.beta);
    CHECK(std::abs(nll_loss(m, y) - oracle::nig_marginal_nll(y, m.omega, m.nu, m.alpha, m.beta)) <= 1e-4);
  }
}

TEST_CASE("nll_loss shape in y") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_params(rng);
    const double at_mode = nll_loss(m, m.omega);
    double previous = at_mode;
    for (double d = 0.1; d < 50.0; d *= 1.7) {
      CHECK(nll_loss(m, m.omega + d) >= at_mode);
      CHECK(nll_loss(m, m.omega - d) == doctest::Approx(nll_loss(m, m.omega + d)).epsilon(1e-12));
      const double now = evl_loss(m, m.omega + d, HyperpriorConfig{});
      CHECK(now >= previous - 1e-12);
      previous = now;
    }
  }
  // Heavy tail: slope in log|y| approaches 2 (alpha + 1/2) = 5.
  const EvidentialParams m{0.0, 1.0, 2.0, 1.0};
  const double slope = (nll_loss(m, 1e4) - nll_loss(m, 1e3)) / std::log(10.0);
  CHECK(slope == doctest::Approx(5.0).epsilon(1e-5));
}

TEST_CASE("hyperprior_log_density") {
  const HyperpriorConfig cfg;
  SUBCASE("component constants") {
    CHECK(gamma_log_pdf(5.0, 5.0, 1.0) == doctest::Approx(4.0 * std::log(5.0) - 5.0 - std::log(24.0)));
    CHECK(std::abs(gamma_log_pdf(5.0, 5.0, 1.0) - -1.74030) <= 1e-5);
    const boost::math::normal_distribution<double> prior(0.0, 100.0);
    CHECK(std::log(boost::math::pdf(prior, 0.0)) == doctest::Approx(-5.524108).epsilon(1e-6));
    CHECK(std::abs(-std::log(100.0 * std::sqrt(2.0 * M_PI)) - -5.52462) <= 1e-3);
  }
  SUBCASE("matches the sum of the four log-densities") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const auto m = random_params(rng);
      CHECK(hyperprior_log_density(m, cfg) == doctest::Approx(hand_log_density(m, cfg)).epsilon(1e-11));
    }
  }
  SUBCASE("doubling sigma_omega0 costs ln 2 at the prior mean") {
    const EvidentialParams m{0.0, 5.0, 3.0, 2.0};
    HyperpriorConfig wide = cfg;
    wide.sigma_omega0 *= 2.0;
    CHECK(hyperprior_log_density(m, cfg) - hyperprior_log_density(m, wide) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("alpha at or below the shift has no density") {
    const EvidentialParams m{0.0, 1.0, 1.0 + 1e-9, 1.0};
    HyperpriorConfig shifted = cfg;
    shifted.alpha_shift = 1.5;
    CHECK_THROWS_AS(hyperprior_log_density(EvidentialParams{0, 1, 1.2, 1}, shifted), std::domain_error);
    CHECK(std::isfinite(hyperprior_log_density(m, cfg)));
  }
}

TEST_CASE("evl_loss composes nll and the hyperprior") {
  const EvidentialParams m{0.0, 1.0, 2.0, 1.0};
  HyperpriorConfig cfg;
  cfg.xi = 0.0;
  CHECK(evl_loss(m, 0.3, cfg) == nll_loss(m, 0.3));
  cfg.xi = 0.01;
  const double expected = oracle::student_t_nll(0.0, 0.0, 1.0, 2.0, 1.0) - 0.01 * hand_log_density(m, cfg);
  CHECK(evl_loss(m, 0.0, cfg) == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(6);
  const HyperpriorConfig cfg;
  for (int i = 0; i < 200; ++i) {
    auto m = random_params(rng);
    const double y = m.omega + std::normal_distribution<double>(0.0, 2.0)(rng);
    std::vector<double> x = {m.omega, m.nu, m.alpha, m.beta};
    const auto as_params = [&] { return EvidentialParams{x[0], x[1], x[2], x[3]}; };
    const auto h = 1e-6 * std::min({1.0, m.nu, m.alpha - 1.0, m.beta});

    const auto g_nll = nll_gradient(m, y);
    CHECK(oracle::gradients_match(std::vector<double>{g_nll.omega, g_nll.nu, g_nll.alpha, g_nll.beta},
                                  oracle::finite_difference(x, [&] { return nll_loss(as_params(), y); }, h)));
    const auto g_prior = hyperprior_log_density_gradient(m, cfg);
    CHECK(oracle::gradients_match(
        std::vector<double>{g_prior.omega, g_prior.nu, g_prior.alpha, g_prior.beta},
        oracle::finite_difference(x, [&] { return hyperprior_log_density(as_params(), cfg); }, h)));
    const auto g_evl = evl_gradient(m, y, cfg);
    CHECK(oracle::gradients_match(std::vector<double>{g_evl.omega, g_evl.nu, g_evl.alpha, g_evl.beta},
                                  oracle::finite_difference(x, [&] { return evl_loss(as_params(), y, cfg); }, h)));
  }
}

TEST_CASE("gradient through head_transform matches finite differences") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.5);
  const HyperpriorConfig cfg;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> raw = {normal(rng), normal(rng), normal(rng), normal(rng)};
    const double y = normal(rng);
    const auto loss = [&] { return evl_loss(head_transform({raw[0], raw[1], raw[2], raw[3]}), y, cfg); };
    const RawHead r{raw[0], raw[1], raw[2], raw[3]};
    const auto g = head_transform_backward(r, evl_gradient(head_transform(r), y, cfg));
    CHECK(oracle::gradients_match(g, oracle::finite_difference(raw, loss)));
  }
}

TEST_CASE("predictive moments") {
  CHECK(predictive_mean({3.5, 1.0, 2.0, 1.0}) == 3.5);
  CHECK(predictive_mean({3.5, 7.0, 9.0, 0.1}) == 3.5);

  const auto d = predictive_variance({0.0, 1.0, 2.0, 1.0});
  CHECK(d.aleatoric == 1.0);
  CHECK(d.epistemic == 1.0);
  CHECK(d.total == 2.0);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_params(rng);
    const auto v = predictive_variance(m);
    CHECK(v.total == v.aleatoric + v.epistemic);
    auto scaled = m;
    scaled.beta *= 3.0;
    const auto s = predictive_variance(scaled);
    CHECK(s.aleatoric == doctest::Approx(3.0 * v.aleatoric).epsilon(1e-14));
    CHECK(s.epistemic == doctest::Approx(3.0 * v.epistemic).epsilon(1e-14));
  }
  const auto big_nu = predictive_variance({0.0, 1e12, 2.0, 1.0});
  CHECK(big_nu.epistemic < 1e-11);
  CHECK(big_nu.total == doctest::Approx(big_nu.aleatoric));
  CHECK_THROWS(predictive_variance({0.0, 1.0, 1.0, 1.0}));
}

TEST_CASE("Monte-Carlo predictive mean and variance components") {
  // (mu, sigma^2) ~ NIG(0, 1, 3, 1), V ~ N(mu, sigma^2).
  const EvidentialParams m{0.0, 1.0, 3.0, 1.0};
  std::mt19937_64 rng(9);
  std::gamma_distribution<double> precision(m.alpha, 1.0 / m.beta);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 1000000;
  double sum_v = 0.0, sum_v2 = 0.0, sum_s2 = 0.0, sum_s4 = 0.0, sum_mu2 = 0.0, sum_mu4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s2 = 1.0 / precision(rng);
    const double mu = m.omega + std::sqrt(s2 / m.nu) * normal(rng);
    const double v = mu + std::sqrt(s2) * normal(rng);
    sum_v += v;
    sum_v2 += v * v;
    sum_s2 += s2;
    sum_s4 += s2 * s2;
    sum_mu2 += mu * mu;
    sum_mu4 += mu * mu * mu * mu;
  }
  const auto within = [n](double sum, double sum_sq, double target) {
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    return std::abs(mean - target) <= 3.0 * se;
  };
  const auto d = predictive_variance(m);
  CHECK(within(sum_v, sum_v2, predictive_mean(m)));
  CHECK(within(sum_s2, sum_s4, d.aleatoric));
  CHECK(within(sum_mu2, sum_mu4, d.epistemic));
}
