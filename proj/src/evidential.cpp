#include "eppo/evidential.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "eppo/special_functions.hpp"

namespace eppo::evidential {

namespace {

double gamma_log_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - math::log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double gamma_log_pdf_derivative(double x, double shape, double rate) {
  return (shape - 1.0) / x - rate;
}

}  // namespace

void EvidentialParams::validate() const {
  if (!std::isfinite(omega) || !std::isfinite(nu) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw std::invalid_argument("evidential params must be finite");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("evidential params: nu must be > 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("evidential params: alpha must be > 1");
  if (!(beta > 0.0)) throw std::invalid_argument("evidential params: beta must be > 0");
}

void HyperpriorConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("hyperprior: ") + name + " must be > 0");
    }
  };
  positive(sigma_omega0, "sigma_omega0");
  positive(nu_shape, "nu_shape");
  positive(nu_rate, "nu_rate");
  positive(alpha_shape, "alpha_shape");
  positive(alpha_rate, "alpha_rate");
  positive(beta_shape, "beta_shape");
  positive(beta_rate, "beta_rate");
  if (!std::isfinite(mu_omega0) || !std::isfinite(alpha_shift)) {
    throw std::invalid_argument("hyperprior: mu_omega0 and alpha_shift must be finite");
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) {
    throw std::invalid_argument("hyperprior: xi must be >= 0");
  }
}

EvidentialParams head_transform(const RawHead& raw) {
  for (double r : raw) {
    if (!std::isfinite(r)) throw std::invalid_argument("head_transform: raw output not finite");
  }
  return {raw[0], math::softplus(raw[1]) + kPositivityFloor,
          math::softplus(raw[2]) + 1.0 + kPositivityFloor,
          math::softplus(raw[3]) + kPositivityFloor};
}

RawHead head_transform_backward(const RawHead& raw, const ParamGradient& grad) {
  return {grad.omega, grad.nu * math::sigmoid(raw[1]), grad.alpha * math::sigmoid(raw[2]),
          grad.beta * math::sigmoid(raw[3])};
}

double nll_loss(const EvidentialParams& m, double y) {
  m.validate();
  const double omega_big = 2.0 * m.beta * (1.0 + m.nu);
  const double d = y - m.omega;
  return 0.5 * std::log(std::numbers::pi / m.nu) - m.alpha * std::log(omega_big) +
         (m.alpha + 0.5) * std::log(d * d * m.nu + omega_big) + math::log_gamma(m.alpha) -
         math::log_gamma(m.alpha + 0.5);
}

ParamGradient nll_gradient(const EvidentialParams& m, double y) {
  m.validate();
  const double omega_big = 2.0 * m.beta * (1.0 + m.nu);
  const double d = y - m.omega;
  const double s = d * d * m.nu + omega_big;
  const double a_half = m.alpha + 0.5;
  ParamGradient g;
  g.omega = -a_half * 2.0 * m.nu * d / s;
  g.nu = -0.5 / m.nu - m.alpha * 2.0 * m.beta / omega_big + a_half * (d * d + 2.0 * m.beta) / s;
  g.alpha = std::log(s) - std::log(omega_big) + math::digamma(m.alpha) - math::digamma(a_half);
  g.beta = -m.alpha / m.beta + a_half * 2.0 * (1.0 + m.nu) / s;
  return g;
}

double hyperprior_log_density(const EvidentialParams& m, const HyperpriorConfig& cfg) {
  const double shifted_alpha = m.alpha - cfg.alpha_shift;
  if (!(shifted_alpha > 0.0)) {
    throw std::domain_error("hyperprior: alpha must exceed alpha_shift");
  }
  if (!(m.nu > 0.0) || !(m.beta > 0.0)) {
    throw std::domain_error("hyperprior: nu and beta must be positive");
  }
  const double z = (m.omega - cfg.mu_omega0) / cfg.sigma_omega0;
  const double omega_term =
      -0.5 * z * z - std::log(cfg.sigma_omega0 * std::sqrt(2.0 * std::numbers::pi));
  return omega_term + gamma_log_pdf(m.nu, cfg.nu_shape, cfg.nu_rate) +
         gamma_log_pdf(shifted_alpha, cfg.alpha_shape, cfg.alpha_rate) +
         gamma_log_pdf(m.beta, cfg.beta_shape, cfg.beta_rate);
}

ParamGradient hyperprior_log_density_gradient(const EvidentialParams& m,
                                              const HyperpriorConfig& cfg) {
  const double shifted_alpha = m.alpha - cfg.alpha_shift;
  if (!(shifted_alpha > 0.0)) {
    throw std::domain_error("hyperprior: alpha must exceed alpha_shift");
  }
  return {-(m.omega - cfg.mu_omega0) / (cfg.sigma_omega0 * cfg.sigma_omega0),
          gamma_log_pdf_derivative(m.nu, cfg.nu_shape, cfg.nu_rate),
          gamma_log_pdf_derivative(shifted_alpha, cfg.alpha_shape, cfg.alpha_rate),
          gamma_log_pdf_derivative(m.beta, cfg.beta_shape, cfg.beta_rate)};
}

double evl_loss(const EvidentialParams& m, double y, const HyperpriorConfig& cfg) {
  const double nll = nll_loss(m, y);
  if (cfg.xi == 0.0) return nll;
  return nll - cfg.xi * hyperprior_log_density(m, cfg);
}

ParamGradient evl_gradient(const EvidentialParams& m, double y, const HyperpriorConfig& cfg) {
  ParamGradient g = nll_gradient(m, y);
  if (cfg.xi == 0.0) return g;
  const ParamGradient prior = hyperprior_log_density_gradient(m, cfg);
  g.omega -= cfg.xi * prior.omega;
  g.nu -= cfg.xi * prior.nu;
  g.alpha -= cfg.xi * prior.alpha;
  g.beta -= cfg.xi * prior.beta;
  return g;
}

UncertaintyDecomposition predictive_variance(const EvidentialParams& m) {
  if (!(m.alpha > 1.0)) throw std::domain_error("predictive_variance: alpha must be > 1");
  UncertaintyDecomposition u;
  u.aleatoric = m.beta / (m.alpha - 1.0);
  u.epistemic = m.beta / (m.nu * (m.alpha - 1.0));
  u.total = u.aleatoric + u.epistemic;
  return u;
}

}  // namespace eppo::evidential
