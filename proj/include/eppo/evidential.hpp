#pragma once

#include <array>

namespace eppo::evidential {

// Normal-Inverse-Gamma parameters predicted per state: omega is the value mean, nu the
// virtual observation count, alpha/beta the inverse-gamma shape and rate.
struct EvidentialParams {
  double omega = 0.0;
  double nu = 1.0;
  double alpha = 2.0;
  double beta = 1.0;

  // Throws std::invalid_argument unless nu > 0, alpha > 1, beta > 0 and all finite.
  void validate() const;

  bool operator==(const EvidentialParams&) const = default;
};

// Hyperpriors: omega ~ N(mu, sigma^2); nu, alpha - alpha_shift, beta ~ Gamma(shape, rate).
struct HyperpriorConfig {
  double mu_omega0 = 0.0;
  double sigma_omega0 = 100.0;
  double nu_shape = 5.0;
  double nu_rate = 1.0;
  double alpha_shape = 5.0;
  double alpha_rate = 1.0;
  double alpha_shift = 1.0;
  double beta_shape = 5.0;
  double beta_rate = 1.0;
  double xi = 0.01;

  void validate() const;

  bool operator==(const HyperpriorConfig&) const = default;
};

struct UncertaintyDecomposition {
  double aleatoric = 0.0;
  double epistemic = 0.0;
  double total = 0.0;
};

// Partial derivatives with respect to (omega, nu, alpha, beta).
struct ParamGradient {
  double omega = 0.0;
  double nu = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

using RawHead = std::array<double, 4>;

inline constexpr double kPositivityFloor = 1e-6;

// omega = raw0, nu = softplus(raw1) + floor, alpha = softplus(raw2) + 1 + floor,
// beta = softplus(raw3) + floor.
EvidentialParams head_transform(const RawHead& raw);

// Chain rule through head_transform: gradient w.r.t. the raw network outputs.
RawHead head_transform_backward(const RawHead& raw, const ParamGradient& grad);

// Negative log marginal likelihood of y: a Student-t with location omega,
// scale^2 = beta (1 + nu) / (nu alpha) and 2 alpha degrees of freedom.
double nll_loss(const EvidentialParams& m, double y);
ParamGradient nll_gradient(const EvidentialParams& m, double y);

// log p(m) under the hyperpriors. Throws std::domain_error if alpha <= alpha_shift.
double hyperprior_log_density(const EvidentialParams& m, const HyperpriorConfig& cfg);
ParamGradient hyperprior_log_density_gradient(const EvidentialParams& m,
                                              const HyperpriorConfig& cfg);

// nll_loss - xi * hyperprior_log_density.
double evl_loss(const EvidentialParams& m, double y, const HyperpriorConfig& cfg);
ParamGradient evl_gradient(const EvidentialParams& m, double y, const HyperpriorConfig& cfg);

inline double predictive_mean(const EvidentialParams& m) { return m.omega; }

// Law of total variance: E[sigma^2] = beta/(alpha-1) plus var[mu] = beta/(nu(alpha-1)).
// Throws std::domain_error when alpha <= 1.
UncertaintyDecomposition predictive_variance(const EvidentialParams& m);

}  // namespace eppo::evidential
