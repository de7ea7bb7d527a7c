#pragma once

// Closed-form mixing-time bounds, random-design eigenvalue limits, and the
// intercept-only variance used by the spectral-gap lower bound.

#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Core>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "probit_mix/errors.hpp"
#include "probit_mix/linalg.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/special_functions.hpp"

namespace probit_mix {

inline double da_mixing_bound(double lam_max, double log_kl_over_eps) { return (2.0 + lam_max) * log_kl_over_eps; }

inline double cg_mixing_bound(double lam_max, double lam_min, double log_kl_over_eps) {
  return (1.0 + lam_max) / (1.0 + lam_min) * log_kl_over_eps;
}

/// lambda_max(D^1/2 (I + M) D^1/2) with D = diag((I + M)^-1).
inline double cg_refined_factor(const ProbitModel& model, const PosteriorCache& cache) {
  const Eigen::Index n = model.n();
  if (n == 0) return 1.0;
  Eigen::MatrixXd i_plus_m = linalg::symmetrized(model.X * cache.prior_cov * model.X.transpose());
  i_plus_m.diagonal().array() += 1.0;
  Eigen::VectorXd d;
  if (cache.Q.size() != 0) {
    d = cache.Q.diagonal();
  } else {
    d = (1.0 - cache.leverage.array()).matrix();
  }
  const Eigen::VectorXd root = d.array().sqrt().matrix();
  const Eigen::MatrixXd scaled = root.asDiagonal() * i_plus_m * root.asDiagonal();
  return linalg::lambda_max(linalg::symmetrized(scaled));
}

inline double cg_refined_bound(const ProbitModel& model, const PosteriorCache& cache, double log_kl_over_eps) {
  return cg_refined_factor(model, cache) * log_kl_over_eps;
}

/// Upper bound on log KL(mu, pi) for the prior start.
inline double prior_start_kl_log_bound(double n, double lam_max) {
  return std::log(2.0 * n + n * std::log(2.0 * (1.0 + n * lam_max)));
}

/// log(KL / epsilon) with KL replaced by its prior-start bound.
inline double log_kl_over_eps(double n, double lam_max, double epsilon) {
  return prior_start_kl_log_bound(n, lam_max) + std::log(1.0 / epsilon);
}

/// Almost-sure limits c (1 + sqrt r)^2 and c (1 - sqrt(min{1, r}))^2.
inline std::pair<double, double> random_design_limits(double c, double r) {
  const double upper = c * std::pow(1.0 + std::sqrt(r), 2);
  const double lower = c * std::pow(1.0 - std::sqrt(std::min(1.0, r)), 2);
  return {upper, lower};
}

/// (DA, CG) factors under Q0^-1 = b / (p + n) I.
inline std::pair<double, double> recipe_bound(double b) { return {2.0 + 2.0 * b, 1.0 + 2.0 * b}; }

/// (DA, CG) factors under the g prior.
inline std::pair<double, double> g_prior_factors(double g) { return {2.0 + g, 1.0 + g}; }

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mode = 0.0;
};

/// Moments of pi(b) ∝ exp(-c b^2 / 2) Phi(b)^n_ones Phi(-b)^n_zeros by adaptive
/// Gauss-Kronrod quadrature over a window around the mode.
inline PosteriorMoments intercept_posterior_moments(double c, double n_ones, double n_zeros = 0.0) {
  if (!(c > 0.0)) throw std::invalid_argument("prior precision must be > 0");
  auto potential = [&](double b) {
    return 0.5 * c * b * b - n_ones * std_normal_logcdf(b) - n_zeros * std_normal_logcdf(-b);
  };
  auto gradient = [&](double b) { return c * b + n_ones * h_prime(b) - n_zeros * h_prime(-b); };
  auto curvature = [&](double b) { return c + n_ones * h_second(b) + n_zeros * h_second(-b); };

  double mode = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double step = gradient(mode) / curvature(mode);
    mode -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(mode))) break;
  }
  const double u_min = potential(mode);
  const double width = 1.0 / std::sqrt(curvature(mode));
  double lo = mode - 12.0 * width;
  double hi = mode + 12.0 * width;
  while (potential(lo) - u_min < 50.0) lo -= 4.0 * width;
  while (potential(hi) - u_min < 50.0) hi += 4.0 * width;

  using boost::math::quadrature::gauss_kronrod;
  auto integrate = [&](auto f) {
    double err = 0.0;
    double l1 = 0.0;
    const double value = gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-13, &err, &l1);
    if (!(std::abs(err) <= 1e-9 * l1 + 1e-300)) throw Error("intercept quadrature did not converge");
    return value;
  };
  const double z = integrate([&](double b) { return std::exp(u_min - potential(b)); });
  const double first = integrate([&](double b) { return (b - mode) * std::exp(u_min - potential(b)); }) / z;
  const double mean = mode + first;
  const double var =
      integrate([&](double b) { return (b - mean) * (b - mean) * std::exp(u_min - potential(b)); }) / z;
  return {mean, var, mode};
}

/// Var(beta_1) for the intercept-only model with precision c and n responses all equal to one.
inline double var_beta1_quadrature(double c, double n) { return intercept_posterior_moments(c, n, 0.0).variance; }

/// max{0, ((1/c + n) Var - 1) log(2 / epsilon) / 2}.
inline double lower_bound_intercept(double c, double n, double var_beta1, double epsilon) {
  return std::max(0.0, 0.5 * ((1.0 / c + n) * var_beta1 - 1.0) * std::log(2.0 / epsilon));
}

struct BoundReport {
  double lam_max = 0.0;
  double lam_min = 0.0;
  double epsilon = 0.1;
  double kl_start_log = 0.0;
  double log_kl_over_eps = 0.0;
  double condition_number = 1.0;
  double da_upper = 0.0;
  double cg_upper = 0.0;
  double cg_refined_upper = 0.0;
  std::optional<double> var_beta1;
  std::optional<double> lower_intercept;
};

/// True when X is a single column of ones under an isotropic prior with zero mean.
inline bool is_intercept_only(const ProbitModel& model, const PosteriorCache& cache) {
  return model.p() == 1 && (model.X.array() == 1.0).all() && cache.prior_mean(0) == 0.0;
}

inline BoundReport bound_report(const ProbitModel& model, const PosteriorCache& cache, double epsilon) {
  BoundReport r;
  const double n = static_cast<double>(model.n());
  r.lam_max = cache.lam_max;
  r.lam_min = cache.lam_min;
  r.epsilon = epsilon;
  r.condition_number = condition_number_bound(cache);
  if (model.n() > 0) {
    r.kl_start_log = prior_start_kl_log_bound(n, cache.lam_max);
    r.log_kl_over_eps = r.kl_start_log + std::log(1.0 / epsilon);
  }
  r.da_upper = da_mixing_bound(r.lam_max, r.log_kl_over_eps);
  r.cg_upper = cg_mixing_bound(r.lam_max, r.lam_min, r.log_kl_over_eps);
  r.cg_refined_upper = cg_refined_bound(model, cache, r.log_kl_over_eps);
  if (is_intercept_only(model, cache)) {
    double ones = 0.0;
    for (int v : model.y) ones += v;
    const double c = cache.prior_precision(0, 0);
    r.var_beta1 = intercept_posterior_moments(c, ones, n - ones).variance;
    r.lower_intercept = lower_bound_intercept(c, n, *r.var_beta1, epsilon);
  }
  return r;
}

}  // namespace probit_mix
