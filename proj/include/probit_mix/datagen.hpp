#pragma once

// Synthetic designs and responses for the experiments, and covariate standardization.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "probit_mix/errors.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/random.hpp"

namespace probit_mix {

enum class DesignKind { assumption1a, assumption1b, assumption2 };
enum class BaseDistribution { normal, uniform };
enum class ResponseKind { all_ones, all_zeros, well_specified };

struct DesignScheme {
  DesignKind kind = DesignKind::assumption1a;
  Eigen::Index n = 1;
  Eigen::Index p = 1;
  BaseDistribution base = BaseDistribution::normal;
};

inline DesignKind parse_design_kind(std::string_view s) {
  if (s == "assumption1a") return DesignKind::assumption1a;
  if (s == "assumption1b") return DesignKind::assumption1b;
  if (s == "assumption2" || s == "assumption2_intercept") return DesignKind::assumption2;
  throw ConfigError("unknown design kind '" + std::string(s) + "'");
}

inline ResponseKind parse_response_kind(std::string_view s) {
  if (s == "all_ones") return ResponseKind::all_ones;
  if (s == "all_zeros") return ResponseKind::all_zeros;
  if (s == "well_specified") return ResponseKind::well_specified;
  throw ConfigError("unknown response kind '" + std::string(s) + "'");
}

inline BaseDistribution parse_base_distribution(std::string_view s) {
  if (s == "normal") return BaseDistribution::normal;
  if (s == "uniform") return BaseDistribution::uniform;
  throw ConfigError("unknown base distribution '" + std::string(s) + "'");
}

/// Zero-mean, unit-variance draw from the base distribution.
template <class Gen>
double base_draw(BaseDistribution base, Gen& gen) {
  if (base == BaseDistribution::normal) return std_normal(gen);
  return std::sqrt(3.0) * (2.0 * uniform_open(gen) - 1.0);
}

/// Row-major fill so that a prefix of rows does not depend on n.
template <class Gen>
Eigen::MatrixXd gen_design(const DesignScheme& scheme, Gen& gen) {
  if (scheme.n < 1 || scheme.p < 1) throw ConfigError("design needs n >= 1 and p >= 1");
  if (scheme.kind == DesignKind::assumption2 && scheme.p < 2) throw ConfigError("assumption2 design needs p >= 2");
  const double scale = scheme.kind == DesignKind::assumption1b ? 1.0 : 1.0 / std::sqrt(static_cast<double>(scheme.p));
  Eigen::MatrixXd x(scheme.n, scheme.p);
  for (Eigen::Index i = 0; i < scheme.n; ++i) {
    for (Eigen::Index j = 0; j < scheme.p; ++j) x(i, j) = scale * base_draw(scheme.base, gen);
    if (scheme.kind == DesignKind::assumption2) x(i, 0) = 1.0;
  }
  return x;
}

struct Responses {
  std::vector<int> y;
  std::optional<Eigen::VectorXd> beta_true;
};

/// Constant responses, or y_i ~ Bernoulli(Phi(x_i^T beta)) with beta drawn from the prior.
template <class Gen>
Responses gen_responses(ResponseKind kind, const Eigen::MatrixXd& x, const PriorSpec& prior, Gen& gen) {
  Responses out;
  const auto n = static_cast<std::size_t>(x.rows());
  if (kind == ResponseKind::all_ones) {
    out.y.assign(n, 1);
    return out;
  }
  if (kind == ResponseKind::all_zeros) {
    out.y.assign(n, 0);
    return out;
  }
  validate_prior(prior, x.cols());
  const Eigen::MatrixXd cov = prior_covariance(prior, x);
  const Eigen::MatrixXd chol = linalg::cholesky_lower(cov, "prior covariance Q0^-1");
  Eigen::VectorXd beta = prior_mean(prior, x.cols());
  beta.noalias() += chol * std_normal_vector(gen, x.cols());
  const Eigen::VectorXd eta = x * beta;
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.y[i] = uniform_open(gen) < std_normal_cdf(eta(static_cast<Eigen::Index>(i))) ? 1 : 0;
  out.beta_true = std::move(beta);
  return out;
}

/// Centers non-intercept columns and scales them to unit mean square.
inline Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, bool has_intercept) {
  Eigen::MatrixXd out = x;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = has_intercept ? 1 : 0; j < x.cols(); ++j) {
    const double mean = out.col(j).mean();
    out.col(j).array() -= mean;
    const double ms = out.col(j).squaredNorm() / n;
    if (!(ms > 1e-300)) throw std::invalid_argument("column " + std::to_string(j) + " has zero variance");
    out.col(j) /= std::sqrt(ms);
  }
  return out;
}

/// Largest eigenvalue of Y Y^T / p for an n x p standard-normal Y (upper Marchenko-Pastur edge check).
template <class Gen>
double scaled_wishart_lambda_max(Eigen::Index n, Eigen::Index p, Gen& gen) {
  DesignScheme scheme{DesignKind::assumption1a, n, p, BaseDistribution::normal};
  const Eigen::MatrixXd x = gen_design(scheme, gen);  // Y / sqrt(p)
  if (n <= p) return linalg::lambda_max(linalg::symmetrized(x * x.transpose()));
  return linalg::lambda_max(linalg::symmetrized(x.transpose() * x));
}

}  // namespace probit_mix
