#pragma once

// Probit model container and the one-time factorization cache that every
// sampler, coupling and bound reads from.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "probit_mix/errors.hpp"
#include "probit_mix/linalg.hpp"
#include "probit_mix/special_functions.hpp"

namespace probit_mix {

namespace prior {

/// Q0^-1 = variance * I_p.
struct Isotropic {
  double variance = 1.0;
};

/// Q0^-1 = (c / p) * I_p.
struct ScaledIsotropic {
  double c = 1.0;
};

/// Q0 = X^T X / g + c I_p. c = 0 gives the classical g prior.
struct GPrior {
  double g = 1.0;
  double c = 0.0;
};

/// Q0^-1 = b / (p + n) * I_p.
struct Recipe {
  double b = 10.0;
};

/// Arbitrary symmetric positive definite precision matrix Q0.
struct GeneralSpd {
  Eigen::MatrixXd precision;
};

}  // namespace prior

using PrecisionForm =
    std::variant<prior::Isotropic, prior::ScaledIsotropic, prior::GPrior, prior::Recipe, prior::GeneralSpd>;

/// Gaussian prior N(m, Q0^-1) on the coefficients. An empty mean means m = 0.
struct PriorSpec {
  PrecisionForm form = prior::Isotropic{};
  Eigen::VectorXd mean;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

// Variance of the isotropic forms, or a negative value for the non-isotropic ones.
inline double isotropic_variance(const PrecisionForm& form, Eigen::Index n, Eigen::Index p) {
  return std::visit(
      overloaded{[](const prior::Isotropic& f) { return f.variance; },
                 [p](const prior::ScaledIsotropic& f) { return f.c / static_cast<double>(p); },
                 [n, p](const prior::Recipe& f) { return f.b / static_cast<double>(p + n); },
                 [](const prior::GPrior&) { return -1.0; }, [](const prior::GeneralSpd&) { return -1.0; }},
      form);
}

}  // namespace detail

inline void validate_prior(const PriorSpec& spec, Eigen::Index p) {
  std::visit(detail::overloaded{
                 [](const prior::Isotropic& f) { detail::require_positive(f.variance, "isotropic variance"); },
                 [](const prior::ScaledIsotropic& f) { detail::require_positive(f.c, "scaled-isotropic c"); },
                 [](const prior::Recipe& f) { detail::require_positive(f.b, "recipe b"); },
                 [](const prior::GPrior& f) {
                   detail::require_positive(f.g, "g-prior g");
                   if (!(f.c >= 0.0)) throw std::invalid_argument("g-prior c must be >= 0");
                 },
                 [p](const prior::GeneralSpd& f) {
                   if (f.precision.rows() != p || f.precision.cols() != p)
                     throw std::invalid_argument("general prior precision must be p x p");
                 }},
             spec.form);
  if (spec.mean.size() != 0 && spec.mean.size() != p)
    throw std::invalid_argument("prior mean must have length p");
}

inline Eigen::VectorXd prior_mean(const PriorSpec& spec, Eigen::Index p) {
  return spec.mean.size() == 0 ? Eigen::VectorXd::Zero(p) : spec.mean;
}

/// Realized prior precision Q0 for design X.
inline Eigen::MatrixXd prior_precision(const PriorSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (const double v = detail::isotropic_variance(spec.form, n, p); v > 0.0) {
    return Eigen::MatrixXd::Identity(p, p) / v;
  }
  if (const auto* g = std::get_if<prior::GPrior>(&spec.form)) {
    Eigen::MatrixXd q0 = x.transpose() * x / g->g;
    q0.diagonal().array() += g->c;
    return linalg::symmetrized(q0);
  }
  return linalg::symmetrized(std::get<prior::GeneralSpd>(spec.form).precision);
}

/// Realized prior covariance Q0^-1 for design X.
inline Eigen::MatrixXd prior_covariance(const PriorSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (const double v = detail::isotropic_variance(spec.form, n, p); v > 0.0) {
    return Eigen::MatrixXd::Identity(p, p) * v;
  }
  return linalg::spd_inverse(prior_precision(spec, x), "prior precision Q0");
}

/// Binary-response probit model: y_i | beta ~ Bernoulli(Phi(x_i^T beta)), beta ~ N(m, Q0^-1).
struct ProbitModel {
  Eigen::MatrixXd X;
  std::vector<int> y;
  PriorSpec prior;

  ProbitModel(Eigen::MatrixXd design, std::vector<int> responses, PriorSpec prior_spec)
      : X(std::move(design)), y(std::move(responses)), prior(std::move(prior_spec)) {
    if (X.cols() < 1) throw std::invalid_argument("design must have at least one column");
    if (static_cast<Eigen::Index>(y.size()) != X.rows())
      throw std::invalid_argument("response length must equal the number of design rows");
    for (int v : y)
      if (v != 0 && v != 1) throw std::invalid_argument("responses must be 0 or 1");
    if (!X.allFinite()) throw std::invalid_argument("design contains non-finite entries");
    validate_prior(prior, X.cols());
  }

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  HalfLine region(Eigen::Index i) const { return region_for_response(y[static_cast<std::size_t>(i)]); }
  double sign(Eigen::Index i) const { return y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0; }
};

enum class CacheStrategy { tall, wide };

struct CacheOptions {
  // W and Q are n x n; they are skipped on the tall path above this many rows.
  Eigen::Index dense_marginal_limit = 4000;
};

/// Immutable precomputations shared read-only by every chain.
struct PosteriorCache {
  CacheStrategy strategy = CacheStrategy::tall;
  Eigen::MatrixXd prior_precision;  // Q0
  Eigen::MatrixXd prior_cov;        // Q0^-1
  Eigen::MatrixXd prior_cov_chol;   // lower factor of Q0^-1
  Eigen::VectorXd prior_mean;       // m
  Eigen::VectorXd prior_shift;      // Q0 m

  Eigen::MatrixXd V;       // (X^T X + Q0)^-1
  Eigen::MatrixXd chol_V;  // lower factor of V
  Eigen::MatrixXd S;       // V X^T, p x n
  Eigen::VectorXd leverage;  // h_i = x_i^T V x_i
  Eigen::VectorXd beta_shift;  // V Q0 m
  Eigen::VectorXd Xm;          // X m
  Eigen::VectorXd eta_shift;   // X V Q0 m

  Eigen::MatrixXd W;       // X V X^T (empty when skipped)
  Eigen::MatrixXd Q;       // I - W = (I + M)^-1 (empty when skipped)
  Eigen::MatrixXd chol_W;  // wide path only

  double lam_max = 0.0;  // extreme eigenvalues of M = X Q0^-1 X^T
  double lam_min = 0.0;

  bool has_marginal() const { return W.size() != 0 || S.cols() == 0; }
};

/// Precomputes V, its factor, V X^T, leverages, the marginal precision of z and
/// the eigenvalue extremes of M = X Q0^-1 X^T. Tall designs (n >= p) factor
/// X^T X + Q0 directly; wide designs go through the Woodbury identity.
inline PosteriorCache build_cache(const ProbitModel& model, const CacheOptions& options = {}) {
  const Eigen::MatrixXd& x = model.X;
  const Eigen::Index n = model.n();
  const Eigen::Index p = model.p();

  PosteriorCache c;
  c.strategy = p > n ? CacheStrategy::wide : CacheStrategy::tall;
  c.prior_precision = prior_precision(model.prior, x);
  c.prior_cov = prior_covariance(model.prior, x);
  c.prior_cov_chol = linalg::cholesky_lower(c.prior_cov, "prior covariance Q0^-1");
  c.prior_mean = prior_mean(model.prior, p);
  c.prior_shift = c.prior_precision * c.prior_mean;

  Eigen::MatrixXd m_matrix;  // M, only when n <= p
  if (c.strategy == CacheStrategy::tall) {
    Eigen::MatrixXd a = x.transpose() * x + c.prior_precision;
    c.V = linalg::spd_inverse(linalg::symmetrized(a), "prior+design (X^T X + Q0)");
  } else {
    const Eigen::MatrixXd t = c.prior_cov * x.transpose();  // p x n
    m_matrix = linalg::symmetrized(x * t);
    Eigen::MatrixXd i_plus_m = m_matrix;
    i_plus_m.diagonal().array() += 1.0;
    const Eigen::MatrixXd inv = linalg::spd_inverse(i_plus_m, "prior+design (I + X Q0^-1 X^T)");
    c.V = linalg::symmetrized(c.prior_cov - t * inv * t.transpose());
  }
  c.chol_V = linalg::cholesky_lower(c.V, "prior+design (posterior covariance V)");
  c.S = c.V * x.transpose();
  c.leverage.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) c.leverage(i) = x.row(i).dot(c.S.col(i));
  c.beta_shift = c.V * c.prior_shift;
  c.Xm = x * c.prior_mean;
  c.eta_shift = x * c.beta_shift;

  if (c.strategy == CacheStrategy::wide || n <= options.dense_marginal_limit) {
    c.W = linalg::symmetrized(x * c.S);
    c.Q = -c.W;
    c.Q.diagonal().array() += 1.0;
    c.Q.diagonal() = (1.0 - c.leverage.array()).matrix();
  }
  if (c.strategy == CacheStrategy::wide) c.chol_W = linalg::cholesky_lower(c.W, "W = X V X^T");

  if (n == 0) {
    c.lam_max = c.lam_min = 0.0;
  } else if (n <= p) {
    if (m_matrix.size() == 0) m_matrix = linalg::symmetrized(x * c.prior_cov * x.transpose());
    const Eigen::VectorXd ev = linalg::symmetric_eigenvalues(m_matrix);
    c.lam_min = std::max(0.0, ev(0));
    c.lam_max = std::max(0.0, ev(ev.size() - 1));
  } else {
    // Nonzero spectrum of M equals that of L^T X^T X L with Q0^-1 = L L^T.
    const Eigen::MatrixXd xl = x * c.prior_cov_chol;
    const Eigen::MatrixXd gram = linalg::symmetrized(xl.transpose() * xl);
    c.lam_max = std::max(0.0, linalg::lambda_max(gram));
    c.lam_min = 0.0;
  }
  return c;
}

/// Sum_i log Phi(s_i eta_i) with s_i = 2 y_i - 1.
inline double log_likelihood_from_eta(const ProbitModel& model, const Eigen::VectorXd& eta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < model.n(); ++i) total += std_normal_logcdf(model.sign(i) * eta(i));
  return total;
}

inline double log_prior_beta(const PosteriorCache& cache, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd d = beta - cache.prior_mean;
  return -0.5 * d.dot(cache.prior_precision * d);
}

/// log pi(beta) up to an additive constant, given the linear predictor eta = X beta.
inline double log_posterior_beta(const ProbitModel& model, const PosteriorCache& cache,
                                 const Eigen::VectorXd& beta, const Eigen::VectorXd& eta) {
  return log_prior_beta(cache, beta) + log_likelihood_from_eta(model, eta);
}

inline double log_posterior_beta(const ProbitModel& model, const PosteriorCache& cache,
                                 const Eigen::VectorXd& beta) {
  return log_posterior_beta(model, cache, beta, model.X * beta);
}

inline Eigen::VectorXd grad_log_posterior_beta(const ProbitModel& model, const PosteriorCache& cache,
                                               const Eigen::VectorXd& beta) {
  Eigen::VectorXd grad = -cache.prior_precision * (beta - cache.prior_mean);
  const Eigen::VectorXd eta = model.X * beta;
  Eigen::VectorXd weights(model.n());
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const double s = model.sign(i);
    weights(i) = -s * h_prime(s * eta(i));
  }
  grad += model.X.transpose() * weights;
  return grad;
}

/// Upper bound 1 + lambda_max(M) on the condition number of the prior-preconditioned potential.
inline double condition_number_bound(const PosteriorCache& cache) { return 1.0 + cache.lam_max; }

}  // namespace probit_mix
