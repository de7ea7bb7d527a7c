#pragma once

// Coupled kernels and lag-L meeting times. Far apart, both chains share their
// random numbers (contractive); once within epsilon they switch to maximal
// couplings so that they can meet exactly.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <Eigen/Core>

#include "probit_mix/errors.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/random.hpp"
#include "probit_mix/samplers.hpp"
#include "probit_mix/special_functions.hpp"

namespace probit_mix {

struct CoupledDraw {
  double x = 0.0;
  double y = 0.0;
  bool met = false;
};

/// Both draws from one shared uniform through the inverse CDFs.
inline CoupledDraw crn_coupling_1d(const TruncNormParams& p, const TruncNormParams& q, double shared_u) {
  const double x = truncnorm_sample(p, shared_u);
  const double y = truncnorm_sample(q, shared_u);
  return {x, y, x == y};
}

/// Rejection-based maximal coupling of two truncated normals.
template <class Gen>
CoupledDraw maximal_coupling_1d(const TruncNormParams& p, const TruncNormParams& q, Gen& gen,
                                std::uint64_t max_iterations = 10'000'000) {
  const double x = truncnorm_sample(p, uniform_open(gen));
  if (p == q) return {x, x, true};
  if (std::log(uniform_open(gen)) + truncnorm_logpdf(p, x) <= truncnorm_logpdf(q, x)) return {x, x, true};
  for (std::uint64_t it = 0; it < max_iterations; ++it) {
    const double y = truncnorm_sample(q, uniform_open(gen));
    if (std::log(uniform_open(gen)) + truncnorm_logpdf(q, y) > truncnorm_logpdf(p, y)) return {x, y, false};
  }
  throw CouplingError("maximal coupling exceeded its rejection cap");
}

struct CoupledVectors {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  bool met = false;
};

/// Reflection-maximal coupling of N(mean1, L L^T) and N(mean2, L L^T).
template <class Gen>
CoupledVectors reflection_maximal_gaussian(const Eigen::VectorXd& mean1, const Eigen::VectorXd& mean2,
                                           const Eigen::MatrixXd& chol, Gen& gen) {
  const Eigen::VectorXd xi = std_normal_vector(gen, mean1.size());
  CoupledVectors out;
  out.x = mean1;
  out.x.noalias() += chol.triangularView<Eigen::Lower>() * xi;
  if (mean1 == mean2) {
    out.y = out.x;
    out.met = true;
    return out;
  }
  const Eigen::VectorXd delta = chol.triangularView<Eigen::Lower>().solve(mean1 - mean2);
  const double log_u = std::log(uniform_open(gen));
  if (log_u < -0.5 * (xi + delta).squaredNorm() + 0.5 * xi.squaredNorm()) {
    out.y = out.x;
    out.met = true;
    return out;
  }
  const Eigen::VectorXd e = delta / delta.norm();
  const Eigen::VectorXd reflected = xi - 2.0 * e.dot(xi) * e;
  out.y = mean2;
  out.y.noalias() += chol.triangularView<Eigen::Lower>() * reflected;
  return out;
}

/// Scalar reflection-maximal coupling of N(mean1, sigma^2) and N(mean2, sigma^2).
template <class Gen>
CoupledDraw reflection_maximal_1d(double mean1, double mean2, double sigma, Gen& gen) {
  const double xi = std_normal(gen);
  const double x = mean1 + sigma * xi;
  if (mean1 == mean2) return {x, x, true};
  const double delta = (mean1 - mean2) / sigma;
  if (std::log(uniform_open(gen)) < -0.5 * (xi + delta) * (xi + delta) + 0.5 * xi * xi) return {x, x, true};
  return {x, mean2 - sigma * xi, false};
}

struct CouplingConfig {
  double epsilon = 0.1;
  std::int64_t lag = 200;
  std::int64_t max_sweeps = 100'000;
};

inline double default_epsilon(Kernel kernel) { return kernel == Kernel::cg ? 1e-3 : 0.1; }

struct CoupledPair {
  ChainState state1;
  ChainState state2;
  bool met = false;
};

/// Distance used to switch between the contractive and the maximal regime.
inline double coupling_distance(Kernel kernel, const ChainState& a, const ChainState& b) {
  double d2 = (a.z - b.z).squaredNorm();
  if (kernel == Kernel::da || kernel == Kernel::da_mod) d2 += (a.beta - b.beta).squaredNorm();
  return std::sqrt(d2);
}

inline bool states_equal(Kernel kernel, const ChainState& a, const ChainState& b) {
  if (kernel == Kernel::cg || kernel == Kernel::da_marginal) return a.z == b.z;
  return same_position(a, b);
}

namespace detail {

template <class Gen>
void coupled_z_given_eta(const ProbitModel& model, CoupledPair& pair, bool far, Gen& gen) {
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const TruncNormParams p = z_conditional(model, i, pair.state1.eta(i));
    const TruncNormParams q = z_conditional(model, i, pair.state2.eta(i));
    const CoupledDraw d = far ? crn_coupling_1d(p, q, uniform_open(gen)) : maximal_coupling_1d(p, q, gen);
    pair.state1.z(i) = d.x;
    pair.state2.z(i) = d.y;
  }
}

template <class Gen>
void coupled_beta_given_B(const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair, bool far,
                          Gen& gen) {
  if (far) {
    const Eigen::VectorXd xi = std_normal_vector(gen, model.p());
    const Eigen::VectorXd noise = cache.chol_V.triangularView<Eigen::Lower>() * xi;
    pair.state1.beta = pair.state1.B + noise;
    pair.state2.beta = pair.state2.B + noise;
  } else {
    CoupledVectors v = reflection_maximal_gaussian(pair.state1.B, pair.state2.B, cache.chol_V, gen);
    pair.state1.beta = std::move(v.x);
    pair.state2.beta = std::move(v.y);
  }
  refresh_eta(model, pair.state1);
  refresh_eta(model, pair.state2);
}

inline void finish_coupled_step(Kernel kernel, CoupledPair& pair) {
  pair.met = states_equal(kernel, pair.state1, pair.state2);
  if (pair.met) {
    const auto proposals = pair.state2.rwm_proposals;
    const auto accepts = pair.state2.rwm_accepts;
    pair.state2 = pair.state1;
    pair.state2.rwm_proposals = proposals;
    pair.state2.rwm_accepts = accepts;
  }
}

}  // namespace detail

template <class Gen>
void coupled_da_step(const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair,
                     const CouplingConfig& cfg, Gen& gen) {
  const bool far = coupling_distance(Kernel::da, pair.state1, pair.state2) > cfg.epsilon;
  detail::coupled_z_given_eta(model, pair, far, gen);
  refresh_B(cache, pair.state1);
  refresh_B(cache, pair.state2);
  detail::coupled_beta_given_B(model, cache, pair, far, gen);
  detail::finish_coupled_step(Kernel::da, pair);
}

/// n coupled site updates on a shared random index sequence.
template <class Gen>
void coupled_cg_sweep(const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair,
                      const CouplingConfig& cfg, Gen& gen) {
  const bool far = coupling_distance(Kernel::cg, pair.state1, pair.state2) > cfg.epsilon;
  const auto n = static_cast<std::size_t>(model.n());
  ChainState& s1 = pair.state1;
  ChainState& s2 = pair.state2;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(uniform_index(gen, n));
    const TruncNormParams p = cg_conditional(model, cache, s1, i);
    const TruncNormParams q = cg_conditional(model, cache, s2, i);
    const CoupledDraw d = far ? crn_coupling_1d(p, q, uniform_open(gen)) : maximal_coupling_1d(p, q, gen);
    s1.B += cache.S.col(i) * (d.x - s1.z(i));
    s1.z(i) = d.x;
    s2.B += cache.S.col(i) * (d.y - s2.z(i));
    s2.z(i) = d.y;
  }
  refresh_B(cache, s1);
  refresh_B(cache, s2);
  detail::finish_coupled_step(Kernel::cg, pair);
}

template <class Gen>
void coupled_da_mod_step(const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair,
                         const CouplingConfig& cfg, const RwmConfig& rwm, Gen& gen) {
  const bool far = coupling_distance(Kernel::da_mod, pair.state1, pair.state2) > cfg.epsilon;
  detail::coupled_beta_given_B(model, cache, pair, far, gen);

  ChainState& s1 = pair.state1;
  ChainState& s2 = pair.state2;
  // Reflected proposals pull the intercepts together in both regimes; sharing
  // the increment instead would leave their gap unchanged on joint acceptance.
  const CoupledDraw proposal = reflection_maximal_1d(s1.beta(0), s2.beta(0), rwm.sigma, gen);
  const double prop1 = proposal.x;
  const double prop2 = proposal.y;
  const double log_u = std::log(uniform_open(gen));
  Eigen::VectorXd eta1;
  Eigen::VectorXd eta2;
  const double r1 = detail::intercept_log_ratio(model, cache, s1, prop1 - s1.beta(0), eta1);
  const double r2 = detail::intercept_log_ratio(model, cache, s2, prop2 - s2.beta(0), eta2);
  ++s1.rwm_proposals;
  ++s2.rwm_proposals;
  if (log_u < r1) {
    detail::apply_intercept_move(s1, prop1, eta1);
    ++s1.rwm_accepts;
  }
  if (log_u < r2) {
    detail::apply_intercept_move(s2, prop2, eta2);
    ++s2.rwm_accepts;
  }
  // A shared proposal from a shared position gives bitwise identical eta updates.
  if (s1.beta == s2.beta) s2.eta = s1.eta;

  detail::coupled_z_given_eta(model, pair, far, gen);
  refresh_B(cache, s1);
  refresh_B(cache, s2);
  detail::finish_coupled_step(Kernel::da_mod, pair);
}

/// Coupled z-marginal chain: the Gaussian eta block is coupled like beta in the DA kernel.
template <class Gen>
void coupled_da_marginal_step(const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair,
                              const CouplingConfig& cfg, Gen& gen) {
  if (cache.chol_W.size() == 0 && model.n() > 0)
    throw ConfigError("z-marginal kernel needs the wide-path factor of W (requires p > n)");
  const bool far = coupling_distance(Kernel::da_marginal, pair.state1, pair.state2) > cfg.epsilon;
  ChainState& s1 = pair.state1;
  ChainState& s2 = pair.state2;
  const Eigen::VectorXd mean1 = cache.W * s1.z + cache.eta_shift;
  const Eigen::VectorXd mean2 = cache.W * s2.z + cache.eta_shift;
  if (far) {
    const Eigen::VectorXd xi = std_normal_vector(gen, model.n());
    const Eigen::VectorXd noise = cache.chol_W.triangularView<Eigen::Lower>() * xi;
    s1.eta = mean1 + noise;
    s2.eta = mean2 + noise;
  } else {
    CoupledVectors v = reflection_maximal_gaussian(mean1, mean2, cache.chol_W, gen);
    s1.eta = std::move(v.x);
    s2.eta = std::move(v.y);
  }
  detail::coupled_z_given_eta(model, pair, far, gen);
  detail::finish_coupled_step(Kernel::da_marginal, pair);
}

template <class Gen>
void coupled_step(Kernel kernel, const ProbitModel& model, const PosteriorCache& cache, CoupledPair& pair,
                  const CouplingConfig& cfg, const RwmConfig& rwm, Gen& gen) {
  switch (kernel) {
    case Kernel::da: coupled_da_step(model, cache, pair, cfg, gen); break;
    case Kernel::cg: coupled_cg_sweep(model, cache, pair, cfg, gen); break;
    case Kernel::da_mod: coupled_da_mod_step(model, cache, pair, cfg, rwm, gen); break;
    case Kernel::da_marginal: coupled_da_marginal_step(model, cache, pair, cfg, gen); break;
  }
}

struct MeetingRecord {
  std::int64_t tau = 0;  // kernel applications of the leading chain at meeting
  std::int64_t lag = 0;
  bool censored = false;
  std::uint64_t seed = 0;
};

/// Coupled phase of the lag-L construction: the pair is at times (L, 0) and
/// coupled steps run from t = L + 1 until the chains coincide.
template <class Gen>
MeetingRecord run_coupled_phase(Kernel kernel, const ProbitModel& model, const PosteriorCache& cache,
                                CoupledPair pair, const CouplingConfig& cfg, const RwmConfig& rwm, Gen& gen) {
  MeetingRecord record;
  record.lag = cfg.lag;
  for (std::int64_t t = cfg.lag + 1;; ++t) {
    if (t - cfg.lag > cfg.max_sweeps) {
      record.tau = t - 1;
      record.censored = true;
      return record;
    }
    coupled_step(kernel, model, cache, pair, cfg, rwm, gen);
    if (pair.met) {
      record.tau = t;
      return record;
    }
  }
}

/// One meeting time: both chains start from the prior start, the leading chain
/// advances L steps alone, then the coupled kernel runs until they coincide.
inline MeetingRecord sample_meeting_time(Kernel kernel, const ProbitModel& model, const PosteriorCache& cache,
                                         const CouplingConfig& cfg, const RwmConfig& rwm, std::uint64_t seed) {
  if (cfg.lag < 1) throw ConfigError("lag must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("coupling epsilon must be > 0");
  Rng gen(seed);
  CoupledPair pair;
  pair.state2 = sample_prior_start(model, cache, gen, kernel);
  pair.state1 = sample_prior_start(model, cache, gen, kernel);
  for (std::int64_t t = 0; t < cfg.lag; ++t) kernel_step(kernel, model, cache, pair.state1, rwm, gen);
  MeetingRecord record = run_coupled_phase(kernel, model, cache, std::move(pair), cfg, rwm, gen);
  record.seed = seed;
  return record;
}

}  // namespace probit_mix
