#pragma once

// The four Markov kernels on the augmented probit posterior: data augmentation,
// random-scan collapsed Gibbs, data augmentation with an extra intercept
// Metropolis move, and the z-marginal chain for p > n.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "probit_mix/errors.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/random.hpp"
#include "probit_mix/special_functions.hpp"

namespace probit_mix {

struct ChainState {
  Eigen::VectorXd z;
  Eigen::VectorXd beta;  // empty for the z-marginal chain
  Eigen::VectorXd eta;   // X beta, or the sampled linear predictor in the z-marginal chain
  Eigen::VectorXd B;     // V (X^T z + Q0 m)
  std::uint64_t rwm_proposals = 0;
  std::uint64_t rwm_accepts = 0;

  double rwm_acceptance_rate() const {
    return rwm_proposals == 0 ? 0.0 : static_cast<double>(rwm_accepts) / static_cast<double>(rwm_proposals);
  }
};

/// Bitwise equality of the sampled coordinates (z and beta).
inline bool same_position(const ChainState& a, const ChainState& b) {
  if (a.z.size() != b.z.size() || a.beta.size() != b.beta.size()) return false;
  for (Eigen::Index i = 0; i < a.z.size(); ++i)
    if (a.z(i) != b.z(i)) return false;
  for (Eigen::Index j = 0; j < a.beta.size(); ++j)
    if (a.beta(j) != b.beta(j)) return false;
  return true;
}

struct RwmConfig {
  double sigma = 1.0;
};

enum class Kernel { da, cg, da_mod, da_marginal };

inline std::string_view kernel_name(Kernel k) {
  switch (k) {
    case Kernel::da: return "da";
    case Kernel::cg: return "cg";
    case Kernel::da_mod: return "da_mod";
    case Kernel::da_marginal: return "da_marginal";
  }
  return "?";
}

inline Kernel parse_kernel(std::string_view name) {
  if (name == "da") return Kernel::da;
  if (name == "cg") return Kernel::cg;
  if (name == "da_mod") return Kernel::da_mod;
  if (name == "da_marginal") return Kernel::da_marginal;
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

/// Conditional law of z_i given the linear predictor.
inline TruncNormParams z_conditional(const ProbitModel& model, Eigen::Index i, double eta_i) {
  return {eta_i, 1.0, model.region(i)};
}

/// Conditional law of z_i given z_{-i} under the z-marginal, through the cached B.
inline TruncNormParams cg_conditional(const ProbitModel& model, const PosteriorCache& cache,
                                      const ChainState& state, Eigen::Index i) {
  const double h = cache.leverage(i);
  if (!(h < 1.0 - 1e-12)) throw DegenerateLeverageError(static_cast<std::size_t>(i));
  const double one_minus_h = 1.0 - h;
  const double mu = (model.X.row(i).dot(state.B) - h * state.z(i)) / one_minus_h;
  return {mu, 1.0 / std::sqrt(one_minus_h), model.region(i)};
}

inline void refresh_B(const PosteriorCache& cache, ChainState& state) {
  state.B.noalias() = cache.S * state.z;
  state.B += cache.beta_shift;
}

inline void refresh_eta(const ProbitModel& model, ChainState& state) { state.eta.noalias() = model.X * state.beta; }

namespace detail {

template <class Gen>
void draw_z_given_eta(const ProbitModel& model, ChainState& state, Gen& gen) {
  for (Eigen::Index i = 0; i < model.n(); ++i)
    state.z(i) = truncnorm_sample(z_conditional(model, i, state.eta(i)), uniform_open(gen));
}

// beta | z given the refreshed B, then eta.
template <class Gen>
void draw_beta_given_B(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, Gen& gen) {
  const Eigen::VectorXd xi = std_normal_vector(gen, model.p());
  state.beta = state.B;
  state.beta.noalias() += cache.chol_V.triangularView<Eigen::Lower>() * xi;
  refresh_eta(model, state);
}

// Log target ratio for moving beta_1 by delta, with eta_new = eta + delta X e_1.
inline double intercept_log_ratio(const ProbitModel& model, const PosteriorCache& cache, const ChainState& state,
                                  double delta, Eigen::VectorXd& eta_new) {
  const double grad_term = cache.prior_precision.col(0).dot(state.beta - cache.prior_mean);
  double log_ratio = -delta * grad_term - 0.5 * delta * delta * cache.prior_precision(0, 0);
  eta_new = state.eta + delta * model.X.col(0);
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const double s = model.sign(i);
    log_ratio += std_normal_logcdf(s * eta_new(i)) - std_normal_logcdf(s * state.eta(i));
  }
  return log_ratio;
}

inline void apply_intercept_move(ChainState& state, double proposal, Eigen::VectorXd& eta_new) {
  state.beta(0) = proposal;
  state.eta.swap(eta_new);
}

}  // namespace detail

/// One data augmentation sweep: z | beta, then beta | z.
template <class Gen>
void da_step(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, Gen& gen) {
  detail::draw_z_given_eta(model, state, gen);
  refresh_B(cache, state);
  detail::draw_beta_given_B(model, cache, state, gen);
}

/// Collapsed Gibbs update of site i with an O(p) refresh of B.
template <class Gen>
void cg_site_step(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, Eigen::Index i,
                  Gen& gen) {
  const TruncNormParams params = cg_conditional(model, cache, state, i);
  const double z_new = truncnorm_sample(params, uniform_open(gen));
  state.B += cache.S.col(i) * (z_new - state.z(i));
  state.z(i) = z_new;
}

/// n random-scan site updates, then a full resync of B.
template <class Gen>
void cg_sweep(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, Gen& gen) {
  const auto n = static_cast<std::size_t>(model.n());
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(uniform_index(gen, n));
    cg_site_step(model, cache, state, i, gen);
  }
  refresh_B(cache, state);
}

/// beta | z, Metropolis move on beta_1 targeting pi(beta_1 | beta_-1), then z | beta.
/// Column 0 of X must be the intercept.
template <class Gen>
void da_mod_step(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, const RwmConfig& rwm,
                 Gen& gen) {
  detail::draw_beta_given_B(model, cache, state, gen);
  const double delta = rwm.sigma * std_normal(gen);
  const double log_u = std::log(uniform_open(gen));
  Eigen::VectorXd eta_new;
  const double log_ratio = detail::intercept_log_ratio(model, cache, state, delta, eta_new);
  ++state.rwm_proposals;
  if (log_u < log_ratio) {
    detail::apply_intercept_move(state, state.beta(0) + delta, eta_new);
    ++state.rwm_accepts;
  }
  detail::draw_z_given_eta(model, state, gen);
  refresh_B(cache, state);
}

/// z-marginal chain: eta ~ N(W z + X V Q0 m, W), then z | eta.
template <class Gen>
void da_marginal_step(const ProbitModel& model, const PosteriorCache& cache, ChainState& state, Gen& gen) {
  if (cache.chol_W.size() == 0 && model.n() > 0)
    throw ConfigError("z-marginal kernel needs the wide-path factor of W (requires p > n)");
  const Eigen::VectorXd xi = std_normal_vector(gen, model.n());
  state.eta.noalias() = cache.W * state.z;
  state.eta += cache.eta_shift;
  state.eta.noalias() += cache.chol_W.triangularView<Eigen::Lower>() * xi;
  detail::draw_z_given_eta(model, state, gen);
}

/// beta from the prior, z | beta, caches refreshed. The z-marginal chain keeps beta empty.
template <class Gen>
ChainState sample_prior_start(const ProbitModel& model, const PosteriorCache& cache, Gen& gen,
                              Kernel kernel = Kernel::da) {
  ChainState state;
  const Eigen::VectorXd xi = std_normal_vector(gen, model.p());
  state.beta = cache.prior_mean;
  state.beta.noalias() += cache.prior_cov_chol.triangularView<Eigen::Lower>() * xi;
  refresh_eta(model, state);
  state.z.resize(model.n());
  detail::draw_z_given_eta(model, state, gen);
  refresh_B(cache, state);
  if (kernel == Kernel::da_marginal) state.beta.resize(0);
  return state;
}

template <class Gen>
void kernel_step(Kernel kernel, const ProbitModel& model, const PosteriorCache& cache, ChainState& state,
                 const RwmConfig& rwm, Gen& gen) {
  switch (kernel) {
    case Kernel::da: da_step(model, cache, state, gen); break;
    case Kernel::cg: cg_sweep(model, cache, state, gen); break;
    case Kernel::da_mod: da_mod_step(model, cache, state, rwm, gen); break;
    case Kernel::da_marginal: da_marginal_step(model, cache, state, gen); break;
  }
}

}  // namespace probit_mix
