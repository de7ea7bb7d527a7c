#include <cmath>
#include <numbers>
#include <tuple>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace probit_mix;
using namespace probit_mix::oracle;

TEST(Bounds, ClosedForms) {
  EXPECT_EQ(da_mixing_bound(1.0, 1.0), 3.0);
  EXPECT_EQ(da_mixing_bound(0.0, 2.5), 5.0);
  EXPECT_EQ(cg_mixing_bound(2.0, 2.0, 1.7), 1.7);
  EXPECT_EQ(cg_mixing_bound(3.0, 0.0, 1.0), 4.0);
  EXPECT_EQ(recipe_bound(10.0), std::make_pair(22.0, 21.0));
  EXPECT_NEAR(recipe_bound(1e-12).first, 2.0, 1e-11);
  EXPECT_EQ(g_prior_factors(10.0).first, 12.0);
  EXPECT_EQ(random_design_limits(1.0, 1.0), std::make_pair(4.0, 0.0));
  EXPECT_EQ(random_design_limits(1.0, 4.0), std::make_pair(9.0, 0.0));
  EXPECT_EQ(random_design_limits(1.0, 0.25).second, 0.25);
}

TEST(Bounds, PriorStartKl) {
  EXPECT_NEAR(prior_start_kl_log_bound(1.0, 0.0), std::log(2.0 + std::log(2.0)), 1e-15);
  EXPECT_NEAR(prior_start_kl_log_bound(1.0, 0.0), 0.99071, 1e-5);
  EXPECT_NEAR(prior_start_kl_log_bound(100.0, 1.0), std::log(200.0 + 100.0 * std::log(202.0)), 1e-13);
  EXPECT_NEAR(prior_start_kl_log_bound(100.0, 1.0), 6.594, 1e-3);
  double prev_n = -1e300;
  for (double n = 1.0; n < 1e4; n *= 1.7) {
    const double v = prior_start_kl_log_bound(n, 0.5);
    EXPECT_GT(v, prev_n);
    prev_n = v;
    double prev_l = -1e300;
    for (double l = 0.0; l < 100.0; l += 7.0) {
      const double w = prior_start_kl_log_bound(n, l);
      EXPECT_GE(w, prev_l);
      prev_l = w;
    }
  }
}

TEST(Bounds, RefinedFactorSpecialCases) {
  // M = I: X = I_n under unit isotropic prior.
  PriorSpec prior;
  const ProbitModel identity(Eigen::MatrixXd::Identity(4, 4), {1, 0, 1, 0}, prior);
  EXPECT_NEAR(cg_refined_factor(identity, build_cache(identity)), 1.0, 1e-12);
  const ProbitModel zero(Eigen::MatrixXd::Zero(3, 2), {1, 0, 1}, prior);
  EXPECT_NEAR(cg_refined_factor(zero, build_cache(zero)), 1.0, 1e-12);
}

TEST(Bounds, RefinedNeverExceedsSimpleOnRandomInstances) {
  Rng gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(uniform_index(gen, 40));
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(uniform_index(gen, 40));
    const Eigen::MatrixXd x = random_matrix(n, p, gen, 1.0 / std::sqrt(static_cast<double>(p)));
    PriorSpec prior;
    prior.form = prior::Isotropic{0.2 + 3.0 * uniform_open(gen)};
    const ProbitModel model(x, std::vector<int>(static_cast<std::size_t>(n), 1), prior);
    const PosteriorCache cache = build_cache(model);
    const double refined = cg_refined_factor(model, cache);
    const double simple = (1.0 + cache.lam_max) / (1.0 + cache.lam_min);
    EXPECT_LE(refined, simple * (1.0 + 1e-8)) << n << "x" << p;
    EXPECT_GE(refined, 1.0 - 1e-8);
  }
}

TEST(Bounds, WeylBoundForInterceptDesign) {
  Rng gen(4);
  const double c = 1.0;
  for (Eigen::Index n : {200, 400}) {
    const Eigen::MatrixXd x = gen_design(DesignScheme{DesignKind::assumption2, n, 50, BaseDistribution::normal}, gen);
    PriorSpec prior;
    prior.form = prior::Isotropic{c};
    const ProbitModel model(x, std::vector<int>(static_cast<std::size_t>(n), 1), prior);
    EXPECT_LE(build_cache(model).lam_max, (c + 0.5) * static_cast<double>(n));
  }
}

TEST(InterceptQuadrature, GaussianLimit) {
  const PosteriorMoments m = intercept_posterior_moments(2.0, 0.0, 0.0);
  EXPECT_NEAR(m.mean, 0.0, 1e-12);
  EXPECT_NEAR(m.variance, 0.5, 1e-12);
  EXPECT_NEAR(var_beta1_quadrature(1.0, 0.0), 1.0, 1e-12);
}

TEST(InterceptQuadrature, MatchesIndependentSimpsonOracle) {
  for (auto [c, ones, zeros] : {std::tuple{1.0, 1.0, 0.0}, std::tuple{1.0, 100.0, 0.0}, std::tuple{1.0, 50.0, 50.0},
                                std::tuple{0.1, 30.0, 3.0}, std::tuple{4.0, 1000.0, 0.0}}) {
    const PosteriorMoments q = intercept_posterior_moments(c, ones, zeros);
    const auto [mean, var] = intercept_moments_simpson(c, ones, zeros);
    EXPECT_NEAR(q.mean, mean, 1e-8 * (1.0 + std::abs(mean))) << c << " " << ones << " " << zeros;
    EXPECT_NEAR(q.variance, var, 1e-7 * var) << c << " " << ones << " " << zeros;
  }
}

TEST(InterceptQuadrature, SingleObservationClosedForm) {
  // c = 1, one response: pi(b) ∝ phi(b) Phi(b), a skew normal with alpha = 1.
  const PosteriorMoments q = intercept_posterior_moments(1.0, 1.0, 0.0);
  const double delta = 1.0 / std::sqrt(2.0);
  const double mean = delta * std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(q.mean, mean, 1e-10);
  EXPECT_NEAR(q.variance, 1.0 - mean * mean, 1e-10);
}

TEST(InterceptQuadrature, VarianceScalesLikeInverseLog) {
  // Var log(cn) / c stays bounded away from zero.
  double smallest = 1e300;
  for (double n : {1e2, 1e3, 1e4}) {
    const double v = var_beta1_quadrature(1.0, n);
    smallest = std::min(smallest, v * std::log(n));
    EXPECT_GT(v, 1.0 / (1.0 + n));
  }
  EXPECT_GT(smallest, 0.1);
}

TEST(LowerBound, Formula) {
  EXPECT_EQ(lower_bound_intercept(2.0, 10.0, 1.0 / (0.5 + 10.0), 0.1), 0.0);
  const double a = lower_bound_intercept(1.0, 100.0, 0.3, 0.1);
  const double b = lower_bound_intercept(1.0, 200.0, 0.3, 0.1);
  EXPECT_NEAR(b - a, 0.5 * 100.0 * 0.3 * std::log(20.0), 1e-9);
  const double big = lower_bound_intercept(1.0, 1e4, var_beta1_quadrature(1.0, 1e4), 0.1);
  EXPECT_GT(big, 100.0);
}

TEST(LowerBound, GrowsWithImbalance) {
  double prev = -1.0;
  for (double n : {50.0, 200.0, 800.0, 3200.0}) {
    const double scaled = (1.0 + n) * var_beta1_quadrature(1.0, n);
    EXPECT_GT(scaled, prev);
    prev = scaled;
  }
}

TEST(Report, GPriorAndInterceptFields) {
  Rng gen(5);
  const Eigen::MatrixXd x = random_matrix(30, 8, gen);
  PriorSpec prior;
  prior.form = prior::GPrior{10.0, 0.0};
  const ProbitModel model(x, std::vector<int>(30, 1), prior);
  const BoundReport r = bound_report(model, build_cache(model), 0.1);
  EXPECT_NEAR(r.lam_max, 10.0, 1e-8);
  EXPECT_NEAR(r.da_upper / r.log_kl_over_eps, 12.0, 1e-8);
  EXPECT_LE(r.cg_refined_upper, r.cg_upper * (1.0 + 1e-8));
  EXPECT_FALSE(r.var_beta1.has_value());

  const ProbitModel intercept = intercept_model(1.0, std::vector<int>(100, 1));
  const BoundReport ri = bound_report(intercept, build_cache(intercept), 0.1);
  ASSERT_TRUE(ri.var_beta1.has_value());
  EXPECT_NEAR(*ri.var_beta1, var_beta1_quadrature(1.0, 100.0), 1e-14);
  EXPECT_GT(*ri.lower_intercept, 0.0);
}
