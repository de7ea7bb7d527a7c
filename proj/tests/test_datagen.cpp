#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace probit_mix;
using namespace probit_mix::oracle;

TEST(Design, Assumption1aColumnScale) {
  Rng gen(1);
  const Eigen::Index p = 40;
  const Eigen::MatrixXd x = gen_design(DesignScheme{DesignKind::assumption1a, 5000, p, BaseDistribution::normal}, gen);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double ms = x.col(j).squaredNorm() / 5000.0;
    EXPECT_NEAR(ms * p, 1.0, 6.0 * std::sqrt(2.0 / 5000.0));
  }
}

TEST(Design, Assumption2InterceptColumn) {
  Rng gen(2);
  const Eigen::MatrixXd x = gen_design(DesignScheme{DesignKind::assumption2, 30, 5, BaseDistribution::uniform}, gen);
  EXPECT_TRUE((x.col(0).array() == 1.0).all());
  EXPECT_LE(x.rightCols(4).cwiseAbs().maxCoeff(), std::sqrt(3.0) / std::sqrt(5.0));
  EXPECT_THROW(gen_design(DesignScheme{DesignKind::assumption2, 30, 1, BaseDistribution::normal}, gen), ConfigError);
  EXPECT_THROW(gen_design(DesignScheme{DesignKind::assumption1a, 0, 3, BaseDistribution::normal}, gen), ConfigError);
}

TEST(Design, Assumption1bPriorPredictiveVariance) {
  // Raw entries with Q0^-1 = (c / p) I: Var(x_i^T beta) = (c / p) sum_j Y_ij^2 -> c.
  Rng gen(3);
  const double c = 2.0;
  for (Eigen::Index p : {100, 2000}) {
    const Eigen::MatrixXd x = gen_design(DesignScheme{DesignKind::assumption1b, 20, p, BaseDistribution::normal}, gen);
    const Eigen::VectorXd var = (c / static_cast<double>(p)) * x.rowwise().squaredNorm();
    EXPECT_NEAR(var.mean(), c, 6.0 * c * std::sqrt(2.0 / (20.0 * p)));
  }
}

TEST(Design, SeedDeterminism) {
  Rng a(4);
  Rng b(4);
  const DesignScheme s{DesignKind::assumption2, 17, 6, BaseDistribution::normal};
  EXPECT_TRUE(gen_design(s, a) == gen_design(s, b));
}

TEST(Responses, ConstantKinds) {
  Rng gen(5);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(12, 2);
  PriorSpec prior;
  const Responses ones = gen_responses(ResponseKind::all_ones, x, prior, gen);
  EXPECT_EQ(std::accumulate(ones.y.begin(), ones.y.end(), 0), 12);
  EXPECT_FALSE(ones.beta_true.has_value());
  const Responses zeros = gen_responses(ResponseKind::all_zeros, x, prior, gen);
  EXPECT_EQ(std::accumulate(zeros.y.begin(), zeros.y.end(), 0), 0);
}

TEST(Responses, WellSpecifiedSymmetryAndReplay) {
  Rng gen(6);
  const Eigen::MatrixXd x = gen_design(DesignScheme{DesignKind::assumption1a, 50, 10, BaseDistribution::normal}, gen);
  PriorSpec prior;
  const int reps = 4000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Responses out = gen_responses(ResponseKind::well_specified, x, prior, gen);
    ASSERT_TRUE(out.beta_true.has_value());
    total += std::accumulate(out.y.begin(), out.y.end(), 0) / 50.0;
  }
  // Responses within a replicate are correlated through beta; the bound is loose on purpose.
  EXPECT_NEAR(total / reps, 0.5, 0.02);
  Rng a(7);
  Rng b(7);
  EXPECT_EQ(gen_responses(ResponseKind::well_specified, x, prior, a).y,
            gen_responses(ResponseKind::well_specified, x, prior, b).y);
}

TEST(Responses, Parsing) {
  EXPECT_EQ(parse_response_kind("all_ones"), ResponseKind::all_ones);
  EXPECT_EQ(parse_response_kind("well_specified"), ResponseKind::well_specified);
  EXPECT_EQ(parse_design_kind("assumption2"), DesignKind::assumption2);
  EXPECT_EQ(parse_base_distribution("uniform"), BaseDistribution::uniform);
  EXPECT_THROW(parse_design_kind("assumption3"), ConfigError);
}

TEST(Standardize, MomentsAndIntercept) {
  Rng gen(8);
  Eigen::MatrixXd x = random_matrix(40, 4, gen, 3.0);
  x.col(0).setOnes();
  x.col(2).array() += 5.0;
  const Eigen::MatrixXd s = standardize(x, true);
  EXPECT_TRUE(s.col(0) == x.col(0));
  for (Eigen::Index j = 1; j < 4; ++j) {
    EXPECT_NEAR(s.col(j).sum(), 0.0, 1e-12);
    EXPECT_NEAR(s.col(j).squaredNorm() / 40.0, 1.0, 1e-12);
  }
  EXPECT_LE((standardize(s, true) - s).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, ConstantColumnNamed) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 3);
  x.col(1) << 1, 2, 3, 4, 5;
  try {
    standardize(x, true);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos);
  }
}

TEST(MarchenkoPastur, UpperEdge) {
  Rng gen(9);
  const double lam = scaled_wishart_lambda_max(600, 200, gen);
  const double edge = std::pow(1.0 + std::sqrt(3.0), 2);
  EXPECT_NEAR(lam, edge, 0.1 * edge);
}
