#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace probit_mix;

namespace {

std::vector<MeetingRecord> records_from(const std::vector<std::int64_t>& taus, std::int64_t lag) {
  std::vector<MeetingRecord> out;
  for (auto tau : taus) out.push_back(MeetingRecord{tau, lag, false, 0});
  return out;
}

// Direct evaluation of E[max{0, ceil((tau - L - t) / L)}] with floating point ceil.
double brute_force(const std::vector<std::int64_t>& taus, std::int64_t lag, std::int64_t t) {
  double s = 0.0;
  for (auto tau : taus)
    s += std::max(0.0, std::ceil(static_cast<double>(tau - lag - t) / static_cast<double>(lag)));
  return s / static_cast<double>(taus.size());
}

}  // namespace

TEST(TvBound, SingleRecordArithmetic) {
  const auto curve = tv_bound_curve(records_from({25}, 10), {10, 20}, nullptr);
  EXPECT_EQ(curve.dbar[0], 1.0);
  EXPECT_EQ(curve.dbar[1], 0.0);
  EXPECT_EQ(tv_bound_term(25, 10, 10), 1);
  EXPECT_EQ(tv_bound_term(25, 10, 4), 2);
  EXPECT_EQ(tv_bound_term(25, 10, 15), 0);
}

TEST(TvBound, TwoRecordMean) {
  const auto curve = tv_bound_curve(records_from({25, 45}, 10), {10}, nullptr);
  // ceil(0.5) = 1 and ceil(2.5) = 3.
  EXPECT_EQ(curve.dbar[0], 2.0);
  EXPECT_NEAR(curve.se[0], 1.0, 1e-15);
}

TEST(TvBound, ZeroBeyondLargestMeeting) {
  const auto curve = tv_bound_curve(records_from({31, 57, 44}, 10), {47, 48, 100}, nullptr);
  for (double v : curve.dbar) EXPECT_EQ(v, 0.0);
}

TEST(TvBound, DefaultGridAndMonotone) {
  probit_mix::Rng gen(1);
  std::vector<std::int64_t> taus;
  for (int k = 0; k < 300; ++k) taus.push_back(21 + static_cast<std::int64_t>(uniform_index(gen, 400)));
  const auto curve = tv_bound_curve(records_from(taus, 20), {}, nullptr);
  const std::int64_t max_tau = *std::max_element(taus.begin(), taus.end());
  ASSERT_EQ(curve.t_grid.front(), 1);
  ASSERT_EQ(curve.t_grid.back(), max_tau - 20);
  for (std::size_t k = 0; k < curve.t_grid.size(); ++k) {
    EXPECT_EQ(curve.dbar[k], brute_force(taus, 20, curve.t_grid[k]));
    EXPECT_GE(curve.dbar[k], 0.0);
    if (k > 0) EXPECT_LE(curve.dbar[k], curve.dbar[k - 1]);
  }
  EXPECT_EQ(curve.dbar.back(), 0.0);
  EXPECT_EQ(curve.n_used, 300u);
}

TEST(TvBound, DoublingExcessRoughlyDoublesMixingTime) {
  probit_mix::Rng gen(2);
  const std::int64_t lag = 50;
  std::vector<std::int64_t> taus;
  std::vector<std::int64_t> doubled;
  for (int k = 0; k < 2000; ++k) {
    const auto excess = 1 + static_cast<std::int64_t>(uniform_index(gen, 300));
    taus.push_back(lag + excess);
    doubled.push_back(lag + 2 * excess);
  }
  const double a = static_cast<double>(tv_mixing_time_upper(records_from(taus, lag), 0.1));
  const double b = static_cast<double>(tv_mixing_time_upper(records_from(doubled, lag), 0.1));
  EXPECT_NEAR(b / a, 2.0, 0.1);
}

TEST(TvBound, CensoredRecordsExcludedWithWarning) {
  auto records = records_from({25, 45}, 10);
  records.push_back(MeetingRecord{1000, 10, true, 0});
  std::ostringstream warn;
  const auto curve = tv_bound_curve(records, {10}, &warn);
  EXPECT_EQ(curve.n_censored, 1u);
  EXPECT_EQ(curve.n_used, 2u);
  EXPECT_EQ(curve.dbar[0], 2.0);
  EXPECT_NE(warn.str().find("censored"), std::string::npos);
}

TEST(TvBound, InvalidRecordSets) {
  EXPECT_THROW(tv_bound_curve({}, {}, nullptr), Error);
  auto mixed = records_from({25}, 10);
  mixed.push_back(MeetingRecord{40, 20, false, 0});
  EXPECT_THROW(tv_bound_curve(mixed, {}, nullptr), Error);
  EXPECT_THROW(tv_bound_curve({MeetingRecord{30, 10, true, 0}}, {}, nullptr), Error);
}

TEST(MixingTime, ReadOffTheCurve) {
  const auto records = records_from({25, 45}, 10);
  const auto curve = tv_bound_curve(records, {}, nullptr);
  // t = 24: (0 + 2) / 2; t = 25: (0 + 1) / 2.
  EXPECT_EQ(tv_mixing_time_upper(curve, 0.5), 25);
  EXPECT_EQ(tv_mixing_time_upper(curve, 10.0), 1);
  const auto zero = tv_bound_curve(records_from({11, 11}, 10), {}, nullptr);
  EXPECT_EQ(tv_mixing_time_upper(zero, 0.1), 1);
  EXPECT_THROW(tv_mixing_time_upper(tv_bound_curve(records, {1, 2}, nullptr), 0.1), GridExhaustedError);
}
