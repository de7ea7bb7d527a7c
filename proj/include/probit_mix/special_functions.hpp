#pragma once

// Scalar Gaussian primitives used throughout the samplers: log Phi, the probit
// potential h = -log Phi and its derivatives, a log-space normal quantile, and
// half-line truncated normals sampled by inverse CDF.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace probit_mix {

namespace detail {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;  // log(sqrt(2 pi))
inline constexpr double kLogHalf = -0.69314718055994530941723212145818;

// Continued fraction g(x) = x + 1/(x + 3/2/(x + 2/(x + ...))), i.e. the tail of
// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/g(x)). Modified Lentz; x >= 2.
inline double erfc_cf_tail(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 2; k < 5000; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

inline constexpr double kCfThreshold = 6.0;

// Rational evaluation used by AS241.
template <int N>
inline double polyval(const double (&c)[N], double x) {
  double v = c[N - 1];
  for (int i = N - 2; i >= 0; --i) v = v * x + c[i];
  return v;
}

}  // namespace detail

/// Scaled complementary error function exp(x^2) erfc(x).
inline double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    // erfc(x) = 2 - erfc(-x); overflows to inf for x < ~ -26.6, which is correct.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < detail::kCfThreshold) return std::exp(x * x) * std::erfc(x);
  if (std::isinf(x)) return 0.0;
  const double g = detail::erfc_cf_tail(x);
  return detail::kInvSqrtPi / (x + 0.5 / g);
}

inline double std_normal_logpdf(double r) { return -0.5 * r * r - detail::kLogSqrt2Pi; }

inline double std_normal_pdf(double r) { return std::exp(std_normal_logpdf(r)); }

inline double std_normal_cdf(double r) { return 0.5 * std::erfc(-r / detail::kSqrt2); }

/// log Phi(r). Uses erfcx in the lower tail so there is no underflow for any finite r.
inline double std_normal_logcdf(double r) {
  if (std::isnan(r)) return r;
  if (r > 0.0) return std::log1p(-0.5 * std::erfc(r / detail::kSqrt2));
  if (r > -1.0) return std::log(0.5 * std::erfc(-r / detail::kSqrt2));
  const double x = -r / detail::kSqrt2;
  return std::log(0.5 * erfcx(x)) - x * x;
}

/// phi(r) / Phi(r), stable for r -> -infinity (tends to -r).
inline double normal_inverse_mills(double r) {
  if (r > -1.0) return std::exp(std_normal_logpdf(r) - std_normal_logcdf(r));
  const double x = -r / detail::kSqrt2;
  return std::numbers::sqrt2 * detail::kInvSqrtPi / erfcx(x);
}

/// Probit potential h(r) = -log Phi(r).
inline double h(double r) { return -std_normal_logcdf(r); }

/// h'(r) = -phi(r)/Phi(r).
inline double h_prime(double r) { return -normal_inverse_mills(r); }

/// h''(r) = h'(r)^2 - r h'(r), always in (0, 1).
inline double h_second(double r) {
  const double x = -r / detail::kSqrt2;
  if (x >= detail::kCfThreshold) {
    // mills = sqrt(2) (x + K) = -r + sqrt(2) K, so mills + r = sqrt(2) K without cancellation.
    const double k = 0.5 / detail::erfc_cf_tail(x);
    const double mills = -r + detail::kSqrt2 * k;
    return mills * detail::kSqrt2 * k;
  }
  const double mills = normal_inverse_mills(r);
  return mills * (mills + r);
}

/// Standard normal quantile, Wichura's AS241 (PPND16), relative accuracy ~1e-16.
inline double std_normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) return std::numeric_limits<double>::quiet_NaN();
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[8] = {3.387132872796366608,  133.14166789178437745,
                                  1971.5909503065514427, 13731.693765509461125,
                                  45921.953931549871457, 67265.770927008700853,
                                  33430.575583588128105, 2509.0809287301226727};
  static constexpr double b[8] = {1.0,
                                  42.313330701600911252,
                                  687.1870074920579083,
                                  5394.1960214247511077,
                                  21213.794301586595867,
                                  39307.89580009271061,
                                  28729.085735721942674,
                                  5226.495278852854561};
  static constexpr double c[8] = {1.42343711074968357734,   4.6303378461565452959,
                                  5.7694972214606914055,    3.64784832476320460504,
                                  1.27045825245236838258,   0.24178072517745061177,
                                  0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr double d[8] = {1.0,
                                  2.05319162663775882187,
                                  1.6763848301838038494,
                                  0.68976733498510000455,
                                  0.14810397642748007459,
                                  0.0151986665636164571966,
                                  5.475938084995344946e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.6579046435011037772,     5.4637849111641143699,
                                  1.7848265399172913358,     0.29656057182850489123,
                                  0.026532189526576123093,   0.0012426609473880784386,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0,
                                  0.59983220655588793769,
                                  0.13692988092273580531,
                                  0.0148753612908506148525,
                                  7.868691311456132591e-4,
                                  1.8463183175100546818e-5,
                                  1.4215117583164458887e-7,
                                  2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * detail::polyval(a, r) / detail::polyval(b, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = detail::polyval(c, r) / detail::polyval(d, r);
  } else {
    r -= 5.0;
    x = detail::polyval(e, r) / detail::polyval(f, r);
  }
  return q < 0.0 ? -x : x;
}

/// Solves log Phi(w) = log_p for log_p <= log(1/2). Below exp's range the start
/// comes from the tail asymptotics and is polished by Newton steps in log space.
inline double std_normal_quantile_log(double log_p) {
  if (std::isnan(log_p) || log_p > 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (log_p == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (log_p > -700.0) return std_normal_quantile(std::exp(log_p));
  const double t = -2.0 * log_p;
  double w = -std::sqrt(t - std::log(2.0 * std::numbers::pi * t));
  for (int it = 0; it < 4; ++it) {
    const double step = (std_normal_logcdf(w) - log_p) / normal_inverse_mills(w);
    w -= step;
    if (std::abs(step) <= 1e-15 * std::abs(w)) break;
  }
  return w;
}

/// Truncation region of a latent variable: (0, inf) for y = 1, (-inf, 0] for y = 0.
enum class HalfLine { positive, nonpositive };

inline HalfLine region_for_response(int y) { return y == 1 ? HalfLine::positive : HalfLine::nonpositive; }

inline bool in_region(HalfLine region, double x) {
  return region == HalfLine::positive ? x > 0.0 : x <= 0.0;
}

struct TruncNormParams {
  double location = 0.0;
  double scale = 1.0;
  HalfLine region = HalfLine::positive;

  friend bool operator==(const TruncNormParams&, const TruncNormParams&) = default;
};

namespace detail {

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace detail

/// Inverse CDF of the truncated normal at u in (0, 1). Strictly increasing in u;
/// the result always lies inside the truncation region.
inline double truncnorm_sample(const TruncNormParams& params, double u) {
  const double mu = params.location;
  const double sigma = params.scale;
  const double bound = -mu / sigma;  // standardized position of 0
  double w;
  if (params.region == HalfLine::positive) {
    // Phi(w) = Phi(bound) + u Phi(-bound)
    const double log_mass = std_normal_logcdf(-bound);
    const double log_low = detail::log_add_exp(std_normal_logcdf(bound), std::log(u) + log_mass);
    if (log_low <= detail::kLogHalf) {
      w = std_normal_quantile_log(log_low);
    } else {
      w = -std_normal_quantile_log(std::log1p(-u) + log_mass);
    }
    w = std::max(w, bound);
  } else {
    // Phi(w) = u Phi(bound)
    const double log_mass = std_normal_logcdf(bound);
    const double log_low = std::log(u) + log_mass;
    if (log_low <= detail::kLogHalf) {
      w = std_normal_quantile_log(log_low);
    } else {
      w = -std_normal_quantile_log(
          detail::log_add_exp(std_normal_logcdf(-bound), std::log1p(-u) + log_mass));
    }
    w = std::min(w, bound);
  }
  double x = mu + sigma * w;
  if (params.region == HalfLine::positive) {
    if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  } else if (x > 0.0) {
    x = 0.0;
  }
  return x;
}

/// Log-density of the truncated normal; -inf outside the region.
inline double truncnorm_logpdf(const TruncNormParams& params, double x) {
  if (!in_region(params.region, x)) return -std::numeric_limits<double>::infinity();
  const double standardized = (x - params.location) / params.scale;
  const double log_mass = params.region == HalfLine::positive
                              ? std_normal_logcdf(params.location / params.scale)
                              : std_normal_logcdf(-params.location / params.scale);
  return std_normal_logpdf(standardized) - std::log(params.scale) - log_mass;
}

}  // namespace probit_mix
