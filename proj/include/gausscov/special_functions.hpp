#pragma once

// Beta, F, chi-squared and gamma distribution functions.
//
// The regularized incomplete beta and gamma ratios come from Boost.Math.
// Quantiles are solved here by safeguarded Newton iteration so that the tail
// being inverted is always the small one; the complement y = 1 - x is carried
// separately wherever cancellation would otherwise lose digits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gausscov/errors.hpp"

namespace gausscov::special {

/// Shape parameters of a Beta distribution.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kHalfLog2Pi = 0.91893853320467274178;

inline void require_shapes(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    std::ostringstream os;
    os << "beta shapes must be positive and finite (a=" << a << ", b=" << b << ")";
    throw std::domain_error(os.str());
  }
}

inline double clamp_probability(double p, const char* where) {
  if (std::isnan(p)) throw numerical_error(std::string(where) + ": result is NaN");
  if (p < -1e-9 || p > 1.0 + 1e-9) {
    std::ostringstream os;
    os << where << ": probability " << p << " clamped into [0,1]";
    gausscov::detail::warn(os.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

// Boost evaluation failures become numerical_error; domain errors pass through.
template <class F>
auto guarded(const char* where, F&& f) {
  try {
    return f();
  } catch (const std::domain_error&) {
    throw;
  } catch (const std::exception& e) {
    throw numerical_error(std::string(where) + ": " + e.what());
  }
}

// lgamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], valid for x >= 10.
inline double stirling_remainder(double x) {
  const double z = 1.0 / (x * x);
  const double s =
      1.0 / 12.0 +
      z * (-1.0 / 360.0 +
           z * (1.0 / 1260.0 +
                z * (-1.0 / 1680.0 +
                     z * (1.0 / 1188.0 +
                          z * (-691.0 / 360360.0 + z * (1.0 / 156.0 + z * (-3617.0 / 122400.0)))))));
  return s / x;
}

}  // namespace detail

/// ln B(a, b), accurate when either shape is large.
inline double log_beta(double a, double b) {
  detail::require_shapes(a, b);
  if (a < b) std::swap(a, b);
  if (b >= 10.0) {
    return detail::kHalfLog2Pi - (a - 0.5) * std::log1p(b / a) + b * std::log(b / (a + b)) -
           0.5 * std::log(b) + detail::stirling_remainder(a) + detail::stirling_remainder(b) -
           detail::stirling_remainder(a + b);
  }
  if (a >= 10.0) {
    const double ratio = -(a - 0.5) * std::log1p(b / a) - b * std::log(a + b) + b +
                         detail::stirling_remainder(a) - detail::stirling_remainder(a + b);
    return std::lgamma(b) + ratio;
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// {I_x(a,b), 1 - I_x(a,b)} with y = 1 - x; the argument nearer zero is passed on.
inline std::pair<double, double> incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  return guarded("incomplete beta", [&] {
    if (x <= y) return std::pair{boost::math::ibeta(a, b, x), boost::math::ibetac(a, b, x)};
    return std::pair{boost::math::ibetac(b, a, y), boost::math::ibeta(b, a, y)};
  });
}

}  // namespace detail

/// Regularized incomplete beta I_x(a,b), i.e. the Beta(a,b) distribution function.
inline double beta_cdf(double x, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_cdf: x outside [0,1]");
  return detail::clamp_probability(detail::incomplete_beta(p.a, p.b, x, 1.0 - x).first, "beta_cdf");
}

/// Upper tail 1 - I_x(a,b).
inline double beta_sf(double x, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_sf: x outside [0,1]");
  return detail::clamp_probability(detail::incomplete_beta(p.a, p.b, x, 1.0 - x).second, "beta_sf");
}

/// I_x(a,b) with the complement supplied separately (x + y == 1 up to rounding).
inline double beta_cdf(double x, double y, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(x >= 0.0 && y >= 0.0)) throw std::domain_error("beta_cdf: negative argument");
  return detail::clamp_probability(detail::incomplete_beta(p.a, p.b, x, y).first, "beta_cdf");
}

inline double beta_sf(double x, double y, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(x >= 0.0 && y >= 0.0)) throw std::domain_error("beta_sf: negative argument");
  return detail::clamp_probability(detail::incomplete_beta(p.a, p.b, x, y).second, "beta_sf");
}

inline double beta_log_pdf(double x, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) - log_beta(p.a, p.b);
}

namespace detail {

// Solves tail(x) = target where tail is the lower (cdf) or upper (sf) Beta tail.
// Newton steps inside a shrinking bracket, bisection when Newton leaves it.
inline double beta_tail_inverse(double target, BetaParams p, bool upper) {
  constexpr int kMaxIter = 200;
  double lo = 0.0;
  double hi = 1.0;
  const double mean = p.a / (p.a + p.b);
  double x = mean;
  // Small-argument tail asymptotics: I_x ~ x^a / (a B), 1 - I_x ~ (1-x)^b / (b B).
  const double lb = log_beta(p.a, p.b);
  if (!upper) {
    const double guess = std::exp((std::log(target) + std::log(p.a) + lb) / p.a);
    if (guess > 0.0 && guess < mean) x = guess;
  } else {
    const double guess = -std::expm1((std::log(target) + std::log(p.b) + lb) / p.b);
    if (guess > mean && guess < 1.0) x = guess;
  }
  // |tail - target| at the bracket ends; tail(0) and tail(1) are exact.
  double err_lo = upper ? 1.0 - target : target;
  double err_hi = upper ? target : 1.0 - target;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const auto [cdf, sf] = incomplete_beta(p.a, p.b, x, 1.0 - x);
    const double f = (upper ? sf : cdf) - target;
    if (f == 0.0) return x;
    // cdf increases in x, sf decreases.
    const bool below = upper ? (f > 0.0) : (f < 0.0);
    if (below) {
      lo = x;
      err_lo = std::fabs(f);
    } else {
      hi = x;
      err_hi = std::fabs(f);
    }
    // Adjacent doubles: the quantile is not representable more closely.
    if (std::nextafter(lo, 1.0) >= hi) return err_lo <= err_hi ? lo : hi;
    const double pdf = std::exp(beta_log_pdf(x, p));
    const double slope = upper ? -pdf : pdf;
    double next = x - f / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      // Bisect geometrically while the bracket spans orders of magnitude.
      const double floor_lo = std::max(lo, 1e-300);
      next = hi / floor_lo > 4.0 ? std::sqrt(floor_lo * hi) : 0.5 * (lo + hi);
      if (next <= lo || next >= hi) return err_lo <= err_hi ? lo : hi;
    }
    if (std::fabs(next - x) <= 2.0 * kEps * x && std::fabs(f) <= 1e-12 * target) return next;
    x = next;
  }
  std::ostringstream os;
  os << "beta quantile did not converge (target=" << target << ", a=" << p.a << ", b=" << p.b
     << ")";
  throw numerical_error(os.str());
}

}  // namespace detail

/// Quantile: the x with I_x(a,b) = prob.
inline double beta_inv_cdf(double prob, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::domain_error("beta_inv_cdf: p outside [0,1]");
  if (prob == 0.0) return 0.0;
  if (prob == 1.0) return 1.0;
  if (prob > 0.5) return detail::beta_tail_inverse(1.0 - prob, p, true);
  return detail::beta_tail_inverse(prob, p, false);
}

/// Upper quantile: the x with 1 - I_x(a,b) = tail. Use when tail is tiny.
inline double beta_inv_sf(double tail, BetaParams p) {
  detail::require_shapes(p.a, p.b);
  if (!(tail >= 0.0 && tail <= 1.0)) throw std::domain_error("beta_inv_sf: tail outside [0,1]");
  if (tail == 0.0) return 1.0;
  if (tail == 1.0) return 0.0;
  if (tail > 0.5) return detail::beta_tail_inverse(1.0 - tail, p, false);
  return detail::beta_tail_inverse(tail, p, true);
}

/// F distribution function via F_{d1,d2}(x) = Beta_{d1/2,d2/2}(d1 x / (d1 x + d2)).
inline double f_cdf(double x, double d1, double d2) {
  if (!(x >= 0.0)) throw std::domain_error("f_cdf: negative argument");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::domain_error("f_cdf: degrees of freedom must be positive");
  if (std::isinf(x)) return 1.0;
  const double num = d1 * x;
  const double den = num + d2;
  return beta_cdf(num / den, d2 / den, {d1 / 2.0, d2 / 2.0});
}

inline double f_sf(double x, double d1, double d2) {
  if (!(x >= 0.0)) throw std::domain_error("f_sf: negative argument");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::domain_error("f_sf: degrees of freedom must be positive");
  if (std::isinf(x)) return 0.0;
  const double num = d1 * x;
  const double den = num + d2;
  return beta_sf(num / den, d2 / den, {d1 / 2.0, d2 / 2.0});
}

/// Gamma(shape, scale) distribution function.
inline double gamma_cdf(double x, double shape, double scale = 1.0) {
  if (!(x >= 0.0)) throw std::domain_error("gamma_cdf: negative argument");
  if (!(shape > 0.0) || !(scale > 0.0)) throw std::domain_error("gamma_cdf: invalid parameters");
  if (std::isinf(x)) return 1.0;
  const double v = detail::guarded("gamma_cdf", [&] { return boost::math::gamma_p(shape, x / scale); });
  return detail::clamp_probability(v, "gamma_cdf");
}

inline double gamma_sf(double x, double shape, double scale = 1.0) {
  if (!(x >= 0.0)) throw std::domain_error("gamma_sf: negative argument");
  if (!(shape > 0.0) || !(scale > 0.0)) throw std::domain_error("gamma_sf: invalid parameters");
  if (std::isinf(x)) return 0.0;
  const double v = detail::guarded("gamma_sf", [&] { return boost::math::gamma_q(shape, x / scale); });
  return detail::clamp_probability(v, "gamma_sf");
}

/// Chi-squared distribution function, Gamma(df/2, 2).
inline double chisq_cdf(double x, double df) {
  if (!(x >= 0.0)) throw std::domain_error("chisq_cdf: negative argument");
  if (!(df > 0.0)) throw std::domain_error("chisq_cdf: df must be positive");
  return gamma_cdf(x, df / 2.0, 2.0);
}

inline double chisq_sf(double x, double df) {
  if (!(x >= 0.0)) throw std::domain_error("chisq_sf: negative argument");
  if (!(df > 0.0)) throw std::domain_error("chisq_sf: df must be positive");
  return gamma_sf(x, df / 2.0, 2.0);
}

/// Chi-squared quantile.
inline double chisq_inv_cdf(double prob, double df) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::domain_error("chisq_inv_cdf: p outside [0,1]");
  if (!(df > 0.0)) throw std::domain_error("chisq_inv_cdf: df must be positive");
  if (prob == 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * detail::guarded("chisq_inv_cdf", [&] { return boost::math::gamma_p_inv(df / 2.0, prob); });
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace gausscov::special
