#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

namespace coalsim {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Thread-safe log|Γ(x)|; std::lgamma writes the global signgam.
inline double log_gamma(double x) { return boost::math::lgamma(x); }

/// log B(x, y) for x, y > 0.
inline double log_beta(double x, double y) {
  return log_gamma(x) + log_gamma(y) - log_gamma(x + y);
}

/// B(x, y) through analytic continuation of Γ; arguments may be negative
/// non-integers. 1/Γ vanishes at the poles, so B is 0 when x + y is a
/// nonpositive integer.
inline double beta_signed(double x, double y) {
  const double s = x + y;
  if (s <= 0.0 && s == std::floor(s)) return 0.0;
  if (y < x) std::swap(x, y);
  if (y > 1.0 && s > 0.0) {
    // Γ(y)/Γ(x+y) directly; differencing lgamma loses digits for large y.
    return boost::math::tgamma(x) * boost::math::tgamma_delta_ratio(y, x);
  }
  int sx = 1, sy = 1, sxy = 1;
  const double lx = boost::math::lgamma(x, &sx);
  const double ly = boost::math::lgamma(y, &sy);
  const double lxy = boost::math::lgamma(x + y, &sxy);
  return static_cast<double>(sx * sy * sxy) * std::exp(lx + ly - lxy);
}

/// log C(n, k) for real n >= k >= 0.
inline double log_binomial(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

/// Falling factorial (x)_r = x (x-1) ... (x-r+1).
inline double falling_factorial(double x, int r) {
  double out = 1.0;
  for (int i = 0; i < r; ++i) out *= (x - i);
  return out;
}

}  // namespace coalsim
