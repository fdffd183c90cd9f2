#pragma once

#include <cmath>
#include <numbers>

namespace ccl {

/// Phi(x). Phi(+inf) = 1, so 1 - Phi(t/0) = 0 for t > 0.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// 1 - Phi(x), accurate in the upper tail.
inline double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// ln(1 - Phi(x)); past x = 30 uses the asymptotic series, which stays
/// accurate where 1 - Phi(x) is subnormal or underflows.
inline double std_normal_log_sf(double x) {
  if (x < 30.0) return std::log(std_normal_sf(x));
  const double r = 1.0 / (x * x);
  // 1 - r + 3r^2 - 15r^3 + 105r^4 - 945r^5
  const double series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 - 945.0 * r))));
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace ccl
