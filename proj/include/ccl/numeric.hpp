#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace ccl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier compensated accumulator. Reduction order is the call order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// ln(e^a + e^b) without overflow; -inf is the additive identity.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> xs) {
  double hi = -kInf;
  for (double x : xs) hi = x > hi ? x : hi;
  if (hi == -kInf || hi == kInf) return hi;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(x - hi));
  return hi + std::log(s.value());
}

/// Nonnegative extended real: either a finite value or +inf carrying the
/// reason the divergence was certified.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;
  std::string reason;

  static ExtReal finite(double v) { return {v, false, {}}; }
  static ExtReal infinity(std::string why) { return {kInf, true, std::move(why)}; }
  bool is_finite() const { return !infinite; }
};

/// Relative difference |a-b| / max(|a|,|b|), zero when both are zero.
inline double rel_diff(double a, double b) {
  const double m = std::fmax(std::fabs(a), std::fabs(b));
  return m == 0.0 ? 0.0 : std::fabs(a - b) / m;
}

}  // namespace ccl
