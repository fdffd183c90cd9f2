#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ccl {

/// One slowly varying factor: (ln(shift + x))^power or
/// (ln ln(shift + x))^power.
struct SlowFactor {
  enum class Kind { Log, LogLog };
  Kind kind = Kind::Log;
  double shift = 2.0;
  double power = 0.0;

  double log_eval(double x) const;
  /// Smallest integer n >= 1 at which the factor is finite and positive.
  long first_valid() const;
  /// Upper bound, valid for all x >= m, on d ln f / d ln x (zero for
  /// nonincreasing factors).
  double growth_exponent(double m) const;
  /// Upper bound, valid for all x >= m, on -d ln f / d ln x (zero for
  /// nondecreasing factors).
  double decay_exponent(double m) const;
};

enum class Summability { Converges, Diverges };

enum class Trend { ToZero, Constant, ToInfinity };

/// g(x) = scale * x^index * prod(slow factors): the power times slowly
/// varying families for which closed-form asymptotics and explicit Potter
/// bounds are available.
class RegVar {
 public:
  RegVar() = default;
  RegVar(double scale, double index, std::vector<SlowFactor> slow = {})
      : scale_(scale), index_(index), slow_(std::move(slow)) {}

  static RegVar power(double index) { return {1.0, index, {}}; }

  double scale() const { return scale_; }
  double index() const { return index_; }
  const std::vector<SlowFactor>& slow() const { return slow_; }

  double eval(double x) const;
  /// Same value as a plain product of powers; exact when every exponent is
  /// 0 or 1 (e.g. (n ln n) / n = ln n).
  double eval_product(double x) const;
  double log_eval(double x) const;
  long first_valid() const;

  RegVar operator*(const RegVar& other) const;
  RegVar pow(double p) const;
  RegVar scaled(double c) const { return {scale_ * c, index_, slow_}; }

  /// Aggregate log power and log-log power (all shifts are asymptotically
  /// equivalent).
  double total_log_power() const;
  double total_loglog_power() const;
  bool has_slow_part() const;

  /// Behaviour of the slowly varying part as x -> infinity.
  Trend slow_trend() const;
  /// Behaviour of g itself as x -> infinity.
  Trend trend() const;

  /// Convergence of sum_n g(n) by index comparison and Bertrand's test.
  Summability summability() const;

  /// Upper growth exponent of the slow part beyond m (Potter-type bound).
  double growth_exponent(double m) const;
  double decay_exponent(double m) const;

  /// Certified upper bound on sum_{k >= m} g(k), from
  /// g(k) <= g(m) (k/m)^(index + eta) with eta = growth_exponent(m).
  /// Empty when index + eta >= -1 at this m.
  std::optional<double> tail_bound(double m) const;

  std::string describe() const;

 private:
  double scale_ = 1.0;
  double index_ = 0.0;
  std::vector<SlowFactor> slow_;
};

}  // namespace ccl
