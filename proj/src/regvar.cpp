#include "ccl/regvar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccl/numeric.hpp"

namespace ccl {

namespace {

constexpr double kPowerTol = 1e-12;

bool is_zero(double x) { return std::fabs(x) <= kPowerTol; }

}  // namespace

double SlowFactor::log_eval(double x) const {
  const double l = std::log(shift + x);
  if (kind == Kind::Log) return power * std::log(l);
  return power * std::log(std::log(l));
}

long SlowFactor::first_valid() const {
  // ln(shift + n) > 0 for Log, ln ln(shift + n) > 0 for LogLog.
  const double need = kind == Kind::Log ? 1.0 : std::exp(1.0);
  long n = 1;
  while (shift + static_cast<double>(n) <= need) ++n;
  return n;
}

double SlowFactor::growth_exponent(double m) const {
  if (power <= 0.0) return 0.0;
  const double l = std::log(shift + m);
  // d ln f / d ln x = power * x / ((shift + x) * ln(shift + x) [* ln ln]),
  // and x/(shift+x) <= 1 while 1/ln and 1/(ln * ln ln) decrease in x.
  if (kind == Kind::Log) return power / l;
  return power / (l * std::log(l));
}

double SlowFactor::decay_exponent(double m) const {
  if (power >= 0.0) return 0.0;
  SlowFactor flipped = *this;
  flipped.power = -power;
  return flipped.growth_exponent(m);
}

double RegVar::log_eval(double x) const {
  double s = std::log(scale_) + index_ * std::log(x);
  for (const auto& f : slow_) s += f.log_eval(x);
  return s;
}

double RegVar::eval(double x) const {
  if (scale_ == 0.0) return 0.0;
  return std::exp(log_eval(x));
}

double RegVar::eval_product(double x) const {
  auto pw = [](double b, double e) { return e == 1.0 ? b : std::pow(b, e); };
  double v = scale_ * pw(x, index_);
  for (const auto& f : slow_) {
    const double l = std::log(f.shift + x);
    v *= pw(f.kind == SlowFactor::Kind::Log ? l : std::log(l), f.power);
  }
  return v;
}

long RegVar::first_valid() const {
  long n = 1;
  for (const auto& f : slow_) n = std::max(n, f.first_valid());
  return n;
}

RegVar RegVar::operator*(const RegVar& other) const {
  std::vector<SlowFactor> merged = slow_;
  for (const auto& f : other.slow_) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const SlowFactor& g) {
      return g.kind == f.kind && g.shift == f.shift;
    });
    if (it != merged.end()) {
      it->power += f.power;
    } else {
      merged.push_back(f);
    }
  }
  std::erase_if(merged, [](const SlowFactor& g) { return is_zero(g.power); });
  return {scale_ * other.scale_, index_ + other.index_, std::move(merged)};
}

RegVar RegVar::pow(double p) const {
  std::vector<SlowFactor> s = slow_;
  for (auto& f : s) f.power *= p;
  std::erase_if(s, [](const SlowFactor& g) { return is_zero(g.power); });
  return {std::pow(scale_, p), index_ * p, std::move(s)};
}

double RegVar::total_log_power() const {
  double g = 0.0;
  for (const auto& f : slow_)
    if (f.kind == SlowFactor::Kind::Log) g += f.power;
  return g;
}

double RegVar::total_loglog_power() const {
  double g = 0.0;
  for (const auto& f : slow_)
    if (f.kind == SlowFactor::Kind::LogLog) g += f.power;
  return g;
}

bool RegVar::has_slow_part() const {
  return !is_zero(total_log_power()) || !is_zero(total_loglog_power());
}

Trend RegVar::slow_trend() const {
  const double g = total_log_power();
  const double gg = total_loglog_power();
  if (!is_zero(g)) return g > 0 ? Trend::ToInfinity : Trend::ToZero;
  if (!is_zero(gg)) return gg > 0 ? Trend::ToInfinity : Trend::ToZero;
  return Trend::Constant;
}

Trend RegVar::trend() const {
  if (scale_ == 0.0) return Trend::ToZero;
  if (!is_zero(index_)) return index_ > 0 ? Trend::ToInfinity : Trend::ToZero;
  return slow_trend();
}

Summability RegVar::summability() const {
  if (scale_ == 0.0) return Summability::Converges;
  if (!is_zero(index_ + 1.0)) {
    return index_ < -1.0 ? Summability::Converges : Summability::Diverges;
  }
  const double g = total_log_power();
  if (!is_zero(g + 1.0)) return g < -1.0 ? Summability::Converges : Summability::Diverges;
  return total_loglog_power() < -1.0 - kPowerTol ? Summability::Converges
                                                 : Summability::Diverges;
}

double RegVar::growth_exponent(double m) const {
  double eta = 0.0;
  for (const auto& f : slow_) eta += f.growth_exponent(m);
  return eta;
}

double RegVar::decay_exponent(double m) const {
  double eta = 0.0;
  for (const auto& f : slow_) eta += f.decay_exponent(m);
  return eta;
}

std::optional<double> RegVar::tail_bound(double m) const {
  if (scale_ == 0.0) return 0.0;
  if (m < static_cast<double>(first_valid())) return std::nullopt;
  const double sigma = index_ + growth_exponent(m);
  if (sigma >= -1.0) return std::nullopt;
  // sum_{k>=m} (k/m)^sigma <= 1 + int_m^inf (x/m)^sigma dx = 1 + m/(-sigma-1)
  return eval(m) * (1.0 + m / (-sigma - 1.0));
}

std::string RegVar::describe() const {
  std::ostringstream os;
  os << scale_ << "*n^" << index_;
  for (const auto& f : slow_) {
    os << (f.kind == SlowFactor::Kind::Log ? "*ln(" : "*lnln(") << f.shift << "+n)^" << f.power;
  }
  return os.str();
}

}  // namespace ccl
