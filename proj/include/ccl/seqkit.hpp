#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccl/regvar.hpp"

namespace ccl {

/// A positive sequence indexed from 1, optionally tagged with a power times
/// slowly varying family that carries analytic tail bounds and limits.
class Sequence {
 public:
  using Fn = std::function<double(long)>;

  /// Custom sequence: values only, no analytic metadata.
  Sequence(Fn fn, std::string label);
  /// Family-backed sequence. Below `first_index` the value is frozen at the
  /// family's value there (e.g. (n ln n)^(1/2) is only defined for n >= 2).
  explicit Sequence(RegVar family, long first_index = 1);

  double operator()(long n) const { return fn_(n); }
  const std::optional<RegVar>& family() const { return family_; }
  const std::string& label() const { return label_; }
  /// Index from which values follow the family formula.
  long first_index() const { return first_index_; }

 private:
  Fn fn_;
  std::optional<RegVar> family_;
  std::string label_;
  long first_index_ = 1;
};

/// tau_n.
class WeightSeq : public Sequence {
 public:
  using Sequence::Sequence;
};

/// a_n: increasing, strictly positive.
class NormSeq : public Sequence {
 public:
  using Sequence::Sequence;
};

/// tau_n = n^beta * (ln(2+n))^log_power * (ln ln(e^2+n))^loglog_power.
WeightSeq power_weights(double beta, double log_power = 0.0, double loglog_power = 0.0);
/// a_n = n^alpha * (ln(2+n))^log_power * (ln ln(e^2+n))^loglog_power.
NormSeq power_norm(double alpha, double log_power = 0.0, double loglog_power = 0.0);
/// a_n = (n ln n)^(1/2) for n >= 2 (a_1 := a_2).
NormSeq spataru_norm();
/// tau_n = 1/n.
inline WeightSeq spataru_weights() { return power_weights(-1.0); }

enum class RegVerdict { CertifiedPass, CertifiedFail, EmpiricalPass, Inconclusive };
std::string to_string(RegVerdict v);

struct RegularityReport {
  std::string condition;
  RegVerdict verdict = RegVerdict::Inconclusive;
  long horizon = 0;
  std::optional<double> C;
  std::optional<double> theta;
  std::optional<long> N;
  /// Liminf estimate or asymptotic ratio, when meaningful for the condition.
  std::optional<double> limit;
  std::vector<std::string> notes;

  bool passed() const {
    return verdict == RegVerdict::CertifiedPass || verdict == RegVerdict::EmpiricalPass;
  }
};

/// T_k = sum_{j<=k} j tau_j (compensated).
double partial_weight_sum(const WeightSeq& w, long k);
/// {T_0, T_1, ..., T_k}.
std::vector<double> partial_weight_sums(const WeightSeq& w, long k);

/// Sufficient criteria for Condition A: liminf tau_n > 0, or
/// liminf n tau_n > 0 together with the dyadic sandwich
/// C tau_{2^{j-1}} >= tau_k >= tau_{2^j} / C on 2^{j-1} <= k < 2^j.
RegularityReport check_condition_a_criteria(const WeightSeq& w, long horizon = 10000);

/// Exponent form for the tail condition: a_n^(3 theta) or a_n^(2 theta).
enum class AuxForm { Cubic, Quadratic };

/// (a_n^{p theta} / n^{theta-1}) sum_{k>=n} k^theta tau_k / a_k^{p theta}
///   <= C sum_{k<n} k tau_k, p = 3 (Cubic) or 2 (Quadratic).
RegularityReport check_aux_cond(const WeightSeq& w, const NormSeq& a, double theta, AuxForm form,
                                long horizon = 10000);

/// Same as check_aux_cond with a general exponent nu on the normalizer:
/// (b_n^{nu theta} / n^{theta-1}) sum_{k>=n} k^theta tau_k / b_k^{nu theta}.
RegularityReport check_tail_weight_cond(const WeightSeq& w, const NormSeq& b, double theta, double nu,
                                        long horizon = 10000);

/// liminf_n inf_{k>=n} a_k^p / (k a_n^p) * sum_{j<n} j tau_j > 0, p = 3 or 2.
RegularityReport check_aux_aux_cond(const WeightSeq& w, const NormSeq& a, AuxForm form,
                                    long horizon = 10000);

/// General-power version of check_aux_aux_cond.
RegularityReport check_growth_ratio_cond(const WeightSeq& w, const NormSeq& b, double nu,
                                         long horizon = 10000);

/// Smallest integer theta in [1, max_theta] for which check_aux_cond passes.
std::optional<double> find_aux_theta(const WeightSeq& w, const NormSeq& a, AuxForm form,
                                     long horizon = 10000, int max_theta = 16);

/// a_n <= a_{n+1} on [1, horizon]; returns the first violating n if any.
std::optional<long> first_monotonicity_violation(const NormSeq& a, long horizon);

/// liminf over [1, horizon]: running infimum over the last half.
double empirical_liminf(const std::function<double(long)>& f, long horizon);

}  // namespace ccl
