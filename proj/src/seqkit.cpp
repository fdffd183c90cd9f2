#include "ccl/seqkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccl/numeric.hpp"

namespace ccl {

namespace {

constexpr double kTol = 1e-12;
const double kE2 = std::exp(2.0);

std::vector<SlowFactor> standard_slow(double log_power, double loglog_power) {
  std::vector<SlowFactor> s;
  if (log_power != 0.0) s.push_back({SlowFactor::Kind::Log, 2.0, log_power});
  if (loglog_power != 0.0) s.push_back({SlowFactor::Kind::LogLog, kE2, loglog_power});
  return s;
}

// A running infimum that does not visibly decay: the infimum over the last
// half of the horizon is at least half the infimum over the quarter before.
bool empirically_positive(const std::function<double(long)>& f, long horizon) {
  double early = kInf;
  double late = kInf;
  for (long n = std::max(1L, horizon / 4); n < horizon / 2; ++n) early = std::min(early, f(n));
  for (long n = std::max(1L, horizon / 2); n <= horizon; ++n) late = std::min(late, f(n));
  return late > 0.0 && late >= 0.5 * early;
}

// log of n -> x_n for n in [1, horizon], index 0 unused.
std::vector<double> log_values(const Sequence& s, long horizon) {
  std::vector<double> out(static_cast<size_t>(horizon) + 2, 0.0);
  for (long n = 1; n <= horizon + 1; ++n) out[static_cast<size_t>(n)] = std::log(s(n));
  return out;
}

}  // namespace

Sequence::Sequence(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}

Sequence::Sequence(RegVar family, long first_index)
    : family_(family), label_(family.describe()), first_index_(std::max(first_index, family.first_valid())) {
  fn_ = [family, first_index](long n) {
    return family.eval(static_cast<double>(std::max(n, first_index)));
  };
}

WeightSeq power_weights(double beta, double log_power, double loglog_power) {
  return WeightSeq(RegVar(1.0, beta, standard_slow(log_power, loglog_power)));
}

NormSeq power_norm(double alpha, double log_power, double loglog_power) {
  return NormSeq(RegVar(1.0, alpha, standard_slow(log_power, loglog_power)));
}

NormSeq spataru_norm() {
  return NormSeq(RegVar(1.0, 0.5, {{SlowFactor::Kind::Log, 0.0, 0.5}}), 2);
}

std::string to_string(RegVerdict v) {
  switch (v) {
    case RegVerdict::CertifiedPass: return "CertifiedPass";
    case RegVerdict::CertifiedFail: return "CertifiedFail";
    case RegVerdict::EmpiricalPass: return "EmpiricalPass";
    case RegVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

double partial_weight_sum(const WeightSeq& w, long k) {
  if (k < 1) throw std::invalid_argument("partial_weight_sum: k must be >= 1");
  CompensatedSum s;
  for (long j = 1; j <= k; ++j) s.add(static_cast<double>(j) * w(j));
  return s.value();
}

std::vector<double> partial_weight_sums(const WeightSeq& w, long k) {
  std::vector<double> out(static_cast<size_t>(k) + 1, 0.0);
  CompensatedSum s;
  for (long j = 1; j <= k; ++j) {
    s.add(static_cast<double>(j) * w(j));
    out[static_cast<size_t>(j)] = s.value();
  }
  return out;
}

double empirical_liminf(const std::function<double(long)>& f, long horizon) {
  double m = kInf;
  for (long n = std::max(1L, horizon / 2); n <= horizon; ++n) m = std::min(m, f(n));
  return m;
}

std::optional<long> first_monotonicity_violation(const NormSeq& a, long horizon) {
  double prev = a(1);
  for (long n = 2; n <= horizon; ++n) {
    const double cur = a(n);
    if (cur < prev) return n - 1;
    prev = cur;
  }
  return std::nullopt;
}

RegularityReport check_condition_a_criteria(const WeightSeq& w, long horizon) {
  if (horizon < 4) throw std::invalid_argument("check_condition_a_criteria: horizon must be >= 4");
  RegularityReport rep;
  rep.condition = "condition_a_criteria";
  rep.horizon = horizon;

  double dyadic = 1.0;
  for (long hi = 2; hi <= horizon; hi *= 2) {
    const long lo = hi / 2;
    for (long k = lo; k < hi; ++k) {
      dyadic = std::max(dyadic, w(k) / w(lo));
      dyadic = std::max(dyadic, w(hi) / w(k));
    }
  }
  auto n_tau = [&w](long n) { return static_cast<double>(n) * w(n); };

  if (const auto& fam = w.family()) {
    if (fam->trend() != Trend::ToZero) {
      rep.verdict = RegVerdict::CertifiedPass;
      rep.limit = fam->trend() == Trend::Constant ? fam->scale() : kInf;
      rep.notes.push_back("liminf tau_n > 0 from family closed form");
      return rep;
    }
    const RegVar nt = *fam * RegVar::power(1.0);
    if (nt.trend() != Trend::ToZero) {
      rep.verdict = RegVerdict::CertifiedPass;
      rep.limit = nt.trend() == Trend::Constant ? nt.scale() : kInf;
      if (!fam->has_slow_part()) {
        // (k / 2^{j-1})^beta and (2^j / k)^beta are at most max(1, 2^beta).
        rep.C = std::max(1.0, std::pow(2.0, fam->index()));
      } else {
        rep.C = dyadic;
        rep.notes.push_back("dyadic constant finite for slowly varying factors; value measured over horizon");
      }
      rep.notes.push_back("liminf n tau_n > 0 and dyadic sandwich from family closed form");
      return rep;
    }
    rep.verdict = RegVerdict::Inconclusive;
    rep.limit = 0.0;
    rep.notes.push_back("liminf tau_n = 0 and liminf n tau_n = 0 analytically; criteria not met");
    return rep;
  }

  if (empirically_positive([&w](long n) { return w(n); }, horizon)) {
    rep.verdict = RegVerdict::EmpiricalPass;
    rep.limit = empirical_liminf([&w](long n) { return w(n); }, horizon);
    rep.notes.push_back("liminf tau_n > 0 over horizon");
    return rep;
  }
  if (empirically_positive(n_tau, horizon) && std::isfinite(dyadic)) {
    rep.verdict = RegVerdict::EmpiricalPass;
    rep.limit = empirical_liminf(n_tau, horizon);
    rep.C = dyadic;
    rep.notes.push_back("liminf n tau_n > 0 and dyadic sandwich over horizon");
    return rep;
  }
  rep.verdict = RegVerdict::Inconclusive;
  rep.notes.push_back("criteria not observed over horizon");
  return rep;
}

RegularityReport check_tail_weight_cond(const WeightSeq& w, const NormSeq& b, double theta, double nu,
                                        long horizon) {
  if (theta < 1.0) throw std::invalid_argument("tail weight condition: theta must be >= 1");
  if (horizon < 4) throw std::invalid_argument("tail weight condition: horizon must be >= 4");
  RegularityReport rep;
  rep.condition = "tail_weight_cond(nu=" + std::to_string(nu) + ")";
  rep.horizon = horizon;
  rep.theta = theta;

  const double pw = nu * theta;
  bool certified_tail = false;
  double log_rem = -kInf;
  std::optional<double> limit;

  if (w.family() && b.family()) {
    const RegVar& tau = *w.family();
    const RegVar g = RegVar::power(theta) * tau * b.family()->pow(-pw);
    if (g.summability() == Summability::Diverges) {
      rep.verdict = RegVerdict::CertifiedFail;
      rep.notes.push_back("tail sum diverges: summand ~ " + g.describe());
      return rep;
    }
    const double beta = tau.index();
    if (std::fabs(g.index() + 1.0) <= kTol && beta + 2.0 > 0.0) {
      rep.verdict = RegVerdict::CertifiedFail;
      rep.notes.push_back("critical summand index -1: left side outgrows sum_{k<n} k tau_k");
      return rep;
    }
    limit = beta + 2.0 > 0.0 ? (beta + 2.0) / (-g.index() - 1.0) : 0.0;
    if (auto r = g.tail_bound(static_cast<double>(horizon + 1))) {
      certified_tail = true;
      log_rem = *r > 0.0 ? std::log(*r) : -kInf;
    } else {
      rep.notes.push_back("Potter remainder not yet valid at horizon");
    }
  } else {
    rep.notes.push_back("no analytic tail bound for custom family; sum truncated at horizon");
  }

  const auto lt = log_values(w, horizon);
  const auto lb = log_values(b, horizon);
  const auto T = partial_weight_sums(w, horizon);

  std::vector<double> suffix(static_cast<size_t>(horizon) + 2, -kInf);
  suffix[static_cast<size_t>(horizon) + 1] = log_rem;
  for (long k = horizon; k >= 1; --k) {
    const auto i = static_cast<size_t>(k);
    const double lf = theta * std::log(static_cast<double>(k)) + lt[i] - pw * lb[i];
    suffix[i] = log_add_exp(lf, suffix[i + 1]);
  }

  long first = 2;
  while (first <= horizon && T[static_cast<size_t>(first) - 1] <= 0.0) ++first;
  double C = 0.0;
  for (long n = first; n <= horizon; ++n) {
    const auto i = static_cast<size_t>(n);
    const double lhs = pw * lb[i] + (1.0 - theta) * std::log(static_cast<double>(n)) + suffix[i];
    C = std::max(C, std::exp(lhs - std::log(T[i - 1])));
  }
  rep.C = C;
  rep.N = first;
  rep.limit = limit;
  if (certified_tail) {
    rep.verdict = RegVerdict::CertifiedPass;
    rep.notes.push_back("finite sum to horizon plus certified Potter remainder; asymptotic ratio from Karamata");
  } else {
    rep.verdict = RegVerdict::Inconclusive;
  }
  return rep;
}

RegularityReport check_aux_cond(const WeightSeq& w, const NormSeq& a, double theta, AuxForm form,
                                long horizon) {
  const double nu = form == AuxForm::Cubic ? 3.0 : 2.0;
  auto rep = check_tail_weight_cond(w, a, theta, nu, horizon);
  rep.condition = form == AuxForm::Cubic ? "aux_cond_3theta" : "aux_cond_2theta";
  return rep;
}

RegularityReport check_growth_ratio_cond(const WeightSeq& w, const NormSeq& b, double nu,
                                         long horizon) {
  if (horizon < 4) throw std::invalid_argument("growth ratio condition: horizon must be >= 4");
  RegularityReport rep;
  rep.condition = "growth_ratio_cond(nu=" + std::to_string(nu) + ")";
  rep.horizon = horizon;

  const auto lb = log_values(b, horizon);
  const auto T = partial_weight_sums(w, horizon);
  // suffix minimum of ln(b_k^nu / k)
  std::vector<double> smin(static_cast<size_t>(horizon) + 2, kInf);
  for (long k = horizon; k >= 1; --k) {
    const auto i = static_cast<size_t>(k);
    smin[i] = std::min(smin[i + 1], nu * lb[i] - std::log(static_cast<double>(k)));
  }
  auto q = [&](long n) {
    const auto i = static_cast<size_t>(n);
    return std::exp(smin[i] - nu * lb[i]) * T[i - 1];
  };
  const double est = empirical_liminf(q, horizon);
  rep.limit = est;

  if (w.family() && b.family()) {
    const RegVar h = b.family()->pow(nu) * RegVar::power(-1.0);
    if (h.trend() == Trend::ToZero) {
      rep.verdict = RegVerdict::CertifiedFail;
      rep.notes.push_back("b_k^nu / k -> 0, so the infimum over k >= n vanishes");
      return rep;
    }
    const RegVar& tau = *w.family();
    const RegVar nt = tau * RegVar::power(1.0);
    if (tau.index() + 2.0 > 0.0 && nt.trend() != Trend::ToZero) {
      rep.verdict = RegVerdict::CertifiedPass;
      rep.notes.push_back("b_k^nu / k eventually nondecreasing; infimum at k = n and liminf T_{n-1}/n > 0");
    } else {
      rep.verdict = RegVerdict::CertifiedFail;
      rep.notes.push_back("T_{n-1}/n -> 0 from family closed form");
    }
    return rep;
  }
  if (est > 0.0 && empirically_positive(q, horizon)) {
    rep.verdict = RegVerdict::EmpiricalPass;
  } else {
    rep.verdict = RegVerdict::Inconclusive;
  }
  return rep;
}

RegularityReport check_aux_aux_cond(const WeightSeq& w, const NormSeq& a, AuxForm form, long horizon) {
  auto rep = check_growth_ratio_cond(w, a, form == AuxForm::Cubic ? 3.0 : 2.0, horizon);
  rep.condition = form == AuxForm::Cubic ? "aux_aux_cond_3" : "aux_aux_cond_2";
  return rep;
}

std::optional<double> find_aux_theta(const WeightSeq& w, const NormSeq& a, AuxForm form, long horizon,
                                     int max_theta) {
  for (int t = 1; t <= max_theta; ++t) {
    if (check_aux_cond(w, a, t, form, horizon).passed()) return static_cast<double>(t);
  }
  return std::nullopt;
}

}  // namespace ccl
