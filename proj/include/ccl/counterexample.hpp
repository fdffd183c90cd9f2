#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccl/dist.hpp"

namespace ccl {

/// Positive extended real in one of three encodings:
/// level 0 stores v, level 1 stores ln v, level 2 stores ln ln v.
struct LogReal {
  int level = 0;
  double payload = 0.0;

  static LogReal from_value(double v) { return {0, v}; }
  /// Level 1 when ln v fits, level 2 otherwise.
  static LogReal from_log(double ln_v) { return {1, ln_v}; }
  static LogReal from_loglog(double lnln_v);

  double value() const;   // may overflow to inf
  double log() const;     // ln v, may overflow to inf at level 2
  double loglog() const;  // ln ln v; requires v > 1
  /// Same value at another level; throws std::domain_error when the target
  /// payload is not representable.
  LogReal to_level(int target) const;
};

bool operator<(const LogReal& a, const LogReal& b);

/// psi(t) = (t ln t)^(1/2) for t >= 2, linear on [0, 2].
double psi(double t);
/// Inverse of psi.
double phi_inverse(double y);
/// ln phi(y) given ln y; for arguments beyond double range.
double log_phi_inverse_from_log(double ln_y);

/// Condition (A) correction bound: ln(K+1)/ln K - 1 <= corr_bound(ln K).
double corr_bound(double lambda);
inline constexpr double kCertSlack = 1e-9;

struct RequiredL {
  double lnln_L = 0.0;
  LogReal L;               // ln L at level 1, or ln ln L at level 2
  int doublings = 0;       // extra factors of 2 needed by the certificate
  double half_tail_gap = 0.0;  // scaled slack of the half-tail inequality
  bool certified = false;
};

/// L(K, m) = 2 (K+1) 2^(1/s), s = 2^m / ln K, with a log-domain check of
///   sum_{K<n<=L} n^(-1-s) >= (1/2) sum_{n>K} n^(-1-s),
/// doubling L until the check passes. K is given through ln ln K.
RequiredL required_L(double lnln_K, int m);
inline RequiredL required_L(const LogReal& lambda_K, int m) { return required_L(lambda_K.log(), m); }

/// K_1 < K_2 < ... stored through ln ln K_m.
struct KSchedule {
  int m_max = 0;
  std::vector<double> lnln_K;  // index m-1
  std::vector<double> margin_A;  // ln of (A) LHS minus required, per m
  std::vector<std::optional<double>> margin_B;  // ln lambda_{m+1} - ln ln L(K_m, m) - slack

  double ln_lambda(int m) const { return lnln_K.at(static_cast<std::size_t>(m - 1)); }
  /// K_m as a LogReal (level 1: ln K = lambda_m, level 2: ln lambda_m).
  LogReal K(int m) const { return LogReal::from_loglog(ln_lambda(m)); }
  /// lambda_m as a LogReal (level 0 or 1).
  LogReal lambda(int m) const;
};

/// ln of the (A) left side minus the required level, for given ln lambda.
double condition_A_margin(double ln_lambda, int m);
/// Minimal ln lambda satisfying (A), by bisection.
double solve_condition_A(int m);
/// Closed form of the (A) root including the correction bound.
double condition_A_closed_form(int m);

/// Throws std::invalid_argument unless 1 <= m_max <= 16.
KSchedule build_schedule(int m_max);
/// Recomputes all margins from the stored K values.
KSchedule replay_schedule(const std::vector<double>& lnln_K);
/// True when every (A) margin and every (B) margin is >= 0.
bool schedule_certified(const KSchedule& s);

nlohmann::json to_json(const KSchedule& s);
KSchedule schedule_from_json(const nlohmann::json& j);

struct MSDistribution {
  KSchedule schedule;

  /// ln P(X = psi(K_m)) = -(m+1) ln 2 - lambda_m (may be -inf).
  double log_atom_weight(int m) const;
  /// ln psi(K_m) as a LogReal (level 1 or 2).
  LogReal atom_magnitude(int m) const;
  /// ln P(|X| >= y); -inf when y exceeds every atom.
  double log_tail(double y) const;
  /// ln of the total atom mass.
  double log_total_mass() const;
  /// Numeric LogAtomicSym model; throws if lambda_m overflows (m >= 10).
  Dist as_dist() const;
};

MSDistribution ms_distribution(const KSchedule& s);

struct PhiMoment {
  double value = 0.0;
  double deficit = 0.0;
  int terms = 0;
  /// max relative error of the numeric round trip phi(psi(K_m)) = K_m over
  /// the schedule, checked in the log domain.
  double numeric_check = 0.0;
};

/// E[phi(|X|)] summed to `truncation` (default m_max) with phi(psi(K)) = K
/// cancelled symbolically; each term is exactly 2^(-m).
PhiMoment phi_moment(const MSDistribution& d, std::optional<int> truncation = std::nullopt);

struct T1n {
  int M = 0;           // max{m : K_m < n}
  double log_T = 0.0;  // ln T_{1,n}
  LogReal T;           // level 0 when representable, else level 1
};

/// T_{1,n} = sum_{m <= M(n)} 2^(-m) lambda_m, from ln ln n.
/// Throws std::invalid_argument when ln n <= lambda_1.
T1n T1n_log(const KSchedule& s, const LogReal& ln_n);

struct CertLink {
  std::string name;
  double lhs_log = 0.0;
  double rhs_log = 0.0;
  bool holds = false;
};

struct BlockCertificate {
  int m = 0;
  bool passed = false;
  std::string failed_at;
  std::vector<CertLink> links;
  /// ln of the certified lower bound on the m-th block of sum n^(-1-1/T_{1,n}).
  double block_bound_log = 0.0;
};

/// Certifies that the block n in (K_m, K_{m+1}] of sum n^(-1-1/T_{1,n})
/// contributes at least 1. Requires 1 <= m < m_max.
BlockCertificate certify_block_divergence(const KSchedule& s, int m);
nlohmann::json to_json(const BlockCertificate& c);

struct MomentBReport {
  PhiMoment phi;
  /// E[X^2 / log+ |X|] through sum 2^(1-m) lambda / (2 log+ psi(K_m)).
  double weighted_moment = 0.0;
  int blocks_certified = 0;
  int blocks_expected = 0;
  bool b_holds = false;
  bool c_fails = false;
  bool a_holds = true;
  std::vector<std::string> notes;
};

MomentBReport check_moment_b(const KSchedule& s);

}  // namespace ccl
