#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ccl/dist.hpp"
#include "ccl/seqkit.hpp"

namespace ccl {

enum class SeriesVerdict { ConvergesCertified, DivergesCertified, Undetermined };
std::string to_string(SeriesVerdict v);
SeriesVerdict series_verdict_from_string(const std::string& s);

// Dominating envelopes (certify convergence) and minorants (certify
// divergence). Each claims a termwise bound for n >= start.

/// term_n <= coef * n^(-p), p > 1.
struct PowerEnvelope {
  double coef = 1.0;
  double p = 2.0;
  long start = 1;
};
/// term_n <= coef * n^beta * exp(-c n^kappa), c, kappa > 0.
struct StretchedExpEnvelope {
  double coef = 1.0;
  double beta = 0.0;
  double c = 1.0;
  double kappa = 1.0;
  long start = 1;
};
/// term_n <= coef / (n (ln n)^q), q > 1, start >= 2.
struct LogPowerEnvelope {
  double coef = 1.0;
  double q = 2.0;
  long start = 2;
};
/// term_n = 0 for n > last.
struct FiniteSupport {
  long last = 0;
};
/// term_n >= coef * n^q with q >= -1.
struct PowerMinorant {
  double coef = 1.0;
  double q = -1.0;
  long start = 1;
};
/// Infinitely many disjoint blocks each contributing >= delta; `blocks`
/// counts the machine-checked ones.
struct BlockLowerBound {
  double delta = 1.0;
  int blocks = 0;
  std::string source;
};

using Certificate = std::variant<PowerEnvelope, StretchedExpEnvelope, LogPowerEnvelope, FiniteSupport,
                                 PowerMinorant, BlockLowerBound>;

bool certifies_convergence(const Certificate& c);
/// Upper bound on sum_{n > N} term_n implied by a convergence certificate.
double envelope_tail(const Certificate& c, long N);
/// Bound value at n (envelope or minorant); nullopt for block certificates.
std::optional<double> certificate_value(const Certificate& c, long n);
std::string describe(const Certificate& c);

struct SeriesRow {
  long n = 0;
  double term = 0.0;
  double partial_sum = 0.0;
  double weight = 1.0;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<double> exact;
};

struct SeriesReport {
  std::string series_id;
  nlohmann::json params = nlohmann::json::object();
  std::vector<SeriesRow> rows;
  /// Certified bound on the sum over n beyond the last row.
  std::optional<double> tail_bound;
  SeriesVerdict verdict = SeriesVerdict::Undetermined;
  std::vector<std::string> evidence;
  std::optional<Certificate> certificate;

  double total() const { return rows.empty() ? 0.0 : rows.back().partial_sum; }
};

/// Dense series n = first..horizon with compensated left-to-right partial
/// sums. A certificate is attached only if every computed term respects
/// it; otherwise the verdict is Undetermined and the violation recorded.
SeriesReport series_verdict(const std::string& id, const std::function<double(long)>& term, long horizon,
                            std::optional<Certificate> cert = std::nullopt, long first = 1);

/// Re-checks a report's rows against a certificate and updates the verdict.
void attach_certificate(SeriesReport& r, const Certificate& cert);

nlohmann::json to_json(const SeriesReport& r);
SeriesReport series_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Certificate& c);
Certificate certificate_from_json(const nlohmann::json& j);
/// Columns n,term,partial_sum,ci_lo,ci_hi,exact.
std::string to_csv(const SeriesReport& r);

// Series terms.

/// n tau_n P(|X| >= eps a_n).
double term_ii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long n);
/// tau_n exp(-eps^2 a_n^2 / (n T_{eps,n})); the exponential is 0 when T = 0.
double term_iii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long n);
/// n^(-1 - eps^2 / T_{eps,n}) with cutoff eps (n ln n)^(1/2); 0 when T = 0.
double term_spataru_c(const Dist& d, double eps, long n);
/// tau_n * p_est.
double term_conv(const WeightSeq& w, const NormSeq& a, double eps, long n, double p_est);

/// Series (ii) with a certificate derived from the distribution and the
/// sequence families when one is available.
SeriesReport series_ii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long horizon);
/// Series (iii), certified through T_{eps,n} <= E[X^2].
SeriesReport series_iii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long horizon);
/// Series of the condition sum n^(-1-eps^2/T_{eps,n}).
SeriesReport series_spataru_c(const Dist& d, double eps, long horizon);

/// a_n >= scale * n^index for n >= start, from a family with nonnegative
/// slow powers.
struct PowerLowerBound {
  double scale = 1.0;
  double index = 0.0;
  long start = 1;
};
std::optional<PowerLowerBound> power_lower_bound(const NormSeq& a);

struct NagaevGap {
  long n = 0;
  double gamma = 1.0;
  double eps = 1.0;
  double x = 0.0;
  double p_est = 0.0;
  double lhs_gap = 0.0;
  double rhs_core = 0.0;
  double implied_constant = 0.0;
};

/// Compares p_est ~ P(|S_n(eps)| >= gamma eps a_n) against 2(1 - Phi(x_n)),
/// x_n = gamma eps a_n / (n T_{eps,n})^(1/2). Symmetric d only.
NagaevGap nagaev_gap(const Dist& d, const NormSeq& a, double eps, double gamma, long n, double p_est);

struct HJRow {
  double lambda = 0.0;
  double lhs = 0.0;          // P(|S_n| >= lambda)
  double single_term = 0.0;  // n P(|X| >= lambda/(2r))
  double power_term = 0.0;   // P(|S_n| >= lambda/(2r))^r
};

struct HJProbe {
  int r = 2;
  long n = 0;
  std::vector<HJRow> rows;

  /// Smallest D with lhs <= C single + D power on every row (+inf if none).
  double minimal_D(double C) const;
  /// Smallest C with lhs <= C single + D power on every row.
  double minimal_C(double D) const;
};

/// Exact-oracle probe of the Hoffman-Jorgensen form. Requires a lattice d
/// and n <= 64.
HJProbe hj_constant_probe(const Dist& d, int r, long n, const std::vector<double>& lambdas);

struct ElementaryReport {
  double C = 0.0;  // minimal hypothesis constant over n in [2, horizon]
  double lhs = 0.0;
  double rhs = 0.0;
  double rho_1_term = 0.0;  // rho_1 E[|X|^t 1{|X| < b_1}], reported separately
  bool passed = false;
};

/// Hypothesis: b_n^t sum_{k>=n} rho_k <= C T_{n-1} for 2 <= n <= horizon.
/// Checks sum_{n>=2} rho_n E[|X|^t 1{|X|<b_n}]
///   <= C (tau_1 P(|X| < b_1) + sum_{n<horizon} n tau_n P(|X| >= b_n)).
/// rho[i] is rho_{i+1}; throws if rho.size() > horizon.
ElementaryReport lemma_elementary_check(const Dist& d, const WeightSeq& w, const std::vector<double>& rho,
                                        const NormSeq& b, double t, long horizon);

/// max of p_r over [0,1]^2 where x^r - (x-y)^r = y p_r(x, y); grid search
/// plus local refinement.
double comp_constant(int r);
inline constexpr double kComp2 = 2.0;

struct CompReport {
  double c_r = 0.0;
  double lhs = 0.0;
  double diff_term = 0.0;
  double beta_term = 0.0;
  bool passed = false;
};

/// sum tau_n alpha_n^r <= sum tau_n |alpha_n - beta_n|^r + c_r sum tau_n beta_n.
CompReport lemma_comp_check(const std::vector<double>& alpha, const std::vector<double>& beta,
                            const WeightSeq& w, int r, long horizon, std::optional<double> c_r = std::nullopt);

struct LemmaSeriesReport {
  SeriesReport series;
  RegularityReport tail_hypothesis;
  RegularityReport ratio_hypothesis;
  SeriesReport crit;
  bool finiteness_expected = false;
};

/// sum tau_n (n E[|X|^nu 1{|X|<b_n}] / b_n^nu)^theta.
LemmaSeriesReport lemma_the_lemma_series(const Dist& d, const WeightSeq& w, const NormSeq& b, double nu,
                                         double theta, long horizon);

}  // namespace ccl
