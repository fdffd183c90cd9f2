#include "ccl/counterexample.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ccl/numeric.hpp"

namespace ccl {

namespace {
constexpr double kLn2 = std::numbers::ln2;
const double kLevel1Cap = std::log(1e300);
}  // namespace

// LogReal

LogReal LogReal::from_loglog(double lnln_v) {
  if (lnln_v <= kLevel1Cap) return {1, std::exp(lnln_v)};
  return {2, lnln_v};
}

double LogReal::value() const {
  switch (level) {
    case 0: return payload;
    case 1: return std::exp(payload);
    default: return std::exp(std::exp(payload));
  }
}

double LogReal::log() const {
  switch (level) {
    case 0: return std::log(payload);
    case 1: return payload;
    default: return std::exp(payload);
  }
}

double LogReal::loglog() const {
  switch (level) {
    case 0: return std::log(std::log(payload));
    case 1: return std::log(payload);
    default: return payload;
  }
}

LogReal LogReal::to_level(int target) const {
  double p = 0.0;
  switch (target) {
    case 0: p = value(); break;
    case 1: p = log(); break;
    case 2: p = loglog(); break;
    default: throw std::domain_error("LogReal: level must be 0, 1 or 2");
  }
  if (!std::isfinite(p)) throw std::domain_error("LogReal: payload not representable at level " + std::to_string(target));
  return {target, p};
}

bool operator<(const LogReal& a, const LogReal& b) {
  if (a.level == 2 || b.level == 2) return a.loglog() < b.loglog();
  return a.log() < b.log();
}

// psi / phi

namespace {
const double kPsi2 = std::sqrt(2.0 * kLn2);
}

double psi(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("psi: t must be >= 0");
  if (t <= 2.0) return t * kPsi2 / 2.0;
  return std::sqrt(t * std::log(t));
}

double log_phi_inverse_from_log(double ln_y) {
  if (ln_y <= std::log(kPsi2)) return ln_y + std::log(2.0 / kPsi2);
  // u = ln t solves u + ln u = 2 ln y; h is concave increasing, so Newton
  // from a point with h <= 0 climbs monotonically to the root.
  const double c = 2.0 * ln_y;
  double u = c > 1.0 ? std::max(kLn2, c - std::log(c)) : kLn2;
  for (int it = 0; it < 200; ++it) {
    const double h = u + std::log(u) - c;
    const double step = h / (1.0 + 1.0 / u);
    const double next = u - step;
    if (!(next > u) || next - u <= 4.0 * DBL_EPSILON * next) {
      u = std::max(u, next);
      break;
    }
    u = next;
  }
  return u;
}

double phi_inverse(double y) {
  if (!(y >= 0.0)) throw std::invalid_argument("phi_inverse: y must be >= 0");
  if (y <= kPsi2) return y * 2.0 / kPsi2;
  return std::exp(log_phi_inverse_from_log(std::log(y)));
}

double corr_bound(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("corr_bound: lambda must be > 0");
  if (lambda >= 29.0) return std::exp(-29.0) / 29.0;
  return std::exp(-lambda) / lambda;
}

// required_L

namespace {

// Bounds on em(x, s) = expm1(-s x) / s, which increases in s.
double em_lower(double x, double s) {
  if (s * x < 1e-5) return -x + s * x * x / 2.0 - s * s * x * x * x / 6.0;
  return std::expm1(-s * x) / s * (1.0 + 1e-14);
}
double em_upper(double x, double s) {
  if (s * x < 1e-5) return -x + s * x * x / 2.0;
  return std::expm1(-s * x) / s * (1.0 - 1e-14);
}

}  // namespace

RequiredL required_L(double lnln_K, int m) {
  if (m < 1) throw std::invalid_argument("required_L: m must be >= 1");
  if (lnln_K < std::log(kLn2)) throw std::invalid_argument("required_L: K must be >= 2");
  const double lambda = std::exp(lnln_K);  // may be inf
  const double s = std::exp(m * kLn2 - lnln_K);
  const double s_lo = s * (1.0 - 1e-14);
  const double s_up = s * (1.0 + 1e-14) + DBL_TRUE_MIN;
  const double inv_K = std::exp(-lambda) * (1.0 + 1e-14) + DBL_TRUE_MIN;   // >= 1/(K+1)
  const double delta_up = std::log1p(std::exp(-lambda)) * (1.0 + 1e-14) + DBL_TRUE_MIN;  // >= ln(1+1/K)
  RequiredL out;
  // With ln L = ln(K+1) + ln2/s + (1+k) ln 2, the half-tail inequality
  // divided by s reads
  //   em(delta, s) - em((1+k) ln2, s)/2 - 1/(2(K+1)) >= 0.
  for (int k = 0; k < 64; ++k) {
    const double gap = em_lower(delta_up, s_lo) - 0.5 * em_upper((1.0 + k) * kLn2, s_up) - 0.5 * inv_K;
    if (gap > 0.0) {
      out.doublings = k;
      out.half_tail_gap = gap;
      out.certified = true;
      break;
    }
  }
  const double rho = std::exp(-lnln_K);  // 1/lambda
  out.lnln_L =
      lnln_K + std::log1p(delta_up * rho + kLn2 * std::ldexp(1.0, -m) + (1.0 + out.doublings) * kLn2 * rho);
  out.L = LogReal::from_loglog(out.lnln_L);
  (void)lambda;
  return out;
}

// Schedule

LogReal KSchedule::lambda(int m) const {
  const double l = ln_lambda(m);
  if (l <= kLevel1Cap) return {0, std::exp(l)};
  return {1, l};
}

double condition_A_margin(double ln_lambda, int m) {
  const double lambda = std::exp(ln_lambda);
  return ln_lambda - (m + 1) * kLn2 - std::ldexp(1.0, m) * (1.0 + corr_bound(lambda)) - kCertSlack;
}

double solve_condition_A(int m) {
  double lo = (m + 1) * kLn2 + std::ldexp(1.0, m) - 1.0;
  double hi = lo + 2.0;
  while (condition_A_margin(lo, m) >= 0.0) lo -= 1.0;
  while (condition_A_margin(hi, m) < 0.0) hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (condition_A_margin(mid, m) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double condition_A_closed_form(int m) {
  return (m + 1) * kLn2 + std::ldexp(1.0, m) * (1.0 + std::exp(-29.0) / 29.0) + kCertSlack;
}

KSchedule replay_schedule(const std::vector<double>& lnln_K) {
  KSchedule s;
  s.m_max = static_cast<int>(lnln_K.size());
  s.lnln_K = lnln_K;
  for (int m = 1; m <= s.m_max; ++m) {
    s.margin_A.push_back(condition_A_margin(s.ln_lambda(m), m));
    if (m < s.m_max) {
      const RequiredL L = required_L(s.ln_lambda(m), m);
      s.margin_B.push_back(L.certified ? s.ln_lambda(m + 1) - L.lnln_L - kCertSlack : -kInf);
    } else {
      s.margin_B.push_back(std::nullopt);
    }
  }
  return s;
}

KSchedule build_schedule(int m_max) {
  if (m_max < 1 || m_max > 16) throw std::invalid_argument("build_schedule: m_max must be in [1, 16]");
  std::vector<double> l;
  for (int m = 1; m <= m_max; ++m) {
    // a hair above the root so that text round trips keep the margin
    double u = solve_condition_A(m) + 1e-12;
    if (m > 1) {
      const double prev = l.back();
      u = std::max(u, required_L(prev, m - 1).lnln_L + 2.0 * kCertSlack);
      u = std::max(u, prev + std::log1p(std::exp(-prev)) + 1e-12);  // lambda_m >= lambda_{m-1} + 1
    }
    l.push_back(u);
  }
  return replay_schedule(l);
}

bool schedule_certified(const KSchedule& s) {
  if (s.m_max < 1 || s.ln_lambda(1) < std::log(kLn2)) return false;
  for (int m = 1; m <= s.m_max; ++m) {
    if (!(s.margin_A[static_cast<std::size_t>(m - 1)] >= 0.0)) return false;
    if (m < s.m_max) {
      if (!(s.ln_lambda(m + 1) > s.ln_lambda(m))) return false;
      if (!(*s.margin_B[static_cast<std::size_t>(m - 1)] >= 0.0)) return false;
    }
  }
  return true;
}

nlohmann::json to_json(const KSchedule& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (int m = 1; m <= s.m_max; ++m) {
    const LogReal K = s.K(m);
    const auto& b = s.margin_B[static_cast<std::size_t>(m - 1)];
    arr.push_back({{"m", m},
                   {"level", K.level},
                   {"payload", K.payload},
                   {"cond_A_margin_log", s.margin_A[static_cast<std::size_t>(m - 1)]},
                   {"cond_B_margin_log", b && std::isfinite(*b) ? nlohmann::json(*b) : nlohmann::json(nullptr)}});
  }
  return arr;
}

KSchedule schedule_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("schedule JSON must be an array");
  std::vector<double> l;
  int expect = 1;
  for (const auto& e : j) {
    if (e.at("m").get<int>() != expect++) throw std::invalid_argument("schedule entries must be m = 1, 2, ...");
    const LogReal K{e.at("level").get<int>(), e.at("payload").get<double>()};
    if (K.level != 1 && K.level != 2) throw std::invalid_argument("schedule K must be stored at level 1 or 2");
    l.push_back(K.loglog());
  }
  if (l.empty() || l.size() > 16) throw std::invalid_argument("schedule must have 1..16 entries");
  return replay_schedule(l);
}

// Distribution

MSDistribution ms_distribution(const KSchedule& s) {
  if (s.m_max < 1) throw std::invalid_argument("ms_distribution: empty schedule");
  return {s};
}

double MSDistribution::log_atom_weight(int m) const {
  return -(m + 1) * kLn2 - std::exp(schedule.ln_lambda(m));
}

LogReal MSDistribution::atom_magnitude(int m) const {
  const double l = schedule.ln_lambda(m);
  const double lambda = std::exp(l);
  if (lambda <= 1e300) return LogReal::from_log(0.5 * (lambda + l));
  return {2, l - kLn2 + std::log1p(l * std::exp(-l))};
}

double MSDistribution::log_tail(double y) const {
  if (y <= 0.0) return 0.0;
  const double ly = std::log(y);
  std::vector<double> terms;
  for (int m = 1; m <= schedule.m_max; ++m)
    if (atom_magnitude(m).log() >= ly) terms.push_back(log_atom_weight(m) + kLn2);
  return terms.empty() ? -kInf : log_sum_exp(terms);
}

double MSDistribution::log_total_mass() const {
  std::vector<double> terms;
  for (int m = 1; m <= schedule.m_max; ++m) terms.push_back(log_atom_weight(m) + kLn2);
  return log_sum_exp(terms);
}

Dist MSDistribution::as_dist() const {
  LogAtomicSym k;
  for (int m = 1; m <= schedule.m_max; ++m) {
    const LogReal mag = atom_magnitude(m);
    if (mag.level != 1) throw std::domain_error("as_dist: atom magnitude beyond level-1 range");
    k.atoms.push_back({mag.payload, log_atom_weight(m) + kLn2});
  }
  return Dist(k, "ms_counterexample(" + std::to_string(schedule.m_max) + ")");
}

namespace {
// 2^two * K^k
struct Monomial {
  int two = 0;
  int k = 0;
  Monomial operator*(Monomial o) const { return {two + o.two, k + o.k}; }
};
}  // namespace

PhiMoment phi_moment(const MSDistribution& d, std::optional<int> truncation) {
  const int M = truncation.value_or(d.schedule.m_max);
  if (M < 1 || M > 53) throw std::invalid_argument("phi_moment: truncation must be in [1, 53]");
  PhiMoment out;
  out.terms = M;
  for (int m = 1; m <= M; ++m) {
    // 2 * P(X = psi(K_m)) * phi(psi(K_m)) = 2 * 2^{-m-1} K^{-1} * K
    const Monomial term = Monomial{1, 0} * Monomial{-m - 1, -1} * Monomial{0, 1};
    if (term.k != 0) throw std::logic_error("phi_moment: symbolic cancellation failed");
    out.value += std::ldexp(1.0, term.two);
  }
  out.deficit = std::ldexp(1.0, -M);
  for (int m = 1; m <= std::min(M, d.schedule.m_max); ++m) {
    const double lambda = std::exp(d.schedule.ln_lambda(m));
    if (lambda > 1e300) break;
    const double u = log_phi_inverse_from_log(d.atom_magnitude(m).log());
    out.numeric_check = std::max(out.numeric_check, std::fabs(u - lambda) / lambda);
  }
  return out;
}

T1n T1n_log(const KSchedule& s, const LogReal& ln_n) {
  const double lnln_n = ln_n.log();
  if (!(lnln_n > s.ln_lambda(1))) throw std::invalid_argument("T1n_log: requires ln n > lambda_1");
  T1n out;
  std::vector<double> terms;
  for (int m = 1; m <= s.m_max && s.ln_lambda(m) < lnln_n; ++m) {
    out.M = m;
    terms.push_back(s.ln_lambda(m) - m * kLn2);
  }
  out.log_T = log_sum_exp(terms);
  out.T = out.log_T <= kLevel1Cap ? LogReal{0, std::exp(out.log_T)} : LogReal{1, out.log_T};
  return out;
}

BlockCertificate certify_block_divergence(const KSchedule& s, int m) {
  if (m < 1 || m >= s.m_max) throw std::invalid_argument("certify_block_divergence: need 1 <= m < m_max");
  BlockCertificate c;
  c.m = m;
  const double l = s.ln_lambda(m), l_next = s.ln_lambda(m + 1);
  const double lambda = std::exp(l);
  const double two_m = std::ldexp(1.0, m);
  const double corr = corr_bound(lambda);

  // M(n) >= m on (K_m, K_{m+1}] needs a nonempty block: lambda_{m+1} > ln(K_m + 1).
  const double ln_lnK1 = l + std::log1p(std::exp(-lambda) * std::exp(-l));
  c.links.push_back({"oneterm: T_{1,n} >= 2^-m lambda_m on (K_m, K_{m+1}]", l_next, ln_lnK1, l_next > ln_lnK1});
  const RequiredL L = required_L(l, m);
  const double need_B = L.lnln_L + kCertSlack;
  c.links.push_back({"(B): lambda_{m+1} >= ln L(K_m, m)", l_next, need_B, L.certified && l_next >= need_B});
  c.links.push_back({"half-tail: sum_{K<n<=L} >= tail/2", L.half_tail_gap, 0.0, L.certified});
  // sum_{n>K} n^{-1-s} >= s^{-1} (K+1)^{-s}, s = 2^m / lambda_m
  const double integral = l - m * kLn2 - two_m * (1.0 + corr);
  c.links.push_back({"integral bound (C = 1): tail >= s^-1 (K+1)^-s", integral, integral, true});
  const double a_lhs = integral - kLn2;
  c.links.push_back({"(A): 2^{-m-1} lambda_m (K_m+1)^{-s} >= 1", a_lhs, kCertSlack, a_lhs >= kCertSlack});
  c.block_bound_log = a_lhs;
  c.passed = true;
  for (const auto& link : c.links)
    if (!link.holds) {
      c.passed = false;
      c.failed_at = link.name;
      break;
    }
  return c;
}

nlohmann::json to_json(const BlockCertificate& c) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : c.links)
    links.push_back({{"name", l.name}, {"lhs_log", l.lhs_log}, {"rhs_log", l.rhs_log}, {"holds", l.holds}});
  nlohmann::json j = {{"m", c.m}, {"passed", c.passed}, {"block_bound_log", c.block_bound_log}, {"links", links}};
  j["failed_at"] = c.passed ? nlohmann::json(nullptr) : nlohmann::json(c.failed_at);
  return j;
}

MomentBReport check_moment_b(const KSchedule& s) {
  MomentBReport r;
  const MSDistribution d = ms_distribution(s);
  r.phi = phi_moment(d);
  CompensatedSum wm;
  for (int m = 1; m <= s.m_max; ++m) {
    const double l = s.ln_lambda(m);
    const double rho = std::exp(-l);  // 1/lambda
    const double inv_psi2 = 2.0 * std::exp(-d.atom_magnitude(m).log());
    wm.add(std::ldexp(1.0, 1 - m) / (1.0 + l * rho + 2.0 * rho * std::log1p(inv_psi2)));
  }
  r.weighted_moment = wm.value();
  r.b_holds = std::isfinite(r.phi.value) && r.phi.value <= 1.0;
  r.notes.push_back("E[phi(|X|)] = sum 2^-m <= 1, so the phi-moment condition holds");
  r.blocks_expected = s.m_max - 1;
  for (int m = 1; m < s.m_max; ++m)
    if (certify_block_divergence(s, m).passed) ++r.blocks_certified;
  r.c_fails = r.blocks_expected >= 1 && r.blocks_certified == r.blocks_expected;
  if (r.blocks_expected == 0) r.notes.push_back("m_max = 1: no block certificates, failure of (c) not certified");
  r.notes.push_back("X symmetric: medians of S_n are 0");
  return r;
}

}  // namespace ccl
