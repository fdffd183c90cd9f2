#include "ccl/convergence.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "ccl/mcengine.hpp"
#include "ccl/normal.hpp"

namespace ccl {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kRelSlack = 1e-12;
}  // namespace

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::ConvergesCertified: return "ConvergesCertified";
    case SeriesVerdict::DivergesCertified: return "DivergesCertified";
    case SeriesVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

SeriesVerdict series_verdict_from_string(const std::string& s) {
  if (s == "ConvergesCertified") return SeriesVerdict::ConvergesCertified;
  if (s == "DivergesCertified") return SeriesVerdict::DivergesCertified;
  if (s == "Undetermined") return SeriesVerdict::Undetermined;
  throw std::invalid_argument("unknown verdict: " + s);
}

bool certifies_convergence(const Certificate& c) {
  return !std::holds_alternative<PowerMinorant>(c) && !std::holds_alternative<BlockLowerBound>(c);
}

namespace {

long cert_start(const Certificate& c) {
  return std::visit(overloaded{[](const FiniteSupport& f) { return f.last + 1; },
                               [](const BlockLowerBound&) { return 1L; },
                               [](const auto& e) { return e.start; }},
                    c);
}

double stretched_exp_tail(const StretchedExpEnvelope& e, long N) {
  const auto f = [&](double x) { return e.coef * std::pow(x, e.beta) * std::exp(-e.c * std::pow(x, e.kappa)); };
  // f decreases beyond x*; add the terms before that explicitly.
  const double xstar = e.beta > 0.0 ? std::pow(e.beta / (e.c * e.kappa), 1.0 / e.kappa) : 0.0;
  long m = std::max(N + 1, e.start);
  CompensatedSum s;
  while (static_cast<double>(m) < xstar) s.add(f(static_cast<double>(m++)));
  s.add(f(static_cast<double>(m)));
  // int_m^inf x^b e^{-c x^k} dx = c^{-a} Gamma(a, c m^k) / k with a = (b+1)/k;
  // raising b (x >= 1) keeps a positive.
  const double a = std::max((e.beta + 1.0) / e.kappa, 0.5);
  const double z = e.c * std::pow(static_cast<double>(m), e.kappa);
  s.add(e.coef * std::pow(e.c, -a) * boost::math::tgamma(a, z) / e.kappa);
  return s.value();
}

}  // namespace

double envelope_tail(const Certificate& c, long N) {
  if (N + 1 < cert_start(c)) return kInf;
  return std::visit(
      overloaded{
          [&](const PowerEnvelope& e) {
            const double n = static_cast<double>(N);
            return e.coef * std::pow(n, 1.0 - e.p) / (e.p - 1.0);
          },
          [&](const StretchedExpEnvelope& e) { return stretched_exp_tail(e, N); },
          [&](const LogPowerEnvelope& e) {
            const double l = std::log(static_cast<double>(std::max(N, 2L)));
            return e.coef * std::pow(l, 1.0 - e.q) / (e.q - 1.0);
          },
          [&](const FiniteSupport&) { return 0.0; },
          [&](const auto&) { return kInf; },
      },
      c);
}

std::optional<double> certificate_value(const Certificate& c, long n) {
  const double x = static_cast<double>(n);
  return std::visit(
      overloaded{
          [&](const PowerEnvelope& e) -> std::optional<double> { return e.coef * std::pow(x, -e.p); },
          [&](const StretchedExpEnvelope& e) -> std::optional<double> {
            return e.coef * std::pow(x, e.beta) * std::exp(-e.c * std::pow(x, e.kappa));
          },
          [&](const LogPowerEnvelope& e) -> std::optional<double> {
            return e.coef / (x * std::pow(std::log(x), e.q));
          },
          [&](const FiniteSupport& f) -> std::optional<double> {
            if (n > f.last) return 0.0;
            return std::nullopt;
          },
          [&](const PowerMinorant& m) -> std::optional<double> { return m.coef * std::pow(x, m.q); },
          [&](const BlockLowerBound&) -> std::optional<double> { return std::nullopt; },
      },
      c);
}

std::string describe(const Certificate& c) {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&](const PowerEnvelope& e) { os << "term <= " << e.coef << " n^-" << e.p << " for n >= " << e.start; },
                 [&](const StretchedExpEnvelope& e) {
                   os << "term <= " << e.coef << " n^" << e.beta << " exp(-" << e.c << " n^" << e.kappa
                      << ") for n >= " << e.start;
                 },
                 [&](const LogPowerEnvelope& e) {
                   os << "term <= " << e.coef << " / (n (ln n)^" << e.q << ") for n >= " << e.start;
                 },
                 [&](const FiniteSupport& f) { os << "term = 0 for n > " << f.last; },
                 [&](const PowerMinorant& m) { os << "term >= " << m.coef << " n^" << m.q << " for n >= " << m.start; },
                 [&](const BlockLowerBound& b) {
                   os << b.blocks << " certified blocks each >= " << b.delta << " (" << b.source << ")";
                 },
             },
             c);
  return os.str();
}

void attach_certificate(SeriesReport& r, const Certificate& cert) {
  if (const auto* b = std::get_if<BlockLowerBound>(&cert)) {
    if (b->blocks < 1 || !(b->delta > 0.0)) {
      r.evidence.push_back("block certificate rejected: no certified block");
      return;
    }
    r.certificate = cert;
    r.verdict = SeriesVerdict::DivergesCertified;
    r.evidence.push_back(describe(cert));
    return;
  }
  const bool upper = certifies_convergence(cert);
  const long start = cert_start(cert);
  for (const auto& row : r.rows) {
    if (row.n < start) continue;
    const auto v = certificate_value(cert, row.n);
    if (!v) continue;
    const bool ok = upper ? row.term <= *v * (1.0 + kRelSlack) : row.term >= *v * (1.0 - kRelSlack);
    if (!ok) {
      std::ostringstream os;
      os.precision(17);
      os << "certificate '" << describe(cert) << "' violated at n=" << row.n << ": term " << row.term
         << (upper ? " > " : " < ") << *v;
      r.evidence.push_back(os.str());
      r.verdict = SeriesVerdict::Undetermined;
      r.certificate.reset();
      r.tail_bound.reset();
      return;
    }
  }
  r.certificate = cert;
  r.evidence.push_back(describe(cert));
  if (upper) {
    r.verdict = SeriesVerdict::ConvergesCertified;
    bool dense = !r.rows.empty();
    for (std::size_t i = 1; i < r.rows.size(); ++i) dense = dense && r.rows[i].n == r.rows[i - 1].n + 1;
    if (dense) {
      const double t = envelope_tail(cert, r.rows.back().n);
      if (std::isfinite(t)) r.tail_bound = t;
    }
  } else {
    r.verdict = SeriesVerdict::DivergesCertified;
  }
}

SeriesReport series_verdict(const std::string& id, const std::function<double(long)>& term, long horizon,
                            std::optional<Certificate> cert, long first) {
  if (horizon < first) throw std::invalid_argument("series_verdict: horizon below first index");
  SeriesReport r;
  r.series_id = id;
  // Extend past the horizon when needed so the envelope tail starts right
  // after the last computed row.
  const long last = cert && certifies_convergence(*cert) ? std::max(horizon, cert_start(*cert) - 1) : horizon;
  CompensatedSum ps;
  for (long n = first; n <= last; ++n) {
    const double t = term(n);
    if (!(t >= 0.0)) throw std::invalid_argument("series_verdict: negative or NaN term at n=" + std::to_string(n));
    ps.add(t);
    r.rows.push_back({n, t, ps.value(), 1.0, std::nullopt, std::nullopt, std::nullopt});
  }
  r.params["horizon"] = last;
  if (cert) attach_certificate(r, *cert);
  if (!r.certificate) r.evidence.push_back("partial sums only; no analytic envelope registered");
  return r;
}

// JSON / CSV.

nlohmann::json to_json(const Certificate& c) {
  return std::visit(
      overloaded{
          [](const PowerEnvelope& e) -> nlohmann::json {
            return {{"kind", "power_envelope"}, {"coef", e.coef}, {"p", e.p}, {"start", e.start}};
          },
          [](const StretchedExpEnvelope& e) -> nlohmann::json {
            return {{"kind", "stretched_exp_envelope"}, {"coef", e.coef}, {"beta", e.beta}, {"c", e.c},
                    {"kappa", e.kappa}, {"start", e.start}};
          },
          [](const LogPowerEnvelope& e) -> nlohmann::json {
            return {{"kind", "log_power_envelope"}, {"coef", e.coef}, {"q", e.q}, {"start", e.start}};
          },
          [](const FiniteSupport& f) -> nlohmann::json { return {{"kind", "finite_support"}, {"last", f.last}}; },
          [](const PowerMinorant& m) -> nlohmann::json {
            return {{"kind", "power_minorant"}, {"coef", m.coef}, {"q", m.q}, {"start", m.start}};
          },
          [](const BlockLowerBound& b) -> nlohmann::json {
            return {{"kind", "block_lower_bound"}, {"delta", b.delta}, {"blocks", b.blocks}, {"source", b.source}};
          },
      },
      c);
}

Certificate certificate_from_json(const nlohmann::json& j) {
  const std::string k = j.at("kind");
  if (k == "power_envelope") return PowerEnvelope{j.at("coef"), j.at("p"), j.at("start")};
  if (k == "stretched_exp_envelope")
    return StretchedExpEnvelope{j.at("coef"), j.at("beta"), j.at("c"), j.at("kappa"), j.at("start")};
  if (k == "log_power_envelope") return LogPowerEnvelope{j.at("coef"), j.at("q"), j.at("start")};
  if (k == "finite_support") return FiniteSupport{j.at("last")};
  if (k == "power_minorant") return PowerMinorant{j.at("coef"), j.at("q"), j.at("start")};
  if (k == "block_lower_bound") return BlockLowerBound{j.at("delta"), j.at("blocks"), j.at("source")};
  throw std::invalid_argument("unknown certificate kind: " + k);
}

nlohmann::json to_json(const SeriesReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json o = {{"n", row.n}, {"term", row.term}, {"partial_sum", row.partial_sum}, {"weight", row.weight}};
    if (row.ci_lo) o["ci_lo"] = *row.ci_lo;
    if (row.ci_hi) o["ci_hi"] = *row.ci_hi;
    if (row.exact) o["exact"] = *row.exact;
    rows.push_back(std::move(o));
  }
  nlohmann::json j = {{"series_id", r.series_id}, {"params", r.params}, {"rows", rows},
                      {"verdict", to_string(r.verdict)}, {"evidence", r.evidence}};
  j["tail_bound"] = r.tail_bound ? nlohmann::json(*r.tail_bound) : nlohmann::json(nullptr);
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  return j;
}

SeriesReport series_report_from_json(const nlohmann::json& j) {
  SeriesReport r;
  r.series_id = j.at("series_id");
  r.params = j.value("params", nlohmann::json::object());
  for (const auto& o : j.at("rows")) {
    SeriesRow row;
    row.n = o.at("n");
    row.term = o.at("term");
    row.partial_sum = o.at("partial_sum");
    row.weight = o.value("weight", 1.0);
    if (o.contains("ci_lo")) row.ci_lo = o["ci_lo"].get<double>();
    if (o.contains("ci_hi")) row.ci_hi = o["ci_hi"].get<double>();
    if (o.contains("exact")) row.exact = o["exact"].get<double>();
    r.rows.push_back(row);
  }
  if (j.contains("tail_bound") && !j["tail_bound"].is_null()) r.tail_bound = j["tail_bound"].get<double>();
  r.verdict = series_verdict_from_string(j.at("verdict"));
  r.evidence = j.value("evidence", std::vector<std::string>{});
  if (j.contains("certificate")) r.certificate = certificate_from_json(j["certificate"]);
  return r;
}

std::string to_csv(const SeriesReport& r) {
  std::string out = "n,term,partial_sum,ci_lo,ci_hi,exact\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    out += std::to_string(row.n) + "," + num(row.term) + "," + num(row.partial_sum) + ",";
    out += (row.ci_lo ? num(*row.ci_lo) : "") + "," + (row.ci_hi ? num(*row.ci_hi) : "") + ",";
    out += (row.exact ? num(*row.exact) : "") + "\n";
  }
  return out;
}

// Terms.

double term_ii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long n) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  return static_cast<double>(n) * w(n) * tail(d, eps * a(n));
}

double term_iii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long n) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const double an = a(n);
  const double T = truncated_moment(d, 2.0, eps * an).value;
  if (T == 0.0) return 0.0;
  // a_n^2 / n from the family when available, so (n ln n) / n is exactly ln n
  double r;
  if (a.family() && n >= a.first_index()) {
    r = (a.family()->pow(2.0) * RegVar::power(-1.0)).eval_product(static_cast<double>(n));
  } else {
    r = an * an / static_cast<double>(n);
  }
  return w(n) * std::exp(-eps * eps * r / T);
}

double term_spataru_c(const Dist& d, double eps, long n) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (n < 2) throw std::invalid_argument("term_spataru_c: n must be >= 2");
  static const NormSeq a = spataru_norm();
  const double x = static_cast<double>(n);
  const double T = truncated_moment(d, 2.0, eps * a(n)).value;
  if (T == 0.0) return 0.0;
  // n^{-1} exp(-eps^2 ln n / T)
  return std::exp(-eps * eps * std::log(x) / T) / x;
}

double term_conv(const WeightSeq& w, const NormSeq&, double, long n, double p_est) {
  if (!(p_est >= 0.0 && p_est <= 1.0)) throw std::invalid_argument("p_est must lie in [0, 1]");
  return w(n) * p_est;
}

// Certificates derived from families.

std::optional<PowerLowerBound> power_lower_bound(const NormSeq& a) {
  const auto& fam = a.family();
  if (!fam) return std::nullopt;
  long start = a.first_index();
  for (const auto& f : fam->slow()) {
    if (f.power < 0.0) return std::nullopt;
    // factor >= 1 once ln(shift + n) >= 1 (Log) or ln ln(shift + n) >= 1 (LogLog)
    const double need = f.kind == SlowFactor::Kind::Log ? std::exp(1.0) : std::exp(std::exp(1.0));
    start = std::max(start, static_cast<long>(std::ceil(need - f.shift)));
  }
  return PowerLowerBound{fam->scale(), fam->index(), start};
}

namespace {

struct PowerUpper {
  double coef = 1.0;
  double exponent = 0.0;
  long start = 1;
};

// tau_n <= coef n^exponent for n >= start (Potter bound at `start`).
std::optional<PowerUpper> weight_power_upper(const WeightSeq& w, long start) {
  const auto& fam = w.family();
  if (!fam) return std::nullopt;
  start = std::max(start, w.first_index());
  const double m = static_cast<double>(start);
  const double e = fam->index() + fam->growth_exponent(m);
  return PowerUpper{fam->eval(m) * std::pow(m, -e), e, start};
}

// g(n) <= g(M) (n/M)^sigma for n >= M, with sigma < -1; M ranges over
// doublings of n0 not beyond horizon + 1.
std::optional<PowerEnvelope> potter_envelope(const RegVar& g, long n0, long horizon) {
  for (long M = std::max(n0, g.first_valid()); M <= horizon + 1; M *= 2) {
    const double m = static_cast<double>(M);
    const double sigma = g.index() + g.growth_exponent(m);
    if (sigma < -1.0) return PowerEnvelope{g.eval(m) * std::pow(m, -sigma), -sigma, M};
  }
  return std::nullopt;
}

std::optional<long> first_reaching(const NormSeq& a, double eps, double level, long from, long horizon) {
  for (long n = from; n <= horizon; ++n)
    if (eps * a(n) >= level) return n;
  return std::nullopt;
}

std::optional<Certificate> derive_ii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long horizon,
                                     std::vector<std::string>& ev) {
  if (const auto mono = first_monotonicity_violation(a, horizon)) {
    ev.push_back("a_n not monotone at n=" + std::to_string(*mono));
    return std::nullopt;
  }
  if (const auto smax = d.support_max()) {
    long last = 0;
    for (long n = 1; n <= horizon; ++n)
      if (!(eps * a(n) > *smax)) last = n;
    if (last == horizon) {
      ev.push_back("eps a_n has not passed sup|X| within the horizon");
      return std::nullopt;
    }
    ev.push_back("bounded support: P(|X| >= eps a_n) = 0 once eps a_n > " + std::to_string(*smax) +
                 "; a_n nondecreasing");
    return FiniteSupport{last};
  }
  if (const auto* p = std::get_if<ParetoSym>(&d.kind())) {
    if (!w.family() || !a.family()) {
      ev.push_back("custom sequences: no analytic family for the Pareto tail");
      return std::nullopt;
    }
    const long from = std::max(w.first_index(), a.first_index());
    const auto n0 = first_reaching(a, eps, p->scale, from, horizon);
    if (!n0) return std::nullopt;
    const RegVar g = (RegVar::power(1.0) * *w.family() * a.family()->pow(-p->alpha))
                         .scaled(std::pow(p->scale / eps, p->alpha));
    ev.push_back("Pareto tail: term_n = " + g.describe() + " for n >= " + std::to_string(*n0));
    if (g.summability() == Summability::Diverges) {
      if (!g.has_slow_part()) return PowerMinorant{g.scale(), g.index(), *n0};
      ev.push_back("divergent by index comparison, but no termwise minorant is implemented for slow factors");
      return std::nullopt;
    }
    if (auto env = potter_envelope(g, *n0, horizon)) return *env;
    return std::nullopt;
  }
  if (std::holds_alternative<NormalStd>(d.kind())) {
    const auto lb = power_lower_bound(a);
    if (!lb || !(lb->index > 0.0)) {
      ev.push_back("normal tail: no power lower bound on a_n");
      return std::nullopt;
    }
    const auto tu = weight_power_upper(w, lb->start);
    if (!tu) return std::nullopt;
    ev.push_back("P(|Z| >= x) <= exp(-x^2/2), a_n >= " + std::to_string(lb->scale) + " n^" +
                 std::to_string(lb->index));
    const double c = 0.5 * eps * eps * lb->scale * lb->scale;
    return StretchedExpEnvelope{tu->coef, tu->exponent + 1.0, c, 2.0 * lb->index, tu->start};
  }
  return std::nullopt;
}

bool spataru_shape(const RegVar& f) {
  if (std::fabs(f.index() - 0.5) > 1e-15 || f.slow().size() != 1) return false;
  const auto& s = f.slow().front();
  return s.kind == SlowFactor::Kind::Log && std::fabs(s.power - 0.5) < 1e-15 && s.shift >= 0.0;
}

std::optional<Certificate> derive_iii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps,
                                      std::vector<std::string>& ev) {
  const ExtReal var = full_moment(d, 2.0);
  if (!var.is_finite()) {
    ev.push_back("E[X^2] infinite: the bound T <= E[X^2] is unavailable");
    return std::nullopt;
  }
  if (var.value == 0.0) {
    ev.push_back("X = 0 a.s.: every term vanishes");
    return FiniteSupport{0};
  }
  const double s2 = var.value;
  const auto lb = power_lower_bound(a);
  if (!lb) return std::nullopt;
  if (lb->index > 0.5) {
    const auto tu = weight_power_upper(w, lb->start);
    if (!tu) return std::nullopt;
    ev.push_back("T_{eps,n} <= E[X^2] = " + std::to_string(s2) + " and a_n >= power lower bound");
    return StretchedExpEnvelope{tu->coef, tu->exponent, eps * eps * lb->scale * lb->scale / s2,
                                2.0 * lb->index - 1.0, tu->start};
  }
  if (a.family() && spataru_shape(*a.family())) {
    // a_n^2 / n = scale^2 ln(shift + n) >= scale^2 ln n
    const long start = std::max({a.first_index(), 2L, w.first_index()});
    const auto tu = weight_power_upper(w, start);
    if (!tu) return std::nullopt;
    const double sc = a.family()->scale();
    const double p = eps * eps * sc * sc / s2 - tu->exponent;
    ev.push_back("T_{eps,n} <= E[X^2] and a_n^2/n >= scale^2 ln n");
    if (p > 1.0) return PowerEnvelope{tu->coef, p, tu->start};
    ev.push_back("envelope exponent " + std::to_string(p) + " <= 1: not summable");
  }
  return std::nullopt;
}

}  // namespace

SeriesReport series_ii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long horizon) {
  std::vector<std::string> ev;
  const auto cert = derive_ii(d, w, a, eps, horizon, ev);
  auto r = series_verdict("ii", [&](long n) { return term_ii(d, w, a, eps, n); }, horizon, cert);
  r.params.update({{"dist", d.doc()}, {"tau", w.label()}, {"a", a.label()}, {"eps", eps}});
  r.evidence.insert(r.evidence.begin(), ev.begin(), ev.end());
  return r;
}

SeriesReport series_iii(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps, long horizon) {
  std::vector<std::string> ev;
  const auto cert = derive_iii(d, w, a, eps, ev);
  auto r = series_verdict("iii", [&](long n) { return term_iii(d, w, a, eps, n); }, horizon, cert);
  r.params.update({{"dist", d.doc()}, {"tau", w.label()}, {"a", a.label()}, {"eps", eps}});
  r.evidence.insert(r.evidence.begin(), ev.begin(), ev.end());
  return r;
}

SeriesReport series_spataru_c(const Dist& d, double eps, long horizon) {
  std::vector<std::string> ev;
  std::optional<Certificate> cert;
  const ExtReal var = full_moment(d, 2.0);
  if (var.is_finite() && var.value > 0.0) {
    cert = PowerEnvelope{1.0, 1.0 + eps * eps / var.value, 2};
    ev.push_back("T_{eps,n} <= E[X^2] = " + std::to_string(var.value));
    for (long n = 2; n <= horizon; ++n) {
      const double x = static_cast<double>(n);
      if (truncated_moment(d, 2.0, eps * std::sqrt(x * std::log(x))).value >= 0.5 * var.value) {
        ev.push_back("crossover: T_{eps,n} >= E[X^2]/2 from n=" + std::to_string(n));
        break;
      }
    }
  } else if (!var.is_finite()) {
    ev.push_back("E[X^2] infinite: no envelope from the truncated second moment");
  } else {
    cert = FiniteSupport{1};
  }
  auto r = series_verdict("spataru_c", [&](long n) { return term_spataru_c(d, eps, n); }, horizon, cert, 2);
  r.params.update({{"dist", d.doc()}, {"eps", eps}});
  r.evidence.insert(r.evidence.begin(), ev.begin(), ev.end());
  return r;
}

// Harnesses.

NagaevGap nagaev_gap(const Dist& d, const NormSeq& a, double eps, double gamma, long n, double p_est) {
  if (!d.symmetric()) throw std::invalid_argument("nagaev_gap: symmetric distributions only");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("nagaev_gap: gamma must lie in (0, 1]");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (!(p_est >= 0.0 && p_est <= 1.0)) throw std::invalid_argument("p_est must lie in [0, 1]");
  NagaevGap g;
  g.n = n;
  g.gamma = gamma;
  g.eps = eps;
  g.p_est = p_est;
  const double cut = eps * a(n);
  const double thr = gamma * cut;
  const double nn = static_cast<double>(n);
  const double T = truncated_moment(d, 2.0, cut).value;
  g.x = T > 0.0 ? thr / std::sqrt(nn * T) : kInf;
  g.lhs_gap = std::fabs(p_est - 2.0 * std_normal_sf(g.x));
  g.rhs_core = nn * truncated_moment(d, 3.0, cut).value / (thr * thr * thr);
  if (g.rhs_core > 0.0) {
    g.implied_constant = g.lhs_gap / g.rhs_core;
  } else {
    g.implied_constant = g.lhs_gap == 0.0 ? 0.0 : kInf;
  }
  return g;
}

namespace {
double minimal_coefficient(const std::vector<HJRow>& rows, double other, bool solve_for_D) {
  double best = 0.0;
  for (const auto& r : rows) {
    const double fixed = solve_for_D ? other * r.single_term : other * r.power_term;
    const double coeff = solve_for_D ? r.power_term : r.single_term;
    const double need = r.lhs - fixed;
    if (need <= 0.0) continue;
    if (coeff == 0.0) return kInf;
    best = std::max(best, need / coeff);
  }
  return best;
}
}  // namespace

double HJProbe::minimal_D(double C) const { return minimal_coefficient(rows, C, true); }
double HJProbe::minimal_C(double D) const { return minimal_coefficient(rows, D, false); }

HJProbe hj_constant_probe(const Dist& d, int r, long n, const std::vector<double>& lambdas) {
  if (r < 1) throw std::invalid_argument("hj_constant_probe: r must be >= 1");
  if (n < 1 || n > 64) throw std::invalid_argument("hj_constant_probe: n must be in [1, 64]");
  if (!d.symmetric()) throw std::invalid_argument("hj_constant_probe: symmetric distributions only");
  const WalkOracle oracle(d, n);
  HJProbe p;
  p.r = r;
  p.n = n;
  for (double lam : lambdas) {
    if (lam < 0.0) throw std::invalid_argument("hj_constant_probe: lambda must be >= 0");
    const double sub = lam / (2.0 * r);
    p.rows.push_back({lam, exact_tail(oracle, lam), static_cast<double>(n) * tail(d, sub),
                      std::pow(exact_tail(oracle, sub), r)});
  }
  return p;
}

ElementaryReport lemma_elementary_check(const Dist& d, const WeightSeq& w, const std::vector<double>& rho,
                                        const NormSeq& b, double t, long horizon) {
  if (horizon < 2) throw std::invalid_argument("lemma_elementary_check: horizon must be >= 2");
  if (static_cast<long>(rho.size()) > horizon)
    throw std::invalid_argument("lemma_elementary_check: rho has support beyond the horizon");
  std::vector<double> r(static_cast<std::size_t>(horizon) + 2, 0.0);  // r[n] = rho_n
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < 0.0) throw std::invalid_argument("lemma_elementary_check: rho must be nonnegative");
    r[i + 1] = rho[i];
  }
  const auto T = partial_weight_sums(w, horizon);
  std::vector<double> suffix(static_cast<std::size_t>(horizon) + 2, 0.0);
  for (long n = horizon; n >= 1; --n) suffix[static_cast<std::size_t>(n)] = suffix[static_cast<std::size_t>(n) + 1] + r[static_cast<std::size_t>(n)];
  ElementaryReport rep;
  for (long n = 2; n <= horizon; ++n) {
    const double s = suffix[static_cast<std::size_t>(n)];
    if (s == 0.0) continue;
    const double Tn = T[static_cast<std::size_t>(n - 1)];
    if (Tn <= 0.0) {
      rep.C = kInf;
      break;
    }
    rep.C = std::max(rep.C, std::pow(b(n), t) * s / Tn);
  }
  CompensatedSum lhs, rhs;
  for (long n = 2; n <= horizon; ++n)
    if (r[static_cast<std::size_t>(n)] > 0.0)
      lhs.add(r[static_cast<std::size_t>(n)] * truncated_moment(d, t, b(n)).value);
  rep.rho_1_term = r[1] > 0.0 ? r[1] * truncated_moment(d, t, b(1)).value : 0.0;
  rhs.add(w(1) * (1.0 - tail(d, b(1))));
  for (long n = 1; n < horizon; ++n) rhs.add(static_cast<double>(n) * w(n) * tail(d, b(n)));
  rep.lhs = lhs.value();
  rep.rhs = rep.C == 0.0 ? 0.0 : rep.C * rhs.value();
  rep.passed = std::isfinite(rep.C) && rep.lhs <= rep.rhs * (1.0 + 1e-12);
  return rep;
}

namespace {

double binom(int r, int j) {
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c = c * (r - j + i) / i;
  return c;
}

// p_r(x, y) = sum_{j=1}^r C(r,j) (-1)^{j+1} y^{j-1} x^{r-j}
double p_r(int r, double x, double y) {
  double s = 0.0;
  for (int j = 1; j <= r; ++j) s += (j % 2 ? 1.0 : -1.0) * binom(r, j) * std::pow(y, j - 1) * std::pow(x, r - j);
  return s;
}

double comp_constant_uncached(int r) {
  constexpr int G = 1000;
  double best = -kInf, bx = 0.0, by = 0.0;
  for (int i = 0; i <= G; ++i)
    for (int j = 0; j <= G; ++j) {
      const double x = static_cast<double>(i) / G, y = static_cast<double>(j) / G;
      const double v = p_r(r, x, y);
      if (v > best) best = v, bx = x, by = y;
    }
  double h = 1.0 / G;
  for (int round = 0; round < 40; ++round) {
    const double cx = bx, cy = by;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double x = std::clamp(cx + i * h / 10.0, 0.0, 1.0), y = std::clamp(cy + j * h / 10.0, 0.0, 1.0);
        const double v = p_r(r, x, y);
        if (v > best) best = v, bx = x, by = y;
      }
    h /= 5.0;
  }
  return best;
}

}  // namespace

double comp_constant(int r) {
  if (r < 1) throw std::invalid_argument("comp_constant: r must be >= 1");
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(r);
  if (it == cache.end()) it = cache.emplace(r, comp_constant_uncached(r)).first;
  return it->second;
}

CompReport lemma_comp_check(const std::vector<double>& alpha, const std::vector<double>& beta, const WeightSeq& w,
                            int r, long horizon, std::optional<double> c_r) {
  if (static_cast<long>(alpha.size()) < horizon || static_cast<long>(beta.size()) < horizon)
    throw std::invalid_argument("lemma_comp_check: sequences shorter than the horizon");
  CompReport rep;
  rep.c_r = c_r ? *c_r : comp_constant(r);
  CompensatedSum lhs, diff, bt;
  for (long n = 1; n <= horizon; ++n) {
    const double a = alpha[static_cast<std::size_t>(n - 1)], b = beta[static_cast<std::size_t>(n - 1)];
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
      throw std::invalid_argument("lemma_comp_check: alpha, beta must lie in [0, 1]");
    const double tau = w(n);
    lhs.add(tau * std::pow(a, r));
    diff.add(tau * std::pow(std::fabs(a - b), r));
    bt.add(tau * b);
  }
  rep.lhs = lhs.value();
  rep.diff_term = diff.value();
  rep.beta_term = rep.c_r * bt.value();
  const double rhs = rep.diff_term + rep.beta_term;
  rep.passed = rep.lhs <= rhs + 1e-12 * std::max(1.0, rhs);
  return rep;
}

LemmaSeriesReport lemma_the_lemma_series(const Dist& d, const WeightSeq& w, const NormSeq& b, double nu,
                                         double theta, long horizon) {
  LemmaSeriesReport out;
  out.tail_hypothesis = check_tail_weight_cond(w, b, theta, nu, std::max(horizon, 4L));
  out.ratio_hypothesis = check_growth_ratio_cond(w, b, nu, std::max(horizon, 4L));
  out.crit = series_ii(d, w, b, 1.0, horizon);

  // E[|X|^nu 1{|X|<b}] <= K b^(nu-kappa) gives term <= K^theta tau n^theta b^(-kappa theta).
  std::optional<Certificate> cert;
  std::vector<std::string> ev;
  std::optional<std::pair<double, double>> K;
  if (const ExtReal m = full_moment(d, nu); m.is_finite()) {
    K = {{m.value, nu}};
  } else if (const auto* p = std::get_if<ParetoSym>(&d.kind()); p && nu > p->alpha) {
    K = {{p->alpha * std::pow(p->scale, p->alpha) / (nu - p->alpha), p->alpha}};
  }
  if (K && w.family() && b.family()) {
    const RegVar g =
        (*w.family() * RegVar::power(theta) * b.family()->pow(-K->second * theta)).scaled(std::pow(K->first, theta));
    const long from = std::max(w.first_index(), b.first_index());
    if (auto env = potter_envelope(g, from, horizon)) {
      cert = *env;
      ev.push_back("truncated moment bound K b^(nu-kappa) with K=" + std::to_string(K->first) +
                   ", kappa=" + std::to_string(K->second));
    }
  }
  out.series = series_verdict(
      "the_lemma",
      [&](long n) {
        const double bn = b(n);
        const double inner = static_cast<double>(n) * truncated_moment(d, nu, bn).value / std::pow(bn, nu);
        return w(n) * std::pow(inner, theta);
      },
      horizon, cert);
  out.series.params.update({{"dist", d.doc()}, {"nu", nu}, {"theta", theta}});
  out.series.evidence.insert(out.series.evidence.begin(), ev.begin(), ev.end());
  const bool hyp = out.tail_hypothesis.verdict == RegVerdict::CertifiedPass &&
                   out.ratio_hypothesis.verdict == RegVerdict::CertifiedPass;
  out.finiteness_expected = hyp && out.crit.verdict == SeriesVerdict::ConvergesCertified;
  if (!hyp) out.series.evidence.push_back("hypotheses not certified: finiteness not flagged");
  return out;
}

}  // namespace ccl
