// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ccl/convergence.hpp"
#include "ccl/counterexample.hpp"
#include "ccl/mcengine.hpp"
#include "ccl/normal.hpp"

using namespace ccl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && dt >= budget_s) {
    o.pass = false;
    o.detail += " (over time budget)";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %-34s %7.3fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, dt, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1
Outcome moment_identity() {
  const PhiMoment p = phi_moment(ms_distribution(build_schedule(9)), 48);
  const double want = 1.0 - std::ldexp(1.0, -48);
  return {p.value == want && p.deficit == std::ldexp(1.0, -48),
          fmt("E phi = 1 - %.17g, numeric check %.2e", 1.0 - p.value, p.numeric_check)};
}

// 2
Outcome block_certificates() {
  const KSchedule s = build_schedule(9);
  bool ok = true;
  double worst = kInf;
  for (int m = 1; m <= 8; ++m) {
    const auto c = certify_block_divergence(s, m);
    ok = ok && c.passed && c.block_bound_log >= 0.0;
    worst = std::min(worst, c.block_bound_log);
  }
  return {ok, fmt("8 blocks, min ln(block bound) = %.3e", worst)};
}

// 3
Outcome lambda_one() {
  const double l1 = std::exp(solve_condition_A(1));
  const KSchedule s = build_schedule(9);
  const bool replay = schedule_certified(replay_schedule(s.lnln_K));
  const double built = std::exp(s.ln_lambda(1));
  return {l1 >= 29.5 && l1 <= 29.7 && built >= 29.5 && built <= 29.7 && replay,
          fmt("lambda_1 = %.9f (4e^2 = %.9f), replay ", l1, 4.0 * std::exp(2.0)) + (replay ? "ok" : "FAILED")};
}

// 4
Outcome nagaev() {
  const Dist r = Dist::rademacher();
  const NormSeq a = power_norm(0.5);
  bool ok = true;
  std::string d;
  for (long n : {16L, 64L, 256L, 1024L, 4096L}) {
    const double p = exact_tail(WalkOracle(r, n), std::sqrt(double(n)));
    const NagaevGap g = nagaev_gap(r, a, 1.0, 1.0, n, p);
    ok = ok && std::fabs(g.x - 1.0) < 1e-12 && g.lhs_gap <= 2.0 / std::sqrt(double(n)) &&
         std::isfinite(g.implied_constant);
    d += fmt("n=%g gap=%.4g C=%.3g; ", double(n), g.lhs_gap, g.implied_constant);
  }
  return {ok, d};
}

// 5
Outcome hsu_robbins() {
  const Dist r = Dist::rademacher();
  const WeightSeq w = power_weights(0.0);
  const NormSeq a = power_norm(1.0);
  const auto ii = series_ii(r, w, a, 0.5, 1000);
  bool finite = ii.verdict == SeriesVerdict::ConvergesCertified && ii.certificate &&
                std::holds_alternative<FiniteSupport>(*ii.certificate) &&
                std::get<FiniteSupport>(*ii.certificate).last <= 2;
  const auto iii = series_iii(r, w, a, 0.5, 100);
  const bool conv = iii.verdict == SeriesVerdict::ConvergesCertified && iii.tail_bound && *iii.tail_bound < 1e-6;
  const auto par = series_ii(Dist::pareto(1.5), w, a, 0.5, 1000);
  const bool div = par.verdict == SeriesVerdict::DivergesCertified;
  return {finite && conv && div, fmt("(ii) sum %.3g, (iii) tail beyond 100 <= %.3e, pareto (ii) ", ii.total(),
                                     iii.tail_bound.value_or(kInf)) +
                                     to_string(par.verdict)};
}

// 6
Outcome spataru_identity() {
  const WeightSeq w = power_weights(-1.0);
  const NormSeq a = spataru_norm();
  double worst = 0.0;
  for (const Dist& d : {Dist::rademacher(), Dist::uniform(1.0), Dist::normal()})
    for (double e : {0.5, 1.0, 2.0})
      for (long n = 2; n <= 10000; ++n)
        worst = std::max(worst, rel_diff(term_iii(d, w, a, e, n) / w(n), double(n) * term_spataru_c(d, e, n)));
  return {worst <= 1e-13, fmt("max relative difference %.3e", worst)};
}

// 7
Outcome lemma_harnesses() {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int passed = 0;
  for (int seed = 0; seed < 200; ++seed) {
    const int k = 1 + static_cast<int>(u(eng) * 8);
    std::vector<Atom> atoms;
    for (int i = 0; i < k; ++i) atoms.push_back({0.25 + 8.0 * u(eng), u(eng) / k});
    const Dist d = Dist::atomic(atoms);
    const WeightSeq w = power_weights(-1.5 + 2.0 * u(eng));
    const NormSeq b = power_norm(0.3 + u(eng));
    const double t = 1.0 + 2.0 * u(eng);
    std::vector<double> rho(64);
    for (auto& x : rho) x = u(eng) < 0.3 ? u(eng) : 0.0;
    passed += lemma_elementary_check(d, w, rho, b, t, 64).passed ? 1 : 0;
  }

  bool comp = std::fabs(comp_constant(2) - kComp2) < 1e-12;
  const WeightSeq w = power_weights(-1.0);
  for (int r : {2, 3, 4})
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> al(100), be(100);
      for (int i = 0; i < 100; ++i) al[i] = u(eng), be[i] = u(eng);
      const auto rep = lemma_comp_check(al, be, w, r, 100, r == 2 ? std::optional<double>(kComp2) : std::nullopt);
      comp = comp && rep.passed;
    }

  bool hj = true;
  for (long n : {16L, 64L})
    for (int r : {2, 3}) {
      std::vector<std::vector<double>> grids(3);
      for (double l = 0; l <= n; l += 1.0) grids[0].push_back(l);
      for (double l = 0.5; l <= n + 1; l += 1.0) grids[1].push_back(l);
      for (double l = 0.25; l <= 2.0 * n; l *= 1.5) grids[2].push_back(l);
      for (const auto& g : grids) {
        const auto p = hj_constant_probe(Dist::rademacher(), r, n, g);
        hj = hj && std::isfinite(p.minimal_D(1.0)) && std::isfinite(p.minimal_D(0.0));
      }
    }
  return {passed == 200 && comp && hj,
          fmt("elementary %g/200, comp c_3=%.6f c_4=%.6f", double(passed), comp_constant(3), comp_constant(4)) +
              (hj ? ", HJ D_r finite" : ", HJ D_r infinite")};
}

// 8
Outcome maximal_inequality() {
  const Dist r = Dist::rademacher();
  double worst = 0.0;
  long cases = 0;
  for (long n = 1; n <= 64; ++n) {
    const WalkOracle o(r, n);
    for (long t = 1; t <= n; ++t) {
      const double lhs = exact_max_tail(r, n, double(t));
      const double rhs = 3.0 * exact_tail(o, double(t) / 10.0);
      worst = std::max(worst, lhs / rhs);
      ++cases;
    }
  }
  return {worst <= 1.0, fmt("%g (n, t) pairs, max lhs/rhs = %.4f", double(cases), worst)};
}

// 9
Outcome mc_coverage() {
  const Dist r = Dist::rademacher();
  const double truth = exact_tail(WalkOracle(r, 64), 8.0);
  int covered = 0;
  bool identical = true;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SeedStream s{seed, 9, 64, 0};
    const Estimate e1 = estimate_tail(r, 64, 8.0, 100'000, s, 1);
    if (e1.lo <= truth && truth <= e1.hi) ++covered;
    if (seed <= 10) {
      const Estimate e8 = estimate_tail(r, 64, 8.0, 100'000, s, 8);
      identical = identical && e1.hits == e8.hits && e1.lo == e8.lo && e1.hi == e8.hi;
    }
  }
  return {covered >= 97 && identical,
          fmt("covered %g/100 (exact %.6f), workers 1 vs 8 ", double(covered), truth) +
              (identical ? "identical" : "DIFFER")};
}

// 10
Outcome spataru_weak_bound() {
  // atoms e^j with weights proportional to log+ v / (v^2 (log+ log+ v)^2 j^2), nonzero mass 0.1
  std::vector<Atom> atoms;
  double z = 0.0;
  for (int j = 1; j <= 8; ++j) {
    const double v = std::exp(double(j));
    const double w = log_plus(v) / (v * v * std::pow(log_plus(log_plus(v)), 2) * j * j);
    atoms.push_back({v, w});
    z += w;
  }
  for (auto& a : atoms) a.weight *= 0.1 / z;
  const Dist d = Dist::atomic(atoms);
  const ExtReal wm = weighted_second_moment(d, LogLogDelta{1.0});
  if (!wm.is_finite()) return {false, "weighted moment infinite"};

  const NormSeq a = spataru_norm();
  const long H = 1'000'000;
  auto g = [](double n) { return log_plus(n) / std::pow(log_plus(log_plus(n)), 2); };
  double Cp = 0.0;
  std::vector<double> T(static_cast<std::size_t>(H) + 1);
  for (long n = 2; n <= H; ++n) {
    T[static_cast<std::size_t>(n)] = truncated_second_moment(d, 1.0, a, n);
    Cp = std::max(Cp, T[static_cast<std::size_t>(n)] / g(double(n)));
  }
  bool bound = true, dominated = true;
  CompensatedSum c, ref;
  for (long n = 2; n <= H; ++n) {
    const double t = T[static_cast<std::size_t>(n)];
    bound = bound && t <= Cp * g(double(n));
    const double term = term_spataru_c(d, 1.0, n);
    const double cmp = 1.0 / (double(n) * std::pow(std::log(double(n)), 2));
    c.add(term);
    ref.add(cmp);
    dominated = dominated && term <= cmp && c.value() <= ref.value();
  }
  // beyond the horizon T <= E X^2 and n^{-1-1/E X^2} <= 1/(n ln^2 n) whenever ln n / ln ln n >= 2 E X^2
  const double ex2 = full_moment(d, 2.0).value;
  const bool tail_ok = 2.0 * ex2 <= std::numbers::e;
  return {bound && dominated && tail_ok && std::isfinite(Cp),
          fmt("C' = %.4f, E X^2 = %.4f, c-series sum %.5f", Cp, ex2, c.value()) +
              fmt(" <= reference sum %.5f", ref.value())};
}

}  // namespace

int main() {
  criterion(1, "counterexample moment identity", 1.0, moment_identity);
  criterion(2, "block-divergence certificates", 1.0, block_certificates);
  criterion(3, "lambda_1 and (A)/(B) replay", 0.0, lambda_one);
  criterion(4, "normal-approximation gap", 5.0, nagaev);
  criterion(5, "Hsu-Robbins preset", 3.0, hsu_robbins);
  criterion(6, "Spataru summand identity", 0.0, spataru_identity);
  criterion(7, "lemma harnesses", 10.0, lemma_harnesses);
  criterion(8, "maximal inequality (3, 10)", 0.0, maximal_inequality);
  criterion(9, "MC coverage and determinism", 0.0, mc_coverage);
  criterion(10, "weak Spataru T_{1,n} bound", 0.0, spataru_weak_bound);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
