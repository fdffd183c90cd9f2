#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ccl/convergence.hpp"
#include "ccl/counterexample.hpp"
#include "ccl/mcengine.hpp"

using namespace ccl;

namespace {
std::vector<Dist> closed_form_kinds() {
  return {Dist::rademacher(), Dist::uniform(1.5), Dist::normal(), Dist::pareto(3.5, 1.0),
          Dist::atomic({{0.5, 0.3}, {2.0, 0.4}})};
}
}  // namespace

TEST_CASE("aux-cond holds for some theta on power families") {
  for (double beta : {-1.0, -0.5, 0.0, 1.0}) {
    for (double alpha : {0.4, 0.5, 1.0, 2.0}) {
      const WeightSeq w = power_weights(beta);
      const NormSeq a = power_norm(alpha);
      CAPTURE(beta);
      CAPTURE(alpha);
      const auto th = find_aux_theta(w, a, AuxForm::Cubic, 10000, 16);
      CHECK(th);
    }
  }
}

TEST_CASE("quadratic aux-cond implies cubic") {
  for (double beta : {-1.0, 0.0, 0.5})
    for (double alpha : {0.3, 0.5, 1.0})
      for (double theta : {1.0, 2.0, 4.0}) {
        const WeightSeq w = power_weights(beta);
        const NormSeq a = power_norm(alpha);
        if (check_aux_cond(w, a, theta, AuxForm::Quadratic, 2000).passed())
          CHECK(check_aux_cond(w, a, theta, AuxForm::Cubic, 2000).passed());
      }
}

TEST_CASE("partial weight sums are additive") {
  for (double beta : {-1.5, -1.0, 0.0, 0.7}) {
    const WeightSeq w = power_weights(beta, 1.0);
    const auto T = partial_weight_sums(w, 500);
    for (long j : {1L, 17L, 250L}) {
      CompensatedSum s;
      for (long i = j + 1; i <= 500; ++i) s.add(double(i) * w(i));
      CHECK(rel_diff(T[500], T[static_cast<std::size_t>(j)] + s.value()) < 1e-14);
    }
  }
}

TEST_CASE("tail monotone and moment split") {
  for (const Dist& d : closed_form_kinds()) {
    double prev = 1.0;
    for (double x = 0.0; x < 6.0; x += 0.05) {
      const double t = tail(d, x);
      CHECK(t <= prev + 1e-15);
      CHECK(strict_tail(d, x) <= t);
      prev = t;
    }
    for (double nu : {1.0, 2.0, 3.0}) {
      const auto full = full_moment(d, nu);
      if (!full.is_finite()) continue;
      for (double b : {0.25, 1.0, 1.7, 4.0}) {
        const auto up = upper_moment(d, nu, b);
        REQUIRE(up.is_finite());
        CHECK(rel_diff(truncated_moment(d, nu, b).value + up.value, full.value) < 1e-10);
      }
    }
  }
}

TEST_CASE("truncated second moment monotone in eps") {
  const NormSeq a = spataru_norm();
  for (const Dist& d : closed_form_kinds())
    for (long n : {2L, 10L, 300L})
      for (double e : {0.1, 0.5, 1.0, 2.0})
        CHECK(truncated_second_moment(d, e * 1.3, a, n) >= truncated_second_moment(d, e, a, n));
}

TEST_CASE("sampler KS statistic") {
  // two-sided KS critical value at level 1e-3: 1.9495 / sqrt(N)
  const std::size_t N = 1'000'000;
  const double crit = 1.9495 / std::sqrt(double(N));
  for (const Dist& d : {Dist::uniform(1.0), Dist::normal(), Dist::pareto(1.5, 1.0)}) {
    auto xs = sample(d, SeedStream{77, 0, 0, 0}, N);
    std::sort(xs.begin(), xs.end());
    double D = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double F = cdf(d, xs[i]);
      D = std::max({D, F - double(i) / N, double(i + 1) / N - F});
    }
    CAPTURE(d.doc());
    CHECK(D < crit);
  }
}

TEST_CASE("term_iii equals spataru c-term weighted") {
  const WeightSeq w = power_weights(-1.0);
  const NormSeq a = spataru_norm();
  for (const Dist& d : {Dist::rademacher(), Dist::uniform(1.0), Dist::normal()})
    for (double e : {0.5, 1.0, 2.0})
      for (long n = 2; n <= 10000; n += (n < 100 ? 1 : 97)) {
        const double lhs = term_iii(d, w, a, e, n) / w(n);
        const double rhs = double(n) * term_spataru_c(d, e, n);
        CHECK(rel_diff(lhs, rhs) < 1e-13);
      }
}

TEST_CASE("term_ii scale consistency") {
  const WeightSeq w = power_weights(0.0);
  const NormSeq a = power_norm(0.5);
  for (double s : {0.5, 2.0, 4.0})
    for (double e : {0.25, 1.0})
      for (long n : {1L, 7L, 64L}) {
        const Dist scaled = Dist::atomic({{1.0 * s, 0.5}, {3.0 * s, 0.25}});
        const Dist base = Dist::atomic({{1.0, 0.5}, {3.0, 0.25}});
        CHECK(term_ii(scaled, w, a, e, n) == term_ii(base, w, a, e / s, n));
      }
}

TEST_CASE("certified verdicts carry certificates") {
  std::vector<SeriesReport> reports;
  for (const Dist& d : closed_form_kinds()) {
    reports.push_back(series_ii(d, power_weights(0.0), power_norm(1.0), 0.5, 300));
    reports.push_back(series_iii(d, power_weights(-1.0), spataru_norm(), 1.0, 300));
    reports.push_back(series_spataru_c(d, 1.0, 300));
  }
  reports.push_back(series_ii(Dist::pareto(1.2), power_weights(0.0), power_norm(1.0), 1.0, 300));
  for (const auto& r : reports) {
    if (r.verdict != SeriesVerdict::Undetermined) CHECK(r.certificate.has_value());
    if (r.verdict == SeriesVerdict::ConvergesCertified) CHECK(r.tail_bound.has_value());
  }
}

TEST_CASE("psi/phi round trip and monotonicity") {
  double prev = -1.0;
  for (double t = 0.0; t <= 1e6; t = t < 4.0 ? t + 0.125 : t * 1.1) {
    const double y = psi(t);
    CHECK(y > prev);
    prev = y;
    if (t > 0) CHECK(rel_diff(phi_inverse(y), t) < 1e-10);
  }
}

TEST_CASE("schedules re-verify on replay") {
  for (int m : {1, 2, 5, 9, 12, 16}) {
    const KSchedule s = build_schedule(m);
    CHECK(schedule_certified(replay_schedule(s.lnln_K)));
    const auto p = phi_moment(ms_distribution(s));
    CHECK(p.value + std::ldexp(1.0, -m) == 1.0);
  }
}

TEST_CASE("LogReal round trips") {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::exp(u(eng));
    const LogReal a = LogReal::from_value(v);
    CHECK(rel_diff(a.to_level(1).value(), v) < 1e-12);
    if (v > 1.0 + 1e-6) {
      CHECK(rel_diff(std::log(a.to_level(2).log()), std::log(std::log(v))) < 1e-12);
    }
  }
}

TEST_CASE("walk oracle symmetry and max dominance") {
  for (const Dist& d : {Dist::rademacher(), Dist::atomic({{1.0, 0.2}, {2.0, 0.5}})}) {
    const auto o = WalkOracle(d, 33);
    const auto& t = o.table();
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == t[t.size() - 1 - i]);
    for (long n : {1L, 5L, 20L, 64L})
      for (double thr : {0.5, 2.0, 5.0, 11.0})
        CHECK(exact_max_tail(d, n, thr) >= exact_tail(WalkOracle(d, n), thr) - 1e-15);
  }
}

TEST_CASE("estimates are deterministic across worker counts") {
  const SeedStream s{21, 4, 0, 0};
  const auto g = dyadic_grid(1, 8);
  const auto a = empirical_series(Dist::uniform(1.0), power_weights(-1.0), spataru_norm(), 1.0, g, 3000, s, 1);
  const auto b = empirical_series(Dist::uniform(1.0), power_weights(-1.0), spataru_norm(), 1.0, g, 3000, s, 8);
  CHECK(to_json(a).dump() == to_json(b).dump());
}
