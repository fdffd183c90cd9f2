#include <doctest.h>

#include <cmath>
#include <random>

#include "ccl/convergence.hpp"
#include "ccl/mcengine.hpp"
#include "ccl/normal.hpp"

using namespace ccl;

TEST_CASE("term_ii") {
  const Dist r = Dist::rademacher();
  const WeightSeq one = power_weights(0.0);
  const NormSeq lin = power_norm(1.0);
  CHECK(term_ii(r, one, lin, 0.5, 3) == 0.0);
  CHECK(term_ii(r, one, lin, 0.5, 2) == 2.0);
  CHECK(term_ii(Dist::pareto(1.5, 1.0), one, lin, 1.0, 10) == doctest::Approx(0.31622776601683794).epsilon(1e-14));
}

TEST_CASE("term_iii and term_spataru_c") {
  const Dist r = Dist::rademacher();
  CHECK(term_iii(r, power_weights(-1.0), spataru_norm(), 1.0, 4) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(term_iii(r, power_weights(0.0), power_norm(1.0), 0.5, 1) == 0.0);
  CHECK(term_iii(Dist::normal(), power_weights(0.0), power_norm(1.0), 1.0, 100) <= std::exp(-100.0));
  CHECK(term_spataru_c(r, 1.0, 4) == doctest::Approx(0.0625).epsilon(1e-14));
  // T = eps^2 exactly gives n^-2
  CHECK(term_spataru_c(r, 1.0, 7) == doctest::Approx(1.0 / 49.0).epsilon(1e-14));
  const double t = term_spataru_c(Dist::normal(), 1.0, 1'000'000);
  CHECK(t > 0.9e-12);
  CHECK(t < 1.1e-12);
}

TEST_CASE("term_conv") {
  CHECK(term_conv(power_weights(0.0), power_norm(1.0), 1.0, 3, 0.0) == 0.0);
  CHECK(term_conv(power_weights(-1.0), power_norm(1.0), 1.0, 2, 0.5) == 0.25);
  const WalkOracle o(Dist::rademacher(), 4);
  CHECK(term_conv(power_weights(0.0), power_norm(1.0), 1.0, 4, exact_tail(o, 4.0)) == 0.125);
  CHECK_THROWS(term_conv(power_weights(0.0), power_norm(1.0), 1.0, 4, 1.5));
}

TEST_CASE("series_verdict with envelopes") {
  auto r = series_verdict("inv_sq", [](long n) { return 1.0 / (double(n) * double(n)); }, 100, PowerEnvelope{1.0, 2.0, 1});
  CHECK(r.verdict == SeriesVerdict::ConvergesCertified);
  REQUIRE(r.tail_bound);
  CHECK(*r.tail_bound <= 1.0 / 100.0);
  CHECK(*r.tail_bound >= M_PI * M_PI / 6.0 - r.total());

  auto z = series_verdict("zero", [](long) { return 0.0; }, 50, FiniteSupport{0});
  CHECK(z.verdict == SeriesVerdict::ConvergesCertified);
  CHECK(z.total() == 0.0);

  // an envelope that is violated is not attached
  auto bad = series_verdict("bad", [](long n) { return 1.0 / double(n); }, 50, PowerEnvelope{1.0, 2.0, 1});
  CHECK(bad.verdict == SeriesVerdict::Undetermined);
  CHECK_FALSE(bad.certificate);

  auto div = series_verdict("harm", [](long n) { return 1.0 / double(n); }, 50, PowerMinorant{1.0, -1.0});
  CHECK(div.verdict == SeriesVerdict::DivergesCertified);
  CHECK_THROWS(series_verdict("neg", [](long) { return -1.0; }, 5));
}

TEST_CASE("hsu-robbins series") {
  const Dist r = Dist::rademacher();
  const auto ii = series_ii(r, power_weights(0.0), power_norm(1.0), 0.5, 1000);
  CHECK(ii.verdict == SeriesVerdict::ConvergesCertified);
  CHECK(ii.total() == 2.0 + 1.0);
  const auto iii = series_iii(r, power_weights(0.0), power_norm(1.0), 0.5, 100);
  CHECK(iii.verdict == SeriesVerdict::ConvergesCertified);
  REQUIRE(iii.tail_bound);
  CHECK(*iii.tail_bound < 1e-6);

  const auto par = series_ii(Dist::pareto(1.5), power_weights(0.0), power_norm(1.0), 0.5, 1000);
  CHECK(par.verdict == SeriesVerdict::DivergesCertified);
}

TEST_CASE("spataru normal c-series") {
  const auto c = series_spataru_c(Dist::normal(), 1.0, 2000);
  CHECK(c.verdict == SeriesVerdict::ConvergesCertified);
  bool crossover = false;
  for (const auto& e : c.evidence) crossover = crossover || e.find("crossover") != std::string::npos;
  CHECK(crossover);
}

TEST_CASE("power_lower_bound") {
  const auto p = power_lower_bound(spataru_norm());
  REQUIRE(p);
  CHECK(p->index == 0.5);
  for (long n = p->start; n < 5000; ++n) CHECK(spataru_norm()(n) >= p->scale * std::pow(double(n), p->index));
}

TEST_CASE("nagaev gap") {
  const Dist r = Dist::rademacher();
  const WalkOracle o(r, 64);
  const double p = exact_tail(o, 8.0);
  const auto g = nagaev_gap(r, power_norm(0.5), 1.0, 1.0, 64, p);
  CHECK(g.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.rhs_core == doctest::Approx(64.0 / 512.0));
  CHECK(g.lhs_gap == doctest::Approx(std::fabs(p - 2.0 * std_normal_sf(1.0))));
  CHECK(std::isfinite(g.implied_constant));

  const auto deg = nagaev_gap(r, power_norm(1.0), 0.5, 1.0, 1, 0.0);
  CHECK(deg.x == kInf);
  CHECK(deg.lhs_gap == 0.0);
  CHECK(deg.implied_constant == 0.0);
  CHECK_THROWS(nagaev_gap(Dist(AtomicGeneral{{{1.0, 0.5}}}), power_norm(1.0), 1.0, 1.0, 4, 0.1));
}

TEST_CASE("hoffman-jorgensen probe") {
  const Dist r = Dist::rademacher();
  auto p = hj_constant_probe(r, 2, 16, {0.0, 4.0, 8.0, 16.0});
  CHECK(p.rows[0].lhs == 1.0);
  CHECK(p.rows[3].lhs == doctest::Approx(std::ldexp(1.0, -15)).epsilon(1e-14));
  double prev = kInf;
  for (double C : {0.0, 0.01, 0.1, 1.0, 10.0}) {
    const double D = p.minimal_D(C);
    CHECK(D <= prev);
    prev = D;
  }
  CHECK(std::isfinite(p.minimal_D(0.0)));
}

TEST_CASE("elementary lemma harness") {
  const Dist r = Dist::rademacher();
  const auto zero = lemma_elementary_check(r, power_weights(0.0), {}, power_norm(1.0), 2.0, 16);
  CHECK(zero.passed);
  CHECK(zero.lhs == 0.0);

  const auto ex = lemma_elementary_check(r, power_weights(0.0), {0.0, 0.0, 1.0}, power_norm(1.0), 2.0, 16);
  CHECK(ex.lhs == 1.0);
  // hypothesis binds at n = 2 (b_2^2 / T_1 = 4) before n = 3 (9 / 3)
  CHECK(ex.C == 4.0);
  CHECK(ex.passed);
}

TEST_CASE("comparison lemma harness") {
  CHECK(comp_constant(2) == doctest::Approx(kComp2).epsilon(1e-12));
  CHECK(comp_constant(1) == doctest::Approx(1.0));
  const WeightSeq w = power_weights(-1.0);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(100), b(100);
    for (int i = 0; i < 100; ++i) a[i] = u(eng), b[i] = u(eng);
    CHECK(lemma_comp_check(a, b, w, 2, 100, kComp2).passed);
    CHECK(lemma_comp_check(a, a, w, 2, 100).passed);
    CHECK(lemma_comp_check(a, std::vector<double>(100, 0.0), w, 2, 100).passed);
  }
}

TEST_CASE("lemma series") {
  const auto rep = lemma_the_lemma_series(Dist::rademacher(), power_weights(0.0), power_norm(1.0), 3.0, 1.0, 2000);
  CHECK(rep.series.total() < 0.65);
  CHECK(rep.series.rows[2].term == doctest::Approx(1.0 / 9.0));
  const auto par = lemma_the_lemma_series(Dist::pareto(2.5, 1.0), power_weights(0.0), power_norm(1.0), 3.0, 1.0, 2000);
  CHECK(par.series.verdict == SeriesVerdict::ConvergesCertified);
  CHECK(std::isfinite(par.series.total()));
}

TEST_CASE("report json round trip") {
  const auto r = series_ii(Dist::pareto(3.0), power_weights(0.0), power_norm(1.0), 1.0, 200);
  const auto j = to_json(r);
  const auto back = series_report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.rows.size() == r.rows.size());
  for (const Certificate& c : {Certificate{PowerEnvelope{2.0, 1.5, 3}}, Certificate{StretchedExpEnvelope{1.0, 0.5, 2.0, 0.5, 4}},
                               Certificate{LogPowerEnvelope{1.0, 2.0, 3}}, Certificate{FiniteSupport{7}},
                               Certificate{PowerMinorant{0.5, -0.5}}, Certificate{BlockLowerBound{1.0, 8, "x"}}}) {
    CHECK(to_json(certificate_from_json(to_json(c))) == to_json(c));
  }
  const std::string csv = to_csv(r);
  CHECK(csv.rfind("n,term,partial_sum,ci_lo,ci_hi,exact\n", 0) == 0);
}
