#include <doctest.h>

#include <cmath>

#include "ccl/counterexample.hpp"
#include "ccl/numeric.hpp"

using namespace ccl;

TEST_CASE("psi and its inverse") {
  CHECK(psi(0.0) == 0.0);
  CHECK(psi(2.0) == doctest::Approx(1.177410022515474691).epsilon(1e-15));
  CHECK(psi(std::exp(2.0)) == doctest::Approx(3.8442310281591168).epsilon(1e-15));
  CHECK(phi_inverse(0.0) == 0.0);
  CHECK(phi_inverse(psi(2.0) / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double K : {2.0, 10.0, 1e6}) CHECK(rel_diff(phi_inverse(psi(K)), K) < 1e-10);
  // log form, beyond double range
  const double lnK = 1e5;
  const double ln_psi = 0.5 * (lnK + std::log(lnK));
  CHECK(rel_diff(log_phi_inverse_from_log(ln_psi), lnK) < 1e-12);
}

TEST_CASE("LogReal levels") {
  const LogReal a = LogReal::from_value(5.0);
  CHECK(a.log() == doctest::Approx(std::log(5.0)));
  CHECK(a.to_level(1).value() == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(a.to_level(2).to_level(0).value() == doctest::Approx(5.0).epsilon(1e-12));
  const LogReal huge = LogReal::from_loglog(1000.0);
  CHECK(huge.level == 2);
  CHECK(huge.value() == kInf);
  CHECK_THROWS_AS(huge.to_level(1), std::domain_error);
  CHECK(a < huge);
  CHECK(LogReal::from_loglog(3.0).level == 1);
  CHECK(LogReal::from_log(10.0) < LogReal::from_loglog(3.0));
}

TEST_CASE("condition A solve") {
  const double l1 = std::exp(solve_condition_A(1));
  CHECK(l1 >= 29.556224395722601);
  CHECK(l1 <= 29.6);
  CHECK(condition_A_margin(solve_condition_A(1), 1) >= -1e-12);
  CHECK(condition_A_margin(std::log(29.0), 1) < 0.0);
  for (int m = 1; m <= 8; ++m) CHECK(std::fabs(condition_A_closed_form(m) - solve_condition_A(m)) < 1e-9);
}

TEST_CASE("required_L") {
  const double l = std::log(40.0);
  const RequiredL r = required_L(l, 1);
  CHECK(r.certified);
  CHECK(r.half_tail_gap >= 0.0);
  CHECK(r.lnln_L > l);
  // decreasing in m (s = 2^m / lambda grows), increasing in lambda
  CHECK(required_L(l, 2).lnln_L <= r.lnln_L);
  CHECK(required_L(std::log(80.0), 1).lnln_L > r.lnln_L);
  // s = 1: ln L about ln(K+1) + 2 ln 2
  const double lam = 8.0;
  const RequiredL s1 = required_L(std::log(lam), 3);
  CHECK(s1.certified);
  CHECK(std::exp(s1.lnln_L) == doctest::Approx(lam + 2.0 * std::log(2.0)).epsilon(0.05));
}

TEST_CASE("schedule build and replay") {
  const KSchedule s = build_schedule(9);
  CHECK(s.m_max == 9);
  CHECK(schedule_certified(s));
  for (int m = 1; m < 9; ++m) {
    CHECK(s.ln_lambda(m + 1) > s.ln_lambda(m));
    CHECK(s.ln_lambda(m + 1) >= required_L(s.ln_lambda(m), m).lnln_L);
    CHECK(s.margin_A[m - 1] >= 0.0);
  }
  const KSchedule r = replay_schedule(s.lnln_K);
  CHECK(r.margin_A == s.margin_A);
  const KSchedule j = schedule_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(schedule_certified(j));
  CHECK(j.lnln_K == s.lnln_K);
  CHECK_THROWS(build_schedule(0));
  CHECK_THROWS(build_schedule(17));
  CHECK(build_schedule(16).K(16).level == 2);
}

TEST_CASE("MS distribution") {
  const MSDistribution d = ms_distribution(build_schedule(9));
  CHECK(d.log_total_mass() < std::log(0.25 / 2.0) + 1e-12);
  std::vector<double> lw;
  for (int m = 1; m <= 9; ++m) lw.push_back(d.log_atom_weight(m) + std::log(2.0));
  CHECK(d.log_tail(std::exp(d.atom_magnitude(1).log())) == doctest::Approx(log_sum_exp(lw)));
  CHECK(d.log_tail(std::exp(d.atom_magnitude(9).log()) * 2.0) == -kInf);
  CHECK_NOTHROW(d.as_dist());
  CHECK_THROWS(ms_distribution(build_schedule(11)).as_dist());
}

TEST_CASE("phi moment") {
  const MSDistribution d = ms_distribution(build_schedule(9));
  const PhiMoment p = phi_moment(d, 48);
  CHECK(p.value == 1.0 - std::ldexp(1.0, -48));
  CHECK(p.deficit == std::ldexp(1.0, -48));
  CHECK(p.value + p.deficit == 1.0);
  CHECK(p.numeric_check < 1e-10);
  CHECK(phi_moment(ms_distribution(build_schedule(1))).value == 0.5);
}

TEST_CASE("T1n") {
  const KSchedule s = build_schedule(9);
  const double l1 = std::exp(s.ln_lambda(1));
  const T1n t = T1n_log(s, LogReal::from_value(l1 * (1.0 + 1e-9)));
  CHECK(t.M == 1);
  CHECK(std::exp(t.log_T) == doctest::Approx(l1 / 2.0).epsilon(1e-14));
  double prev = 0.0;
  for (double ln_n : {40.0, 1e3, 1e6, 1e20, 1e100}) {
    const T1n x = T1n_log(s, LogReal::from_value(ln_n));
    CHECK(x.log_T >= prev);
    CHECK(x.log_T >= s.ln_lambda(x.M) - x.M * std::log(2.0) - 1e-15);
    prev = x.log_T;
  }
  CHECK_THROWS(T1n_log(s, LogReal::from_value(l1 * 0.9)));
}

TEST_CASE("block certificates") {
  const KSchedule s = build_schedule(9);
  for (int m = 1; m <= 8; ++m) {
    const auto c = certify_block_divergence(s, m);
    CAPTURE(m);
    CHECK(c.passed);
    CHECK(c.block_bound_log >= 0.0);
  }
  auto lnK = s.lnln_K;
  lnK[1] -= std::log(2.0);
  const KSchedule t = replay_schedule(lnK);
  CHECK_FALSE(schedule_certified(t));
  const auto c2 = certify_block_divergence(t, 2);
  CHECK_FALSE(c2.passed);
  CHECK(c2.failed_at.rfind("(A)", 0) == 0);

  // raising lambda_m while keeping (B) keeps certificates valid
  auto up = s.lnln_K;
  up[8] += 0.5;
  CHECK(certify_block_divergence(replay_schedule(up), 8).passed);
}

TEST_CASE("moment (b) report") {
  const auto r = check_moment_b(build_schedule(9));
  CHECK(r.b_holds);
  CHECK(r.c_fails);
  CHECK(r.a_holds);
  CHECK(r.blocks_certified == 8);
  const auto one = check_moment_b(build_schedule(1));
  CHECK(one.blocks_expected == 0);
  CHECK_FALSE(one.c_fails);
  CHECK(one.notes.size() >= 2);
}
