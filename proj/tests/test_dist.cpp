#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccl/dist.hpp"
#include "ccl/normal.hpp"
#include "ccl/seqkit.hpp"

using namespace ccl;

TEST_CASE("tails") {
  const Dist r = Dist::rademacher();
  CHECK(tail(r, 1.0) == 1.0);
  CHECK(tail(r, 1.1) == 0.0);
  CHECK(strict_tail(r, 1.0) == 0.0);
  CHECK(tail(Dist::uniform(1.0), 0.5) == doctest::Approx(0.5));
  CHECK(tail(Dist::pareto(1.5, 1.0), 10.0) == doctest::Approx(std::pow(10.0, -1.5)).epsilon(1e-14));
  CHECK(tail(Dist::normal(), 1.96) == doctest::Approx(2 * 0.024997895148220436).epsilon(1e-14));
  CHECK(cdf(r, -1.0) == 0.5);
  CHECK(cdf(r, 0.0) == 0.5);
}

TEST_CASE("truncated moments") {
  const Dist r = Dist::rademacher();
  CHECK(truncated_moment(r, 2.0, 2.0).value == 1.0);
  CHECK(truncated_moment(r, 2.0, 0.5).value == 0.0);
  CHECK(truncated_moment(Dist::uniform(1.0), 2.0, 0.5).value == doctest::Approx(1.0 / 24.0).epsilon(1e-14));

  const Dist n = Dist::normal();
  const double nu[] = {2.0, 2.0, 3.0, 0.5, 2.0};
  const double b[] = {1.0, 2.0, 1.5, 1.0, 0.5};
  const double want[] = {0.19874804309879920, 0.73853587005088938, 0.49486955844565103, 0.43405878320313845,
                         0.030859595783726730};
  for (int i = 0; i < 5; ++i) {
    CAPTURE(i);
    CHECK(rel_diff(truncated_moment(n, nu[i], b[i]).value, want[i]) < 1e-12);
  }
}

TEST_CASE("truncated second moment sequence") {
  const NormSeq a = spataru_norm();
  CHECK(truncated_second_moment(Dist::rademacher(), 1.0, a, 2) == 1.0);
  CHECK(truncated_second_moment(Dist::rademacher(), 0.5, power_norm(1.0), 1) == 0.0);
  double prev = 0.0;
  for (long n : {2L, 10L, 100L, 10000L, 1000000L}) {
    const double t = truncated_second_moment(Dist::normal(), 1.0, a, n);
    CHECK(t >= prev);
    CHECK(t <= 1.0);
    prev = t;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("log plus and weighted second moments") {
  CHECK(log_plus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_plus(std::exp(1.0) - 2.0) == doctest::Approx(1.0));
  CHECK(log_plus(98.0) == doctest::Approx(4.605170185988091));

  CHECK(weighted_second_moment(Dist::rademacher(), InvLogPlus{}).value ==
        doctest::Approx(0.91023922662683739).epsilon(1e-15));
  CHECK(weighted_second_moment(Dist::atomic({}), InvLogPlus{}).value == 0.0);
  CHECK_FALSE(weighted_second_moment(Dist::pareto(1.5), InvLogPlus{}).is_finite());
  CHECK(rel_diff(weighted_second_moment(Dist::normal(), InvLogPlus{}).value, 0.81040478135956202) < 1e-10);
  CHECK(rel_diff(weighted_second_moment(Dist::normal(), LogLogDelta{1.0}).value, 1.1159323974285721) < 1e-10);
  CHECK(rel_diff(weighted_second_moment(Dist::uniform(1.0), InvLogPlus{}).value, 0.33225716133629555) < 1e-10);
  CHECK(rel_diff(weighted_second_moment(Dist::pareto(3.0, 1.0), InvLogPlus{}).value, 2.0355496651607372) < 1e-8);
}

TEST_CASE("moments") {
  CHECK(full_moment(Dist::normal(), 2.0).value == doctest::Approx(1.0));
  CHECK_FALSE(full_moment(Dist::pareto(1.5), 2.0).is_finite());
  CHECK(full_moment(Dist::pareto(3.0, 1.0), 2.0).value == doctest::Approx(3.0));
  CHECK(full_moment(Dist::uniform(2.0), 2.0).value == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("sampling") {
  const SeedStream s{11, 0, 0, 0};
  CHECK(sample(Dist::normal(), s, 0).empty());

  const auto r = sample(Dist::rademacher(), s, 1'000'000);
  CHECK(std::fabs(std::accumulate(r.begin(), r.end(), 0.0) / 1e6) < 4e-3);

  const auto u = sample(Dist::uniform(1.0), s.with_batch(1), 1'000'000);
  double m2 = 0.0;
  for (double x : u) m2 += x * x;
  CHECK(std::fabs(m2 / 1e6 - 1.0 / 3.0) < 5e-3);

  const Dist ms(LogAtomicSym{{{100.0, -50.0}}});
  CHECK_THROWS_AS(sample(ms, s, 10), SamplingUnavailable);
}

TEST_CASE("lattice atoms") {
  const auto r = lattice_atoms(Dist::rademacher());
  REQUIRE(r);
  CHECK(r->step == 1.0);
  CHECK_FALSE(lattice_atoms(Dist::normal()));
  const auto a = lattice_atoms(Dist::atomic({{0.5, 0.4}, {1.5, 0.2}}));
  REQUIRE(a);
  CHECK(a->step == doctest::Approx(0.5));
  double mass = 0.0;
  for (auto& [k, p] : a->atoms) mass += p;
  CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("parse_dist and validation") {
  CHECK(std::holds_alternative<NormalStd>(parse_dist("normal").kind()));
  CHECK(std::holds_alternative<ParetoSym>(parse_dist("pareto(1.5)").kind()));
  CHECK(std::holds_alternative<AtomicSym>(parse_dist("atomic(1:0.5,2:0.25)").kind()));
  CHECK_THROWS_AS(parse_dist("cauchy"), std::invalid_argument);
  CHECK_THROWS_AS(Dist::uniform(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Dist::atomic({{1.0, 0.7}, {2.0, 0.7}}), std::invalid_argument);
  CHECK(Dist::atomic({{1.0, 0.25}}).zero_mass() == doctest::Approx(0.75));
}
