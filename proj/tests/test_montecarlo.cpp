#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "polybranch/montecarlo.hpp"

using namespace polybranch;

namespace {

// killing plus drift: deterministic absorption at 2, killed first with probability 1 - e^{-1/2}
Mechanism killed_drift() { return Mechanism::quadratic(1.0, 0.0, 0.5, 0.5); }

bool same(const PathRecord& a, const PathRecord& b) {
  return a.absorbed == b.absorbed && a.absorbed_time == b.absorbed_time && a.level_time == b.level_time &&
         a.end_time == b.end_time && a.censored == b.censored && a.truncated == b.truncated;
}

}  // namespace

TEST_CASE("pairwise sum and summary") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v.data(), v.size()) == 500500.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
  Estimate e = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(e.point == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.ci_low() < 2.5);
  CHECK(e.ci_high() > 2.5);
}

TEST_CASE("parallel and serial kernels give identical records") {
  Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  McOptions o;
  o.dt = 1e-2;
  auto a = run_paths(m, 1.0, 10.0, 300, 99, o);
  auto b = run_paths_serial(m, 1.0, 10.0, 300, 99, o);
  REQUIRE(a.size() == b.size());
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < a.size(); ++k) mismatches += !same(a[k], b[k]);
  CHECK(mismatches == 0);
  auto ea = restricted_mean_from(a, Event::Either, 10.0), eb = restricted_mean_from(b, Event::Either, 10.0);
  CHECK(ea.point == eb.point);
  o.scheme = Scheme::Lamperti;
  auto la = run_paths(m, 1.0, 10.0, 100, 5, o), lb = run_paths_serial(m, 1.0, 10.0, 100, 5, o);
  mismatches = 0;
  for (std::size_t k = 0; k < la.size(); ++k) mismatches += !same(la[k], lb[k]);
  CHECK(mismatches == 0);
}

TEST_CASE("confidence intervals cover the truth at the nominal rate") {
  Mechanism m = killed_drift();
  const double target = 2.0 * std::exp(-0.5);
  McOptions o;
  o.dt = 2e-3;
  int covered = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    Estimate e = estimate_restricted_mean(m, 1.0, Event::Extinct, 10.0, 400, 1000 + r, o);
    CHECK(e.censored_fraction == 0.0);
    covered += e.ci_low() <= target && target <= e.ci_high();
  }
  CHECK(covered >= 90);
  Estimate p = estimate_extinction_prob(m, 1.0, 10.0, 4000, 7, o);
  CHECK(std::fabs(p.point - std::exp(-0.5)) <= 4.0 * p.std_error);
}

TEST_CASE("standard error scales like N^{-1/2}") {
  Mechanism m = killed_drift();
  McOptions o;
  o.dt = 5e-3;
  Estimate a = estimate_restricted_mean(m, 1.0, Event::Extinct, 10.0, 1000, 3, o);
  Estimate b = estimate_restricted_mean(m, 1.0, Event::Extinct, 10.0, 4000, 4, o);
  CHECK(a.std_error / b.std_error == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("starting at zero") {
  Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  Estimate e = estimate_extinction_prob(m, 0.0, 1.0, 50, 1);
  CHECK(e.point == 1.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("restricted means add up on uncensored records") {
  Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  McOptions o;
  o.dt = 1e-2;
  auto recs = run_paths(m, 1.0, 200.0, 500, 12, o);
  auto ext = restricted_mean_from(recs, Event::Extinct, 200.0);
  auto exp = restricted_mean_from(recs, Event::Exploded, 200.0);
  auto all = restricted_mean_from(recs, Event::Either, 200.0);
  REQUIRE(all.censored_fraction == 0.0);
  CHECK(ext.point + exp.point == doctest::Approx(all.point).epsilon(1e-12));
}

TEST_CASE("hit time estimator arguments") {
  Mechanism m = Mechanism::quadratic(1.0, 1.0, 1.5);
  CHECK_THROWS_AS(estimate_hit_time(m, 1.0, 2.0, 1.0, 10, 1), DomainError);
  CHECK_THROWS_AS(estimate_hit_time(m, 1.0, 0.0, 1.0, 10, 1), DomainError);
}
