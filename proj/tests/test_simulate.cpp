#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polybranch/simulate.hpp"

using namespace polybranch;

namespace {

Mechanism drift(double b, double theta) {
  MechanismSpec s;
  s.b = b;
  s.theta = theta;
  return Mechanism(s);
}

// midpoint rule for the mean of y^{-theta} along [y0, y1]
double mean_rate_oracle(double y0, double y1, double theta) {
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = (i + 0.5) / n;
    acc += std::pow(y0 + u * (y1 - y0), -theta);
  }
  return acc / n;
}

}  // namespace

TEST_CASE("segment_inverse_rate against midpoint integration") {
  for (double th : {0.5, 1.0, 1.5, 2.0})
    for (auto [y0, y1] : {std::pair{1.0, 2.0}, std::pair{3.0, 0.5}, std::pair{0.2, 0.2}}) {
      CHECK(segment_inverse_rate(y0, y1, th) == doctest::Approx(mean_rate_oracle(y0, y1, th)).epsilon(1e-6));
    }
  CHECK(segment_inverse_rate(2.0, 2.0, 1.5) == doctest::Approx(std::pow(2.0, -1.5)));
  // reaching zero: finite for theta < 1
  CHECK(segment_inverse_rate(1.0, 0.0, 0.5) == doctest::Approx(2.0));
  CHECK(std::isinf(segment_inverse_rate(1.0, 0.0, 1.0)));
}

TEST_CASE("truncated rate pieces") {
  CHECK(truncated_rate(4.0, 1.5, 100.0) == doctest::Approx(8.0));
  CHECK(truncated_rate(1000.0, 1.5, 100.0) == doctest::Approx(1000.0));
  CHECK(truncated_rate(0.001, 1.5, 100.0) == doctest::Approx(std::pow(100.0, 0.5) * 1e-6));
  CHECK(truncated_rate(0.0, 1.5, 100.0) == 0.0);
}

TEST_CASE("pure drift reaches zero at the deterministic time") {
  // x' = -b x^theta: tau = x^{1-theta} / (b (1 - theta))
  Mechanism m = drift(1.0, 0.5);
  PathSample s = euler_sde(m, 1.0, 5.0, 1e-4, 1048576.0, 1);
  REQUIRE(s.tau0.has_value());
  CHECK(*s.tau0 == doctest::Approx(2.0).epsilon(2e-3));
  CHECK(s.state_at(1.0) == doctest::Approx(0.25).epsilon(2e-3));
  CHECK(s.state_at(3.0) == 0.0);
}

TEST_CASE("Lamperti path of a drift follows the same curve") {
  Mechanism m = drift(1.0, 0.5);
  LevyPath p = sample_levy_path(m, 1.0, 5.0, 1e-3, 4);
  CHECK(p.absorbed == Boundary::Zero);
  CHECK(p.absorbed_time == doctest::Approx(1.0).epsilon(1e-9));
  PathSample s = inverse_lamperti(p, 0.5);
  REQUIRE(s.tau0.has_value());
  CHECK(*s.tau0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.state_at(1.0) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("inverse and forward Lamperti are mutually inverse") {
  MechanismSpec s;
  s.b = -0.9;
  s.theta = 0.5;
  s.measure.atoms = {{1.0, 1.0}};
  Mechanism m(s);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    LevyPath p = sample_levy_path(m, 1.0, 20.0, 1e-2, seed);
    PathSample x = inverse_lamperti(p, 0.5);
    LevyPath r = forward_lamperti(x, 0.5);
    REQUIRE(r.values.size() == p.values.size());
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      CHECK(r.values[k] == p.values[k]);
      CHECK(r.times[k] == doctest::Approx(p.times[k]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("coupled copies stay ordered") {
  Mechanism m = Mechanism::quadratic(-0.5, 1.0, 1.5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto [lo, hi] = coupled_pair(m, 1.0, 2.0, 3.0, 1e-3, seed);
    CHECK(ordering_violations(lo, hi) == 0);
  }
}

TEST_CASE("boundary rule for the quadratic mechanism") {
  BoundaryRule r = BoundaryRule::from(Mechanism::quadratic(-1.0, 1.0, 1.5));
  CHECK(r.infinity_reachable(1.5));
  CHECK_FALSE(r.infinity_reachable(1.0));
  CHECK(r.zero_reachable(1.5));
  CHECK_FALSE(r.zero_reachable(2.5));
  CHECK_FALSE(BoundaryRule::from(Mechanism::quadratic(1.0, 1.0, 1.5)).infinity_reachable(1.5));
}

TEST_CASE("crossing times from high levels are monotone in the level") {
  Mechanism m = Mechanism::quadratic(1.0, 1.0, 1.5);
  auto t = approx_from_infinity(m, 1.0, {2.0, 8.0, 32.0}, 50.0, 1e-3, 7);
  REQUIRE(t.size() == 3);
  CHECK(t[0] <= t[1]);
  CHECK(t[1] <= t[2]);
}

TEST_CASE("compound Poisson Levy path: jump count and slope") {
  // atom z = 1, w = 1 with b = -0.9: slope 0.9 - 1 between unit jumps arriving at rate 1
  MechanismSpec s;
  s.b = -0.9;
  s.theta = 0.5;
  s.measure.atoms = {{1.0, 1.0}};
  Mechanism m(s);
  const int N = 4000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < N; ++k) {
    LevyPath p = sample_levy_path(m, 5.0, 10.0, 1e-2, 100 + k);
    REQUIRE(p.absorbed == Boundary::None);
    double n = static_cast<double>(p.jumps.size());
    sum += n;
    sum2 += n * n;
    for (const auto& j : p.jumps) CHECK(j.size == 1.0);
    if (k == 0) {
      for (std::size_t i = 1; i < p.times.size(); ++i) {
        double slope = (p.left[i] - p.values[i - 1]) / (p.times[i] - p.times[i - 1]);
        CHECK(slope == doctest::Approx(-0.1).epsilon(1e-9));
      }
    }
  }
  double mean = sum / N, var = sum2 / N - mean * mean;
  CHECK(std::fabs(mean - 10.0) <= 3.0 * std::sqrt(10.0 / N));
  CHECK(var == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("snapshots after absorption hold the absorbed state") {
  Mechanism m = drift(1.0, 0.5);
  EulerOptions o;
  o.dt = 1e-3;
  o.snapshot_times = {1.0, 3.0, 4.0};
  Philox rng(1, 0);
  auto out = simulate_euler(m, {1.0}, 4.0, o, rng);
  REQUIRE(out[0].absorbed == Boundary::Zero);
  CHECK(out[0].snapshots[0] == doctest::Approx(0.25).epsilon(5e-3));
  CHECK(out[0].snapshots[1] == 0.0);
  CHECK(out[0].snapshots[2] == 0.0);
}
