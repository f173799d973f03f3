#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "polybranch/mechanism.hpp"

using namespace polybranch;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// e^{-x} - 1 + x without cancellation for small x
double em1_plus(double x) {
  if (x > 0.1) return std::expm1(-x) + x;
  double term = x * x / 2.0, acc = 0.0;
  for (int k = 3; k < 14; ++k) {
    acc += term;
    term *= -x / k;
  }
  return acc;
}

// int C z^{-1-alpha} (e^{-lz} - 1 + l z 1{z<=1}) dz via z = e^s, split at the indicator jump.
double stable_oracle(double alpha, double C, double l) {
  auto f = [&](double s, bool small) {
    double z = std::exp(s);
    double core = small ? em1_plus(l * z) : std::expm1(-l * z);
    return C * std::exp(-alpha * s) * core;
  };
  return simpson([&](double s) { return f(s, true); }, -240.0, 0.0, 1200000) +
         simpson([&](double s) { return f(s, false); }, 0.0, 60.0, 400000);
}

MechanismSpec quad_spec(double a, double b, double c, double theta) {
  MechanismSpec s;
  s.a = a;
  s.b = b;
  s.c = c;
  s.theta = theta;
  s.measure.killing = a;
  return s;
}

}  // namespace

TEST_CASE("psi on the polynomial and one-atom examples") {
  CHECK(Mechanism::quadratic(1.0, 1.0, 1.5).psi(2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(Mechanism::quadratic(0.0, 1.0, 1.0, 0.5).psi(0.0) == -0.5);

  MechanismSpec s = quad_spec(0.0, 0.0, 0.0, 1.0);
  s.measure.atoms = {{1.0, 1.0}};
  Mechanism m(s);
  CHECK(m.psi(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("stable part agrees with direct integration of the Levy measure") {
  for (double alpha : {0.5, 1.0, 1.5, 1.8}) {
    MechanismSpec s = quad_spec(0.0, 0.0, 0.0, 1.0);
    s.measure.stable = StableSpec{alpha, 0.7};
    if (alpha < 1.0) s.b = 1.0;  // keep psi > 0 somewhere
    Mechanism m(s);
    for (double l : {0.3, 1.0, 2.0, 4.0}) {
      double oracle = s.b * l + stable_oracle(alpha, 0.7, l);
      CHECK(m.psi(l) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("normalised stable mechanism is lambda^alpha") {
  Mechanism m = Mechanism::pure_stable(1.5, 1.0);
  CHECK(m.psi(4.0) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(m.psi(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.psi(2.0) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("psi_prime values") {
  CHECK(Mechanism::quadratic(1.0, 1.0, 1.0).psi_prime(0.0) == 1.0);
  CHECK(Mechanism::quadratic(1.0, 1.0, 1.0).psi_prime(3.0) == doctest::Approx(7.0));
  MechanismSpec s = quad_spec(0.0, 0.0, 1.0, 1.0);
  s.measure.atoms = {{2.0, 3.0}};
  CHECK(Mechanism(s).psi_prime(0.0) == doctest::Approx(-6.0));
  MechanismSpec h = quad_spec(0.0, 0.0, 1.0, 1.0);
  h.measure.stable = StableSpec{0.8, 1.0};
  CHECK(std::isinf(Mechanism(h).psi_prime(0.0)));
  CHECK(Mechanism(h).psi_prime(0.0) < 0.0);
}

TEST_CASE("psi_prime matches central differences") {
  MechanismSpec s = quad_spec(0.3, -0.5, 0.4, 1.2);
  s.measure.atoms = {{0.5, 1.0}, {3.0, 0.2}};
  s.measure.stable = StableSpec{1.3, 0.6};
  Mechanism m(s);
  for (double l : {0.1, 1.0, 10.0}) {
    double h = 1e-5 * l;
    double fd = (m.psi(l + h) - m.psi(l - h)) / (2.0 * h);
    CHECK(m.psi_prime(l) == doctest::Approx(fd).epsilon(1e-6));
    double fd2 = (m.psi_prime(l + h) - m.psi_prime(l - h)) / (2.0 * h);
    CHECK(m.psi_second(l) == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("root q") {
  CHECK(Mechanism::quadratic(-1.0, 1.0, 1.0).profile().q == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(Mechanism::quadratic(1.0, 1.0, 1.0).profile().q == 0.0);
  double q = Mechanism::quadratic(-1.0, 1.0, 1.0, 0.25).profile().q;
  // independent bisection on lambda^2 - lambda - 0.25
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (mid * mid - mid - 0.25 > 0.0 ? hi : lo) = mid;
  }
  CHECK(q == doctest::Approx(lo).epsilon(1e-13));
  CHECK(q == doctest::Approx((1.0 + std::sqrt(2.0)) / 2.0).epsilon(1e-13));
}

TEST_CASE("root q brackets the sign change") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ub(-2.0, 1.0), uc(0.1, 2.0), ua(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    MechanismSpec s = quad_spec(ua(gen), ub(gen), uc(gen), 1.5);
    s.measure.atoms = {{0.7, ua(gen) + 0.1}, {2.5, 0.3}};
    Mechanism m(s);
    double q = m.profile().q;
    double eps = 1e-9 * (1.0 + q);
    CHECK(m.psi(q + eps) > 0.0);
    CHECK(m.psi(std::max(q - eps, 0.0)) <= 0.0);
  }
}

TEST_CASE("convexity and psi(0) = -a on random mechanisms") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    MechanismSpec s = quad_spec(u(gen), 2.0 * u(gen) - 1.0, u(gen) + 0.05, 1.0);
    s.measure.atoms = {{0.1 + 3.0 * u(gen), u(gen) + 0.01}};
    if (k % 2) s.measure.stable = StableSpec{0.3 + 1.6 * u(gen), u(gen) + 0.1};
    Mechanism m(s);
    CHECK(m.psi(0.0) == -s.a);
    for (int j = 0; j < 20; ++j) {
      double l1 = 10.0 * u(gen), l2 = 10.0 * u(gen);
      CHECK(m.psi(0.5 * (l1 + l2)) <= 0.5 * (m.psi(l1) + m.psi(l2)) + 1e-12 * (1.0 + std::fabs(m.psi(l1))));
    }
  }
}

TEST_CASE("generator on exponentials") {
  Mechanism m = Mechanism::quadratic(1.0, 1.0, 2.0);
  CHECK(m.generator_on_exponential(1.0, 0.0) == 0.0);
  CHECK(m.generator_on_exponential(1.0, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(m.generator_on_exponential(1.0, 1e4) == 0.0);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(Mechanism(quad_spec(-1.0, 0.0, 1.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(Mechanism(quad_spec(0.0, 0.0, 1.0, 0.0)), ValidationError);
  MechanismSpec mismatch = quad_spec(0.5, 0.0, 1.0, 1.0);
  mismatch.measure.killing = 0.0;
  CHECK_THROWS_AS(Mechanism{mismatch}, ValidationError);
  // -psi a subordinator exponent: negative drift, small compensated jumps only
  MechanismSpec sub = quad_spec(0.0, -1.0, 0.0, 1.0);
  sub.measure.atoms = {{0.5, 1.0}};
  CHECK_THROWS_AS(Mechanism{sub}, ValidationError);
  CHECK_THROWS_AS(Mechanism::quadratic(1.0, 1.0, 1.0).psi(-1.0), DomainError);
  CHECK_THROWS_AS(Mechanism::quadratic(1.0, 1.0, 1.0).psi(std::nan("")), DomainError);
}

TEST_CASE("profile power laws") {
  auto q = Mechanism::quadratic(1.0, 1.0, 1.5).profile();
  CHECK(q.tail.exponent == 2.0);
  CHECK(q.origin.exponent == 1.0);
  auto st = Mechanism::pure_stable(1.5, 1.0).profile();
  CHECK(st.tail.exponent == 1.5);
  CHECK(st.origin.exponent == 1.5);
  CHECK(st.beta == doctest::Approx(0.0).epsilon(1e-12));
  auto k = Mechanism::quadratic(1.0, 1.0, 1.0, 0.5).profile();
  CHECK(k.origin.exponent == 0.0);
  CHECK(k.grid_scan_positive);
}

TEST_CASE("power_integrable") {
  CHECK(power_integrable(-0.5, 0, true));
  CHECK_FALSE(power_integrable(-1.0, 0, true));
  CHECK(power_integrable(-1.0, -2, true));
  CHECK(power_integrable(-1.5, 0, false));
  CHECK_FALSE(power_integrable(-0.5, 0, false));
}
