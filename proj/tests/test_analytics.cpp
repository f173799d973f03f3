#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polybranch/analytics.hpp"

using namespace polybranch;

// Reference values below were produced once by an independent arbitrary-precision quadrature
// of the same integrals and are frozen here.
namespace ref {
constexpr double from_inf_y0 = 3.5449077018110320546;  // 2 sqrt(pi)
constexpr double from_inf_y1 = 1.5157443123;
constexpr double absorption_sub = 2.0291633895;       // b = c = 1, theta = 1.5, x = 1
constexpr double two_sided_sub = 0.3239321546;        // x = 2, y = 1
constexpr double extinction_sup = 0.746487493785;     // b = -1, c = 1, theta = 1.5, x = 1
constexpr double explosion_sup = 1.405830533866;
constexpr double two_sided_sup = 1.0183660764;
}  // namespace ref

TEST_CASE("hit probabilities") {
  Mechanism sup = Mechanism::quadratic(-1.0, 1.0, 1.5);
  CHECK(hit_prob(sup, 1.0, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(hit_prob(Mechanism::quadratic(1.0, 1.0, 1.5), 5.0, 1.0) == 1.0);
  // q = 0.5: psi = lambda^2 - lambda/2
  Mechanism half = Mechanism::quadratic(-0.5, 1.0, 1.0);
  CHECK(hit_prob(half, 3.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hit_prob(sup, 1.0, 2.0), DomainError);
  // multiplicative in the levels
  CHECK(hit_prob(sup, 3.0, 2.0) * hit_prob(sup, 2.0, 0.5) == doctest::Approx(hit_prob(sup, 3.0, 0.5)));
}

TEST_CASE("mean times for the subcritical quadratic mechanism") {
  Mechanism m = Mechanism::quadratic(1.0, 1.0, 1.5);
  CHECK(mean_hit_from_infinity(m, 0.0).value == doctest::Approx(ref::from_inf_y0).epsilon(1e-9));
  CHECK(mean_hit_from_infinity(m, 0.0).value == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-9));
  CHECK(mean_hit_from_infinity(m, 1.0).value == doctest::Approx(ref::from_inf_y1).epsilon(1e-9));
  CHECK(mean_absorption_time(m, 1.0).value == doctest::Approx(ref::absorption_sub).epsilon(1e-9));
  CHECK(mean_extinction_time(m, 1.0).value == doctest::Approx(ref::absorption_sub).epsilon(1e-9));
  CHECK(mean_explosion_time(m, 1.0).value == 0.0);
  CHECK(mean_two_sided(m, 2.0, 1.0).value == doctest::Approx(ref::two_sided_sub).epsilon(1e-9));
  CHECK(mean_two_sided(m, 2.0, 2.0).value == 0.0);
}

TEST_CASE("mean times for the supercritical quadratic mechanism") {
  Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  auto e = mean_extinction_time(m, 1.0), x = mean_explosion_time(m, 1.0), a = mean_absorption_time(m, 1.0);
  CHECK(e.value == doctest::Approx(ref::extinction_sup).epsilon(1e-9));
  CHECK(x.value == doctest::Approx(ref::explosion_sup).epsilon(1e-9));
  CHECK(a.value == doctest::Approx(ref::extinction_sup + ref::explosion_sup).epsilon(1e-9));
  CHECK(mean_two_sided(m, 2.0, 1.0).value == doctest::Approx(ref::two_sided_sup).epsilon(1e-9));
  CHECK_THROWS_AS(mean_hit_from_infinity(m, 1.0), DomainError);
}

TEST_CASE("divergent restricted means return +inf") {
  // psi = lambda^1.5, theta = 1: h_x ~ x lambda^{-0.5} at 0 is integrable, tail lambda^{-1.5} too,
  // so the absorption mean is finite; theta = 2.5 makes the tail diverge
  Mechanism st1 = Mechanism::pure_stable(1.5, 1.0);
  auto r1 = mean_absorption_time(st1, 1.0);
  CHECK_FALSE(r1.divergent);
  CHECK(std::isfinite(r1.value));
  Mechanism st2 = Mechanism::pure_stable(1.5, 2.5);
  auto r2 = mean_absorption_time(st2, 1.0);
  CHECK(r2.divergent);
  CHECK(std::isinf(r2.value));
  // quadratic, theta = 1: E(tau^inf_y) diverges at the origin
  CHECK(mean_hit_from_infinity(Mechanism::quadratic(1.0, 1.0, 1.0), 1.0).divergent);
  CHECK(mean_hit_from_infinity(Mechanism::quadratic(1.0, 1.0, 2.0), 0.0).divergent);
  CHECK_FALSE(mean_hit_from_infinity(Mechanism::quadratic(1.0, 1.0, 1.9), 0.0).divergent);
}

TEST_CASE("pure stable at theta = 1 comes down with a finite mean") {
  // int_0^inf lambda^{-1.5} e^{-lambda} ... evaluated: E tau(1) = Gamma(-0.5)-type closed form 2 sqrt(pi)
  Mechanism m = Mechanism::pure_stable(1.5, 1.0);
  CHECK(mean_absorption_time(m, 1.0).value == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-8));
}

TEST_CASE("additivity on random quadratic mechanisms") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ub(-1.5, 1.5), uc(0.2, 2.0), ut(1.05, 1.9), ux(0.2, 3.0), ua(0.0, 0.5);
  Tolerance tol{1e-9, 0.0};
  for (int k = 0; k < 15; ++k) {
    Mechanism m = Mechanism::quadratic(ub(gen), uc(gen), ut(gen), k % 3 == 0 ? ua(gen) : 0.0);
    double x = ux(gen);
    auto e = mean_extinction_time(m, x, tol), xp = mean_explosion_time(m, x, tol), a = mean_absorption_time(m, x, tol);
    CHECK(std::fabs(e.value + xp.value - a.value) <= 3.0 * tol.rel * a.value);
  }
}

TEST_CASE("two-sided mean is monotone in both levels") {
  Mechanism m = Mechanism::quadratic(-0.5, 1.0, 1.5);
  double prev = -1.0;
  for (double x : {1.0, 1.5, 2.0, 3.0}) {
    double v = mean_two_sided(m, x, 0.8).value;
    CHECK(v > prev);
    prev = v;
  }
  prev = 1e9;
  for (double y : {0.2, 0.5, 1.0, 1.5}) {
    double v = mean_two_sided(m, 2.0, y).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("small starting points give small means") {
  Mechanism m = Mechanism::quadratic(1.0, 1.0, 1.5);
  double prev = 1e9;
  for (double x : {1e-1, 1e-2, 1e-3}) {
    double v = mean_absorption_time(m, x).value;
    CHECK(v < prev);
    prev = v;
  }
  // E tau(x) ~ const * x^{1/2} near the origin for this mechanism
  double r = mean_absorption_time(m, 1e-4).value / mean_absorption_time(m, 1e-6).value;
  CHECK(r == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("classification examples") {
  auto quad2 = classify(Mechanism::quadratic(1.0, 1.0, 2.0), 1.0);
  CHECK(quad2.extinction == Verdict::Impossible);
  CHECK(quad2.extinction_prob == 0.0);

  auto quad15 = classify(Mechanism::quadratic(-1.0, 1.0, 1.5), 1.0);
  CHECK(quad15.extinction == Verdict::Possible);
  CHECK(quad15.extinction_prob == doctest::Approx(std::exp(-1.0)));
  CHECK(quad15.explosion == Verdict::Possible);
  CHECK(quad15.explosion_prob == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(quad15.comes_down == Verdict::NotApplicable);

  auto low = classify(Mechanism::quadratic(-1.0, 1.0, 0.5), 1.0);
  CHECK(low.explosion == Verdict::Impossible);

  auto st = classify(Mechanism::pure_stable(1.5, 2.0), 1.0);
  CHECK(st.comes_down == Verdict::Possible);

  auto nd = classify(Mechanism::quadratic(1.0, 1.0, 1.0), 1.0);
  CHECK(nd.comes_down == Verdict::Impossible);

  CHECK(quad15.limit_zero_prob == hit_prob(Mechanism::quadratic(-1.0, 1.0, 1.5), 1.0, 0.0));
  CHECK(quad15.limit_zero_prob + quad15.limit_infinity_prob == doctest::Approx(1.0));
}

TEST_CASE("classification agrees with finiteness of the restricted means") {
  for (double th : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    Mechanism m = Mechanism::quadratic(1.0, 1.0, th);
    auto r = classify(m, 1.0);
    auto e = mean_extinction_time(m, 1.0);
    // finite extinction mean forces extinction to be possible
    if (!e.divergent) CHECK(r.extinction == Verdict::Possible);
    if (r.extinction == Verdict::Impossible) CHECK(e.divergent);
  }
}

TEST_CASE("conditional means") {
  Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  CHECK(conditional_extinction_time(m, 1.0) == doctest::Approx(ref::extinction_sup / std::exp(-1.0)).epsilon(1e-9));
  CHECK(conditional_explosion_time(m, 1.0) ==
        doctest::Approx(ref::explosion_sup / (1.0 - std::exp(-1.0))).epsilon(1e-9));
}
