#include "polybranch/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadratureResult scaled(QuadratureResult r, double theta) {
  if (r.divergent) return r;
  double g = std::tgamma(theta);
  r.value /= g;
  r.abs_error /= g;
  return r;
}

void check_x(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("x must be finite and >= 0");
}

}  // namespace

double hit_prob(const Mechanism& mech, double x, double y) {
  check_x(x);
  if (!(y >= 0.0) || y > x) throw DomainError("hit_prob: need 0 <= y <= x");
  return std::exp(-mech.profile().q * (x - y));
}

QuadratureResult mean_extinction_time(const Mechanism& mech, double x, Tolerance tol) {
  check_x(x);
  IntegrandParams p;
  p.x = x;
  return scaled(integrate(IntegrandKind::Extinction, mech, p, tol), mech.theta());
}

QuadratureResult mean_explosion_time(const Mechanism& mech, double x, Tolerance tol) {
  check_x(x);
  IntegrandParams p;
  p.x = x;
  return scaled(integrate(IntegrandKind::Explosion, mech, p, tol), mech.theta());
}

QuadratureResult mean_absorption_time(const Mechanism& mech, double x, Tolerance tol) {
  check_x(x);
  IntegrandParams p;
  p.x = x;
  return scaled(integrate(IntegrandKind::Absorption, mech, p, tol), mech.theta());
}

QuadratureResult mean_two_sided(const Mechanism& mech, double x, double y, Tolerance tol) {
  check_x(x);
  if (!(y >= 0.0) || y > x) throw DomainError("mean_two_sided: need 0 <= y <= x");
  IntegrandParams p;
  p.x = x;
  p.y = y;
  return scaled(integrate(IntegrandKind::TwoSided, mech, p, tol), mech.theta());
}

QuadratureResult mean_hit_from_infinity(const Mechanism& mech, double y, Tolerance tol) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("mean_hit_from_infinity: y must be finite and >= 0");
  if (mech.a() > 0.0 || mech.profile().beta < 0.0)
    throw DomainError("mean_hit_from_infinity: needs a = 0 and psi'(0) >= 0");
  IntegrandParams p;
  p.y = y;
  return scaled(integrate(IntegrandKind::FromInfinity, mech, p, tol), mech.theta());
}

double conditional_extinction_time(const Mechanism& mech, double x, Tolerance tol) {
  double p = hit_prob(mech, x, 0.0);
  if (p == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return mean_extinction_time(mech, x, tol).value / p;
}

double conditional_explosion_time(const Mechanism& mech, double x, Tolerance tol) {
  double p = 1.0 - hit_prob(mech, x, 0.0);
  if (p == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return mean_explosion_time(mech, x, tol).value / p;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Impossible: return "impossible";
    case Verdict::Possible: return "possible";
    case Verdict::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

ClassificationReport classify(const Mechanism& mech, double x) {
  check_x(x);
  const auto& pr = mech.profile();
  ClassificationReport r;
  r.x = x;
  r.q = pr.q;
  r.beta = pr.beta;
  r.psi_at_zero = pr.psi_at_zero;
  r.theta = mech.theta();
  r.grid_scan_positive = pr.grid_scan_positive;
  r.limit_zero_prob = std::exp(-pr.q * x);
  r.limit_infinity_prob = -std::expm1(-pr.q * x);

  Tolerance tol{1e-8, 0.0};

  {
    CriterionEvidence ev;
    ev.test = "extinction_tail";
    ev.kind = IntegrandKind::CriterionPositive;
    ev.lower = std::max(pr.q, 1.0) + 1.0;
    ev.upper = kInf;
    IntegrandParams p{x, 0.0, ev.lower, ev.upper};
    ev.finite = mech.extinction_possible();
    ev.integral = integrate(ev.kind, mech, p, tol);
    ev.note = "int lambda^(theta-1)/psi near infinity";
    r.evidence.push_back(ev);
    r.extinction = ev.finite ? Verdict::Possible : Verdict::Impossible;
    r.extinction_prob = ev.finite ? r.limit_zero_prob : 0.0;
  }

  if (mech.a() > 0.0) {
    r.explosion = Verdict::Possible;
    CriterionEvidence ev;
    ev.test = "explosion_origin";
    ev.finite = true;
    ev.note = "psi(0) = -a < 0: killing makes explosion possible";
    r.evidence.push_back(ev);
  } else if (pr.beta >= 0.0) {
    r.explosion = Verdict::Impossible;
    CriterionEvidence ev;
    ev.test = "explosion_origin";
    ev.finite = false;
    ev.note = "psi(0) = 0 and psi'(0) >= 0";
    r.evidence.push_back(ev);
  } else {
    CriterionEvidence ev;
    ev.test = "explosion_origin";
    ev.kind = IntegrandKind::CriterionNegative;
    ev.lower = 0.0;
    ev.upper = 0.5 * pr.q;
    IntegrandParams p{x, 0.0, ev.lower, ev.upper};
    ev.finite = mech.explosion_possible();
    ev.integral = integrate(ev.kind, mech, p, tol);
    ev.note = "int lambda^(theta-1)/(-psi) near 0, psi'(0) < 0";
    r.evidence.push_back(ev);
    r.explosion = ev.finite ? Verdict::Possible : Verdict::Impossible;
  }
  r.explosion_prob = r.explosion == Verdict::Possible ? r.limit_infinity_prob : 0.0;

  if (mech.a() == 0.0 && pr.beta >= 0.0) {
    CriterionEvidence ev;
    ev.test = "coming_down_origin";
    ev.kind = IntegrandKind::CriterionPositive;
    ev.lower = 0.0;
    ev.upper = 1.0;
    IntegrandParams p{x, 0.0, ev.lower, ev.upper};
    ev.finite = power_integrable(mech.theta() - 1.0 - pr.origin.exponent, -pr.origin.log_power, true);
    ev.integral = integrate(ev.kind, mech, p, tol);
    ev.note = "int lambda^(theta-1)/psi near 0";
    r.evidence.push_back(ev);
    r.comes_down = ev.finite ? Verdict::Possible : Verdict::Impossible;
  }
  return r;
}

}  // namespace polybranch
