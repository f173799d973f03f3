#include "polybranch/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <stdexcept>

#include "polybranch/kernel.hpp"

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A / B * lambda^e without spurious overflow for lambda near 0 or infinity
double combine(double A, double B, double lambda, double e) {
  if (A == 0.0 || std::isinf(B)) return 0.0;
  double r = A / B;
  if (r == 0.0) return 0.0;
  double lp = e * std::log(lambda);
  if (std::isfinite(r) && std::fabs(lp) < 600.0) return r * std::exp(lp);
  double lr = std::log(std::fabs(A)) - std::log(std::fabs(B)) + lp;
  return std::copysign(std::exp(lr), r);
}

struct Evaluator {
  IntegrandKind kind;
  const Mechanism& m;
  IntegrandParams p;
  HxKernel hx;
  double q, th, a, eqx;

  Evaluator(IntegrandKind k, const Mechanism& mech, const IntegrandParams& params)
      : kind(k), m(mech), p(params), hx(mech, params.x), q(mech.profile().q), th(mech.theta()), a(mech.a()),
        eqx(std::exp(-mech.profile().q * params.x)) {}

  // lambda is the integration variable, d = lambda - q
  double operator()(double lambda, double d) const {
    if (!(lambda > 0.0)) return 0.0;
    switch (kind) {
      case IntegrandKind::Absorption:
        if (a == 0.0) return combine(hx.reduced(lambda, d), 1.0, lambda, th - 2.0);
        return combine(hx.value(lambda, d), 1.0, lambda, th - 1.0);
      case IntegrandKind::Extinction:
        if (q == 0.0) return combine(hx.reduced(lambda, lambda), 1.0, lambda, th - 2.0);
        return combine(hx.shifted(lambda), 1.0, lambda, th - 1.0);
      case IntegrandKind::Explosion: {
        if (q == 0.0) return 0.0;
        double hq = hx.shifted(lambda);
        if (a == 0.0) return combine(hx.reduced(lambda, d) - lambda * hq, 1.0, lambda, th - 2.0);
        return combine(hx.value(lambda, d) - hq, 1.0, lambda, th - 1.0);
      }
      case IntegrandKind::TwoSided: {
        double x = p.x, y = p.y;
        if (x == y) return 0.0;
        const auto& prof = m.profile();
        if (q > 0.0 && std::fabs(d) <= hx.window()) {
          double v = eqx * (x - y) * (1.0 - 0.5 * d * (x + y)) / (prof.psi_prime_q + 0.5 * prof.psi_second_q * d);
          return combine(v, 1.0, lambda, th - 1.0);
        }
        if (q == 0.0) {
          double num = std::exp(-lambda * y) * (-std::expm1(-lambda * (x - y)) / lambda);
          return combine(num, m.psi_reduced(lambda), lambda, th - 1.0);
        }
        double num = eqx * std::exp(-d * y) * -std::expm1(-d * (x - y));
        if (a == 0.0) return combine(num, m.psi_reduced(lambda), lambda, th - 2.0);
        return combine(num, m.psi(lambda), lambda, th - 1.0);
      }
      case IntegrandKind::FromInfinity:
        return combine(std::exp(-lambda * p.y), m.psi_reduced(lambda), lambda, th - 2.0);
      case IntegrandKind::CriterionPositive:
      case IntegrandKind::CriterionNegative: {
        double s = kind == IntegrandKind::CriterionPositive ? 1.0 : -1.0;
        if (a == 0.0) return combine(1.0, s * m.psi_reduced(lambda), lambda, th - 2.0);
        return combine(1.0, s * m.psi(lambda), lambda, th - 1.0);
      }
    }
    return 0.0;
  }
};

bool q_is_node(IntegrandKind kind) {
  return kind == IntegrandKind::Absorption || kind == IntegrandKind::Explosion || kind == IntegrandKind::TwoSided ||
         kind == IntegrandKind::CriterionPositive || kind == IntegrandKind::CriterionNegative;
}

struct Piece {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  bool ok = true;
};

// Guards the engines against non-finite evaluations; any such point marks the piece as unconverged.
template <class F>
struct Guarded {
  F f;
  mutable bool bad = false;
  double operator()(double lambda, double d) const {
    double v = f(lambda, d);
    if (!std::isfinite(v)) {
      bad = true;
      return 0.0;
    }
    return v;
  }
};

Piece finite_piece(const Evaluator& ev, double lo, double hi, double anchor, double tol) {
  Piece out;
  if (!(hi > lo)) return out;
  Guarded<const Evaluator&> g{ev};
  boost::math::quadrature::tanh_sinh<double> ts(15);
  // anchor is q when q is an endpoint: d is rebuilt from the complement there
  auto f = [&](double t, double tc) {
    double lambda = t, d = t - ev.q;
    if (tc > 0.0 && anchor == hi) {
      lambda = hi - tc;
      d = (hi - ev.q) - tc;
    } else if (tc < 0.0 && anchor == lo) {
      lambda = lo - tc;
      d = (lo - ev.q) - tc;
    }
    return g(lambda, d);
  };
  try {
    out.value = ts.integrate(f, lo, hi, tol, &out.error, &out.l1, &out.levels);
  } catch (const std::exception&) {
    out.ok = false;
    out.value = std::numeric_limits<double>::quiet_NaN();
  }
  if (g.bad) out.ok = false;
  return out;
}

Piece infinite_piece(const Evaluator& ev, double lo, double tol) {
  Piece out;
  Guarded<const Evaluator&> g{ev};
  boost::math::quadrature::exp_sinh<double> es(9);
  double off = lo - ev.q;
  auto f = [&](double u) { return g(lo + u, off + u); };
  try {
    out.value = es.integrate(f, 0.0, kInf, tol, &out.error, &out.l1, &out.levels);
  } catch (const std::exception&) {
    out.ok = false;
    out.value = std::numeric_limits<double>::quiet_NaN();
  }
  if (g.bad) out.ok = false;
  return out;
}

}  // namespace

std::string to_string(IntegrandKind kind) {
  switch (kind) {
    case IntegrandKind::Absorption: return "absorption";
    case IntegrandKind::Extinction: return "extinction";
    case IntegrandKind::Explosion: return "explosion";
    case IntegrandKind::TwoSided: return "two_sided";
    case IntegrandKind::FromInfinity: return "from_infinity";
    case IntegrandKind::CriterionPositive: return "criterion_positive";
    case IntegrandKind::CriterionNegative: return "criterion_negative";
  }
  return "unknown";
}

std::vector<double> singular_points(IntegrandKind kind, const Mechanism& mech) {
  double q = mech.profile().q;
  if (q > 0.0 && q_is_node(kind)) return {0.0, q, kInf};
  return {0.0, kInf};
}

double integrand(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params, double lambda) {
  Evaluator ev(kind, mech, params);
  return ev(lambda, lambda - mech.profile().q);
}

bool analytically_divergent(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params) {
  const auto& pr = mech.profile();
  const double th = mech.theta();
  const double q = pr.q;
  const bool origin = params.lower == 0.0;
  const bool tail = std::isinf(params.upper);
  const bool killing = mech.a() > 0.0;

  auto origin_ok = [&](double shift) {
    return power_integrable(th - 1.0 - pr.origin.exponent + shift, -pr.origin.log_power, true);
  };
  auto tail_ok = [&](double shift) {
    return power_integrable(th - 1.0 - pr.tail.exponent + shift, -pr.tail.log_power, false);
  };
  // h_x-type origin behaviour: finite when a > 0, ~ 1/psi when q > 0, ~ lambda/psi when q = 0
  auto h_origin_ok = [&]() {
    if (killing) return true;
    return q > 0.0 ? origin_ok(0.0) : origin_ok(1.0);
  };

  switch (kind) {
    case IntegrandKind::Absorption:
      if (params.x == 0.0) return false;
      return (origin && !h_origin_ok()) || (tail && !tail_ok(0.0));
    case IntegrandKind::Extinction:
      if (params.x == 0.0) return false;
      return (origin && q == 0.0 && !h_origin_ok()) || (tail && !tail_ok(0.0));
    case IntegrandKind::Explosion:
      if (params.x == 0.0 || q == 0.0) return false;
      return (origin && !killing && !origin_ok(0.0)) || (tail && !tail_ok(-1.0));
    case IntegrandKind::TwoSided:
      if (params.x == params.y) return false;
      return (origin && !h_origin_ok()) || (tail && params.y == 0.0 && !tail_ok(0.0));
    case IntegrandKind::FromInfinity:
      return (origin && !origin_ok(0.0)) || (tail && params.y == 0.0 && !tail_ok(0.0));
    case IntegrandKind::CriterionPositive:
    case IntegrandKind::CriterionNegative:
      if (origin && killing) return false;
      return (origin && !origin_ok(0.0)) || (tail && !tail_ok(0.0));
  }
  return false;
}

QuadratureResult integrate(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params, Tolerance tol) {
  if (!(tol.rel > 0.0 || tol.abs > 0.0)) throw DomainError("integrate: tolerance must be positive");
  if (!(params.lower >= 0.0) || !(params.upper > params.lower) || std::isnan(params.upper))
    throw DomainError("integrate: need 0 <= lower < upper");
  if (!(params.x >= 0.0) || !std::isfinite(params.x)) throw DomainError("integrate: x must be finite and >= 0");
  if (kind == IntegrandKind::TwoSided && !(params.y >= 0.0 && params.y <= params.x))
    throw DomainError("integrate: two-sided kernel needs 0 <= y <= x");
  if (kind == IntegrandKind::FromInfinity && (mech.a() > 0.0 || mech.profile().beta < 0.0))
    throw DomainError("integrate: from-infinity kernel needs a = 0 and psi'(0) >= 0");

  QuadratureResult res;
  if (analytically_divergent(kind, mech, params)) {
    res.value = kInf;
    res.converged = true;
    res.divergent = true;
    return res;
  }

  Evaluator ev(kind, mech, params);
  const double q = mech.profile().q;
  const double lo = params.lower, hi = params.upper;
  const double btol = std::max(tol.rel, 1e-15);

  std::vector<Piece> pieces;
  bool split = q_is_node(kind) && q > lo && q < hi;
  if (split) {
    pieces.push_back(finite_piece(ev, lo, q, q, btol));
    if (std::isinf(hi))
      pieces.push_back(infinite_piece(ev, q, btol));
    else
      pieces.push_back(finite_piece(ev, q, hi, q, btol));
  } else {
    if (std::isinf(hi))
      pieces.push_back(infinite_piece(ev, lo, btol));
    else
      pieces.push_back(finite_piece(ev, lo, hi, lo == q ? lo : (hi == q ? hi : -1.0), btol));
  }

  double l1 = 0.0;
  bool ok = true;
  for (const auto& pc : pieces) {
    res.value += pc.value;
    res.abs_error += pc.error;
    res.subdivisions += static_cast<int>(pc.levels);
    l1 += pc.l1;
    ok = ok && pc.ok;
  }
  double target = std::max(tol.abs, tol.rel * l1);
  res.converged = ok && std::isfinite(res.value) && res.abs_error <= target;
  return res;
}

}  // namespace polybranch
