#include "polybranch/mechanism.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (e^-u - 1 + u) / u
double e1_over_u(double u) {
  if (u < 0.5) {
    double term = 1.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      term *= u / (k + 1);
      double t = (k % 2 == 1) ? term : -term;
      sum += t;
      if (std::fabs(t) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  return (std::expm1(-u) + u) / u;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

bool power_integrable(double e, int k, bool at_origin) {
  if (at_origin) {
    if (e > -1.0) return true;
    if (e < -1.0) return false;
  } else {
    if (e < -1.0) return true;
    if (e > -1.0) return false;
  }
  return k < -1;
}

double stable_linear_shift(double alpha, double scale) {
  if (alpha > 1.0) return -scale / (alpha - 1.0);
  if (alpha < 1.0) return scale / (1.0 - alpha);
  return scale * (std::numbers::egamma - 1.0);
}

double stable_psi_part(double alpha, double scale, double lambda) {
  if (lambda == 0.0) return 0.0;
  if (alpha == 1.0) return scale * lambda * std::log(lambda);
  return scale * std::tgamma(-alpha) * std::pow(lambda, alpha);
}

Mechanism::Mechanism(const MechanismSpec& spec) : spec_(spec) {
  validate();
  lin_ = spec_.b;
  for (const auto& at : spec_.measure.atoms)
    if (at.z > 1.0) lin_ -= at.w * at.z;
  if (spec_.measure.stable)
    lin_ += stable_linear_shift(spec_.measure.stable->alpha, spec_.measure.stable->scale);
  build_profile();
}

Mechanism Mechanism::pure_stable(double alpha, double theta) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw ValidationError("pure stable mechanism needs alpha in (1,2)");
  MechanismSpec s;
  double scale = 1.0 / std::tgamma(-alpha);
  s.measure.stable = StableSpec{alpha, scale};
  s.b = -stable_linear_shift(alpha, scale);
  s.theta = theta;
  return Mechanism(s);
}

Mechanism Mechanism::quadratic(double b, double c, double theta, double a) {
  MechanismSpec s;
  s.a = a;
  s.b = b;
  s.c = c;
  s.theta = theta;
  s.measure.killing = a;
  return Mechanism(s);
}

bool Mechanism::finite_variation() const { return spec_.c == 0.0 && !has_stable(); }

void Mechanism::validate() const {
  const auto& s = spec_;
  if (!finite_nonneg(s.a)) throw ValidationError("killing rate a must be finite and >= 0");
  if (!std::isfinite(s.b)) throw ValidationError("drift b must be finite");
  if (!finite_nonneg(s.c)) throw ValidationError("diffusion c must be finite and >= 0");
  if (!(std::isfinite(s.theta) && s.theta > 0.0)) throw ValidationError("theta must be finite and > 0");
  if (s.measure.killing != s.a) throw ValidationError("measure killing mass must equal a");
  for (const auto& at : s.measure.atoms) {
    if (!(std::isfinite(at.z) && at.z > 0.0)) throw ValidationError("atom size must be finite and > 0");
    if (!(std::isfinite(at.w) && at.w > 0.0)) throw ValidationError("atom mass must be finite and > 0");
  }
  if (s.measure.stable) {
    const auto& st = *s.measure.stable;
    if (!(st.alpha > 0.0 && st.alpha < 2.0)) throw ValidationError("stable alpha must lie in (0,2)");
    if (!(std::isfinite(st.scale) && st.scale > 0.0)) throw ValidationError("stable scale must be finite and > 0");
  }
}

double Mechanism::psi_reduced(double lambda) const {
  double r = lin_ + spec_.c * lambda;
  for (const auto& at : spec_.measure.atoms) r += at.w * at.z * e1_over_u(lambda * at.z);
  if (spec_.measure.stable) {
    const auto& st = *spec_.measure.stable;
    if (st.alpha == 1.0)
      r += st.scale * std::log(lambda);
    else
      r += st.scale * std::tgamma(-st.alpha) * std::pow(lambda, st.alpha - 1.0);
  }
  return r;
}

double Mechanism::psi(double lambda) const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("psi: lambda must be finite and >= 0");
  if (lambda == 0.0) return -spec_.a;
  return -spec_.a + lambda * psi_reduced(lambda);
}

double Mechanism::psi_prime(double lambda) const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("psi_prime: lambda must be finite and >= 0");
  if (lambda == 0.0) return profile_.beta;
  double d = lin_ + 2.0 * spec_.c * lambda;
  for (const auto& at : spec_.measure.atoms) d -= at.w * at.z * std::expm1(-lambda * at.z);
  if (spec_.measure.stable) {
    const auto& st = *spec_.measure.stable;
    if (st.alpha == 1.0)
      d += st.scale * (std::log(lambda) + 1.0);
    else
      d += st.scale * st.alpha * std::tgamma(-st.alpha) * std::pow(lambda, st.alpha - 1.0);
  }
  return d;
}

double Mechanism::psi_second(double lambda) const {
  if (!std::isfinite(lambda) || lambda <= 0.0) throw DomainError("psi_second: lambda must be finite and > 0");
  double d = 2.0 * spec_.c;
  for (const auto& at : spec_.measure.atoms) d += at.w * at.z * at.z * std::exp(-lambda * at.z);
  if (spec_.measure.stable) {
    const auto& st = *spec_.measure.stable;
    d += st.scale * std::tgamma(2.0 - st.alpha) * std::pow(lambda, st.alpha - 2.0);
  }
  return d;
}

double Mechanism::generator_on_exponential(double lambda, double x) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("generator: lambda must be > 0");
  if (!(x >= 0.0)) throw DomainError("generator: x must be >= 0");
  if (x == 0.0 || std::isinf(x)) return 0.0;
  double e = std::exp(-lambda * x);
  if (e == 0.0) return 0.0;
  return std::pow(x, spec_.theta) * psi(lambda) * e;
}

void Mechanism::build_profile() {
  const auto& s = spec_;
  const auto& st = s.measure.stable;
  MechanismProfile p;
  p.psi_at_zero = -s.a;

  double atom_sq = 0.0, atom_mean = 0.0;
  for (const auto& at : s.measure.atoms) {
    atom_sq += 0.5 * at.w * at.z * at.z;
    atom_mean += at.w * at.z;
  }

  bool stable_heavy = st && st->alpha <= 1.0;
  p.beta = stable_heavy ? -kInf : lin_;

  // tail
  double drift_tail = lin_ + atom_mean;
  if (s.c > 0.0) {
    p.tail = {2.0, 0, s.c};
  } else if (st && st->alpha > 1.0) {
    p.tail = {st->alpha, 0, st->scale * std::tgamma(-st->alpha)};
  } else if (st && st->alpha == 1.0) {
    p.tail = {1.0, 1, st->scale};
  } else {
    p.tail = {1.0, 0, drift_tail};
  }
  bool analytic_positive = s.c > 0.0 || (st && st->alpha >= 1.0) || drift_tail > 0.0;
  if (!analytic_positive)
    throw ValidationError("standing assumption violated: psi(lambda) <= 0 for all lambda (subordinator exponent)");

  // origin
  if (s.a > 0.0) {
    p.origin = {0.0, 0, -s.a};
  } else if (st && st->alpha < 1.0) {
    p.origin = {st->alpha, 0, st->scale * std::tgamma(-st->alpha)};
  } else if (st && st->alpha == 1.0) {
    p.origin = {1.0, 1, st->scale};
  } else if (lin_ != 0.0) {
    p.origin = {1.0, 0, lin_};
  } else if (st) {
    p.origin = {st->alpha, 0, st->scale * std::tgamma(-st->alpha)};
  } else {
    p.origin = {2.0, 0, s.c + atom_sq};
  }

  p.grid_scan_positive = false;
  for (int k = -40; k <= 60 && !p.grid_scan_positive; ++k)
    if (psi(std::ldexp(1.0, k)) > 0.0) p.grid_scan_positive = true;

  profile_ = p;
  profile_.q = find_root();
  if (profile_.q > 0.0) {
    profile_.psi_prime_q = psi_prime(profile_.q);
    profile_.psi_second_q = psi_second(profile_.q);
  } else {
    profile_.psi_prime_q = profile_.beta;
    profile_.psi_second_q = 0.0;
  }
}

double Mechanism::find_root() const {
  if (spec_.a == 0.0 && profile_.beta >= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  if (psi(hi) > 0.0) {
    while (true) {
      double mid = 0.5 * hi;
      if (mid < 1e-300) return 0.0;
      if (psi(mid) <= 0.0) {
        lo = mid;
        break;
      }
      hi = mid;
    }
  } else {
    lo = hi;
    while (true) {
      hi = 2.0 * lo;
      if (hi > 1e300) throw ValidationError("standing assumption violated: no lambda with psi(lambda) > 0");
      if (psi(hi) > 0.0) break;
      lo = hi;
    }
  }
  while (true) {
    double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (psi(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

bool Mechanism::extinction_possible() const {
  const auto& t = profile_.tail;
  return power_integrable(spec_.theta - 1.0 - t.exponent, -t.log_power, false);
}

bool Mechanism::explosion_possible() const {
  if (spec_.a > 0.0) return true;
  if (profile_.beta >= 0.0) return false;
  const auto& o = profile_.origin;
  return power_integrable(spec_.theta - 1.0 - o.exponent, -o.log_power, true);
}

double psi(const Mechanism& m, double lambda) { return m.psi(lambda); }
double psi_prime(const Mechanism& m, double lambda) { return m.psi_prime(lambda); }
double root_q(const Mechanism& m) { return m.profile().q; }
double generator_on_exponential(const Mechanism& m, double lambda, double x) {
  return m.generator_on_exponential(lambda, x);
}

}  // namespace polybranch
