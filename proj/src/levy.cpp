#include <algorithm>
#include <cmath>
#include <random>

#include "jumps.hpp"
#include "polybranch/simulate.hpp"

namespace polybranch {

namespace detail {

JumpSource::JumpSource(const Mechanism& mech, double cut) : cutoff(cut) {
  if (!(cut > 0.0 && cut < 1.0)) throw DomainError("jump cutoff must lie in (0,1)");
  drift = -mech.b();
  gauss_rate = 2.0 * mech.c();
  kill_rate = mech.a();
  double acc = 0.0;
  for (const auto& at : mech.measure().atoms) {
    if (at.z <= 1.0) drift -= at.w * at.z;
    acc += at.w;
    atom_z.push_back(at.z);
    atom_cum.push_back(acc);
  }
  jump_rate = acc;
  if (mech.measure().stable) {
    const auto& st = *mech.measure().stable;
    const double al = st.alpha, C = st.scale;
    stable_alpha = al;
    // compensator of the simulated jumps in (cut, 1]
    double mid = al == 1.0 ? -std::log(cut) : (1.0 - std::pow(cut, 1.0 - al)) / (1.0 - al);
    drift -= C * mid;
    gauss_rate += C * std::pow(cut, 2.0 - al) / (2.0 - al);
    stable_rate = C * std::pow(cut, -al) / al;
    jump_rate += stable_rate;
  }
}

double JumpSource::sample_size(Philox& rng) const {
  double u = rng.uniform() * jump_rate;
  if (!atom_cum.empty() && u < atom_cum.back()) {
    auto it = std::upper_bound(atom_cum.begin(), atom_cum.end(), u);
    return atom_z[static_cast<std::size_t>(it - atom_cum.begin())];
  }
  return cutoff * std::pow(rng.uniform(), -1.0 / stable_alpha);
}

}  // namespace detail

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::None: return "none";
    case Boundary::Zero: return "zero";
    case Boundary::Infinity: return "infinity";
  }
  return "unknown";
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Lamperti: return "lamperti";
    case Scheme::Euler: return "euler";
    case Scheme::Chain: return "chain";
  }
  return "unknown";
}

BoundaryRule BoundaryRule::from(const Mechanism& mech) {
  BoundaryRule r;
  r.origin = mech.profile().origin;
  r.tail = mech.profile().tail;
  r.beta = mech.profile().beta;
  r.killing = mech.a() > 0.0;
  return r;
}

bool BoundaryRule::zero_reachable(double theta) const {
  return power_integrable(theta - 1.0 - tail.exponent, -tail.log_power, false);
}

bool BoundaryRule::infinity_reachable(double theta) const {
  if (killing) return true;
  if (beta >= 0.0) return false;
  return power_integrable(theta - 1.0 - origin.exponent, -origin.log_power, true);
}

double segment_inverse_rate(double y0, double y1, double theta) {
  if (theta == 0.0) return 1.0;
  if (y1 == y0) return std::pow(y0, -theta);
  if (y1 == 0.0) return theta < 1.0 ? std::pow(y0, -theta) / (1.0 - theta) : std::numeric_limits<double>::infinity();
  double L = std::log1p((y1 - y0) / y0);
  double base = std::pow(y0, -theta);
  if (theta == 1.0) return base * L / std::expm1(L);
  return base * std::expm1((1.0 - theta) * L) / ((1.0 - theta) * std::expm1(L));
}

double truncated_rate(double x, double theta, double n) {
  if (x > n) return std::pow(n, theta);
  if (x > 1.0 / n) return std::pow(x, theta);
  return std::pow(n, 2.0 - theta) * x * x;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void push_knot(LevyPath& p, double t, double l, double v) {
  p.times.push_back(t);
  p.left.push_back(l);
  p.values.push_back(v);
}

// Levy time needed on a linear segment starting at y with slope d to accumulate clock `rem`.
double clock_exit(double y, double d, double theta, double rem) {
  if (d == 0.0) return rem * std::pow(y, theta);
  double target;
  if (theta == 1.0) {
    target = y * std::exp(d * rem);
  } else {
    double base = std::pow(y, 1.0 - theta) + d * (1.0 - theta) * rem;
    if (base <= 0.0) return d < 0.0 ? y / -d : kInf;
    target = std::pow(base, 1.0 / (1.0 - theta));
  }
  return (target - y) / d;
}

LevyPath exact_path(const Mechanism& mech, double x0, double horizon, Philox& rng, const LevyOptions& o,
                    const detail::JumpSource& js) {
  LevyPath p;
  p.exact = true;
  p.lower = 0.0;
  p.upper = o.n_max;
  p.horizon = horizon;
  p.rule = BoundaryRule::from(mech);
  push_knot(p, 0.0, x0, x0);
  if (x0 == 0.0) {
    p.absorbed = Boundary::Zero;
    p.absorbed_time = 0.0;
    return p;
  }
  const double d = js.drift;
  const double rate = js.jump_rate + js.kill_rate;
  double t = 0.0, y = x0, clock = 0.0;
  while (true) {
    double e = rate > 0.0 ? rng.exponential() / rate : kInf;
    double t0 = d < 0.0 ? y / -d : kInf;
    double tu = d > 0.0 ? (o.n_max - y) / d : kInf;
    double tc = kInf;
    if (o.clock_theta) tc = clock_exit(y, d, *o.clock_theta, o.clock_limit - clock);
    double th = horizon - t;
    double step = std::min({e, t0, tu, tc, th});
    double yend = (step == t0) ? 0.0 : y + d * step;
    if (o.clock_theta && step != t0) clock += step * segment_inverse_rate(y, yend, *o.clock_theta);
    t += step;
    if (step == t0) {
      push_knot(p, t, 0.0, 0.0);
      p.absorbed = Boundary::Zero;
      p.absorbed_time = t;
      return p;
    }
    if (step == tu) {
      push_knot(p, t, o.n_max, kInf);
      p.absorbed = Boundary::Infinity;
      p.absorbed_time = t;
      return p;
    }
    if (step == th || step == tc) {
      push_knot(p, t, yend, yend);
      p.horizon = t;
      return p;
    }
    if (rng.uniform() * rate < js.kill_rate) {
      push_knot(p, t, yend, kInf);
      p.absorbed = Boundary::Infinity;
      p.absorbed_time = t;
      p.killed = true;
      return p;
    }
    double z = js.sample_size(rng);
    double ynew = yend + z;
    p.jumps.push_back({t, z});
    if (ynew >= o.n_max) {
      push_knot(p, t, yend, kInf);
      p.absorbed = Boundary::Infinity;
      p.absorbed_time = t;
      return p;
    }
    push_knot(p, t, yend, ynew);
    y = ynew;
  }
}

LevyPath stepped_path(const Mechanism& mech, double x0, double horizon, double dt, Philox& rng,
                      const LevyOptions& o, const detail::JumpSource& js) {
  LevyPath p;
  p.exact = false;
  p.lower = 1.0 / o.n_max;
  p.upper = o.n_max;
  p.horizon = horizon;
  p.rule = BoundaryRule::from(mech);
  push_knot(p, 0.0, x0, x0);
  if (x0 <= p.lower) {
    p.absorbed = Boundary::Zero;
    p.absorbed_time = 0.0;
    p.values.back() = 0.0;
    return p;
  }
  std::normal_distribution<double> normal;
  const double kappa = o.rel_step;
  double t = 0.0, y = x0, clock = 0.0;
  while (t < horizon) {
    // with a clock the X-time resolution dt sets the step, otherwise dt is a Levy-time step
    double s = o.clock_theta ? std::min(horizon - t, dt * std::pow(y, *o.clock_theta)) : std::min(dt, horizon - t);
    if (js.gauss_rate > 0.0) s = std::min(s, (kappa * y) * (kappa * y) / js.gauss_rate);
    if (js.drift != 0.0) s = std::min(s, kappa * y / std::fabs(js.drift));
    double z = normal(rng);
    double yc = y + js.drift * s + std::sqrt(js.gauss_rate * s) * z;
    // killing time as a fraction of the step
    double kill_frac = kInf;
    if (js.kill_rate > 0.0) {
      double e = rng.exponential() / js.kill_rate;
      if (e < s) kill_frac = e / s;
    }
    double zero_frac = yc <= p.lower ? (y - p.lower) / (y - yc) : kInf;
    if (zero_frac <= 1.0 && zero_frac < kill_frac) {
      double tz = t + zero_frac * s;
      push_knot(p, tz, p.lower, 0.0);
      p.absorbed = Boundary::Zero;
      p.absorbed_time = tz;
      return p;
    }
    if (kill_frac <= 1.0) {
      double tk = t + kill_frac * s;
      double yk = y + kill_frac * (yc - y);
      push_knot(p, tk, yk, kInf);
      p.absorbed = Boundary::Infinity;
      p.absorbed_time = tk;
      p.killed = true;
      return p;
    }
    double jump = 0.0;
    if (js.jump_rate > 0.0) {
      std::poisson_distribution<long> pois(js.jump_rate * s);
      long k = pois(rng);
      for (long j = 0; j < k; ++j) jump += js.sample_size(rng);
    }
    if (o.clock_theta) clock += s * segment_inverse_rate(y, yc, *o.clock_theta);
    t += s;
    double ynew = yc + jump;
    if (jump > 0.0) p.jumps.push_back({t, jump});
    if (ynew >= p.upper) {
      push_knot(p, t, yc, kInf);
      p.absorbed = Boundary::Infinity;
      p.absorbed_time = t;
      return p;
    }
    push_knot(p, t, yc, ynew);
    y = ynew;
    if (o.clock_theta && clock >= o.clock_limit) {
      p.horizon = t;
      return p;
    }
  }
  p.horizon = t;
  return p;
}

}  // namespace

LevyPath sample_levy_path(const Mechanism& mech, double x0, double horizon, double dt, Philox& rng,
                          const LevyOptions& opts) {
  if (!(dt > 0.0)) throw DomainError("sample_levy_path: dt must be > 0");
  if (!(horizon > 0.0)) throw DomainError("sample_levy_path: horizon must be > 0");
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("sample_levy_path: x0 must be finite and >= 0");
  if (!(opts.n_max >= 2.0)) throw DomainError("sample_levy_path: n_max must be >= 2");
  detail::JumpSource js(mech, opts.jump_cutoff);
  if (mech.finite_variation()) return exact_path(mech, x0, horizon, rng, opts, js);
  return stepped_path(mech, x0, horizon, dt, rng, opts, js);
}

LevyPath sample_levy_path(const Mechanism& mech, double x0, double horizon, double dt, std::uint64_t seed,
                          const LevyOptions& opts) {
  Philox rng(seed, 0);
  return sample_levy_path(mech, x0, horizon, dt, rng, opts);
}

}  // namespace polybranch
