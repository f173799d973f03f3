#include <algorithm>
#include <cmath>
#include <random>

#include "jumps.hpp"
#include "polybranch/simulate.hpp"

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Mark {
  double u;
  double frac;
  double size;  // +inf for killing
};

struct Live {
  double x = 0.0;
  bool alive = true;
  bool level_hit = false;
};

}  // namespace

std::vector<PathOutcome> simulate_euler(const Mechanism& mech, const std::vector<double>& x0s, double horizon,
                                        const EulerOptions& opts, Philox& rng, std::vector<Trajectory>* record) {
  if (!(opts.dt > 0.0)) throw DomainError("euler: dt must be > 0");
  if (!(opts.n_max >= 2.0)) throw DomainError("euler: truncation level must be >= 2");
  if (!(horizon > 0.0)) throw DomainError("euler: horizon must be > 0");
  if (!(opts.rel_step > 0.0 && opts.rel_step < 1.0)) throw DomainError("euler: rel_step must lie in (0,1)");
  if (!(opts.level >= 0.0)) throw DomainError("euler: level must be >= 0");

  const detail::JumpSource js(mech, opts.jump_cutoff);
  const double th = mech.theta();
  const double lower = 1.0 / opts.n_max, upper = opts.n_max;
  const bool zero_ok = mech.extinction_possible();
  const bool inf_ok = mech.explosion_possible();
  const double kappa = opts.rel_step;
  const double level = opts.level;
  // step-size floor near a watched level; crossing is still detected at the level itself
  const double level_floor = 1e-4 * level;
  const double mark_rate = js.jump_rate + js.kill_rate;
  const std::size_t K = x0s.size();

  std::vector<double> snaps = opts.snapshot_times;
  std::sort(snaps.begin(), snaps.end());

  std::vector<PathOutcome> out(K);
  std::vector<Live> st(K);
  if (record) record->assign(K, Trajectory{});

  auto rec = [&](std::size_t i, double t, double l, double v) {
    if (!record) return;
    auto& tr = (*record)[i];
    tr.grid.push_back(t);
    tr.left.push_back(l);
    tr.states.push_back(v);
  };
  auto finish = [&](std::size_t i, Boundary b, double t, double v) {
    out[i].absorbed = b;
    out[i].absorbed_time = t;
    out[i].final_time = t;
    out[i].final_state = v;
    st[i].alive = false;
    st[i].x = v;
  };
  auto truncate = [&](std::size_t i, double t, double v) {
    out[i].truncated = true;
    out[i].censored = true;
    out[i].final_time = t;
    out[i].final_state = v;
    st[i].alive = false;
    st[i].x = v;
  };
  auto stop_at_level = [&](std::size_t i, double t) {
    out[i].final_time = t;
    out[i].final_state = level;
    st[i].alive = false;
    st[i].x = level;
  };

  for (std::size_t i = 0; i < K; ++i) {
    double x = x0s[i];
    if (!(x >= 0.0)) throw DomainError("euler: starting point must be >= 0");
    st[i].x = x;
    out[i].snapshots.assign(snaps.size(), kNaN);
    rec(i, 0.0, x, x);
    if (level > 0.0 && x <= level) {
      st[i].level_hit = true;
      out[i].level_time = 0.0;
      if (opts.stop_at_level) {
        out[i].final_state = x;
        st[i].alive = false;
        continue;
      }
    }
    if (x == 0.0) {
      finish(i, Boundary::Zero, 0.0, 0.0);
    } else if (std::isinf(x)) {
      finish(i, Boundary::Infinity, 0.0, kInf);
    } else if (x <= lower) {
      if (zero_ok)
        finish(i, Boundary::Zero, 0.0, 0.0);
      else
        truncate(i, 0.0, 0.0);
    } else if (x >= upper) {
      if (inf_ok)
        finish(i, Boundary::Infinity, 0.0, kInf);
      else
        truncate(i, 0.0, kInf);
    }
  }

  std::size_t snap_i = 0;
  auto take_snapshots = [&](double t) {
    while (snap_i < snaps.size() && snaps[snap_i] <= t) {
      for (std::size_t i = 0; i < K; ++i) out[i].snapshots[snap_i] = st[i].x;
      ++snap_i;
    }
  };
  take_snapshots(0.0);

  std::normal_distribution<double> normal;
  std::vector<double> rate(K, 0.0);
  std::vector<Mark> marks;
  double t = 0.0;

  auto any_alive = [&]() {
    for (const auto& s : st)
      if (s.alive) return true;
    return false;
  };

  while (t < horizon && any_alive()) {
    double h = std::min(opts.dt, horizon - t);
    if (snap_i < snaps.size() && snaps[snap_i] > t) h = std::min(h, snaps[snap_i] - t);
    double rmax = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      if (!st[i].alive) continue;
      double x = st[i].x;
      double r = truncated_rate(x, th, opts.n_max);
      rate[i] = r;
      rmax = std::max(rmax, r);
      double dist = (level > 0.0 && !st[i].level_hit && x > level) ? std::max(x - level, level_floor) : x;
      double smax = kInf;
      if (js.gauss_rate > 0.0) smax = std::min(smax, (kappa * dist) * (kappa * dist) / js.gauss_rate);
      if (js.drift != 0.0) smax = std::min(smax, kappa * dist / std::fabs(js.drift));
      h = std::min(h, smax / r);
    }
    double z = js.gauss_rate > 0.0 ? normal(rng) : 0.0;
    double sq = std::sqrt(h);

    marks.clear();
    if (mark_rate > 0.0) {
      std::poisson_distribution<long> pois(mark_rate * rmax * h);
      long k = pois(rng);
      for (long j = 0; j < k; ++j) {
        Mark mk;
        mk.u = rng.uniform() * rmax;
        mk.frac = rng.uniform();
        mk.size = rng.uniform() * mark_rate < js.kill_rate ? kInf : js.sample_size(rng);
        marks.push_back(mk);
      }
    }

    double tn = t + h;
    for (std::size_t i = 0; i < K; ++i) {
      if (!st[i].alive) continue;
      ++out[i].steps;
      double x = st[i].x, r = rate[i];
      double s = r * h;
      double xc = x + js.drift * s + std::sqrt(js.gauss_rate * r) * sq * z;

      double kill_frac = kInf, jump = 0.0;
      for (const auto& mk : marks) {
        if (mk.u > r) continue;
        if (std::isinf(mk.size))
          kill_frac = std::min(kill_frac, mk.frac);
        else
          jump += mk.size;
      }

      double lvl_frac = kInf;
      if (level > 0.0 && !st[i].level_hit && xc <= level) lvl_frac = std::clamp((x - level) / (x - xc), 0.0, 1.0);
      double zero_frac = xc <= lower ? std::clamp((x - lower) / (x - xc), 0.0, 1.0) : kInf;

      if (lvl_frac <= 1.0 && lvl_frac < kill_frac) {
        double tl = t + lvl_frac * h;
        st[i].level_hit = true;
        out[i].level_time = tl;
        if (opts.stop_at_level) {
          rec(i, tl, level, level);
          stop_at_level(i, tl);
          continue;
        }
      }
      if (zero_frac <= 1.0 && zero_frac < kill_frac) {
        double tz = t + zero_frac * h;
        rec(i, tz, lower, 0.0);
        if (zero_ok)
          finish(i, Boundary::Zero, tz, 0.0);
        else
          truncate(i, tz, 0.0);
        continue;
      }
      if (kill_frac <= 1.0) {
        double tk = t + kill_frac * h;
        double xk = x + kill_frac * (xc - x);
        rec(i, tk, xk, kInf);
        finish(i, Boundary::Infinity, tk, kInf);
        continue;
      }
      double xn = xc + jump;
      if (xn >= upper) {
        rec(i, tn, xc, kInf);
        if (inf_ok)
          finish(i, Boundary::Infinity, tn, kInf);
        else
          truncate(i, tn, kInf);
        continue;
      }
      st[i].x = xn;
      rec(i, tn, xc, xn);
    }
    t = tn;
    take_snapshots(t);
  }

  // absorbed and truncated paths keep their final state at later snapshot times
  for (std::size_t j = snap_i; j < snaps.size() && snaps[j] <= horizon; ++j)
    for (std::size_t i = 0; i < K; ++i)
      if (out[i].absorbed != Boundary::None || out[i].truncated) out[i].snapshots[j] = st[i].x;

  for (std::size_t i = 0; i < K; ++i) {
    if (st[i].alive) {
      out[i].censored = true;
      out[i].final_time = t;
      out[i].final_state = st[i].x;
    }
  }
  return out;
}

namespace {

PathSample to_sample(const Mechanism& mech, const PathOutcome& o, Trajectory&& tr, double n, std::uint64_t seed,
                     double horizon) {
  PathSample s;
  s.grid = std::move(tr.grid);
  s.left = std::move(tr.left);
  s.states = std::move(tr.states);
  s.scheme = Scheme::Euler;
  s.seed = seed;
  s.trunc_lower = 1.0 / n;
  s.trunc_upper = n;
  s.theta = mech.theta();
  s.truncated = o.truncated;
  s.censored = o.censored;
  if (o.absorbed == Boundary::Zero) s.tau0 = o.absorbed_time;
  if (o.absorbed == Boundary::Infinity) s.tau_inf = o.absorbed_time;
  if (o.absorbed != Boundary::None) s.tau = o.absorbed_time;
  s.horizon = o.absorbed != Boundary::None ? kInf : (o.truncated ? o.final_time : horizon);
  return s;
}

}  // namespace

PathSample euler_sde(const Mechanism& mech, double x0, double horizon, double dt, double n, std::uint64_t seed) {
  EulerOptions o;
  o.dt = dt;
  o.n_max = n;
  Philox rng(seed, 0);
  std::vector<Trajectory> tr;
  auto res = simulate_euler(mech, {x0}, horizon, o, rng, &tr);
  return to_sample(mech, res[0], std::move(tr[0]), n, seed, horizon);
}

std::pair<PathSample, PathSample> coupled_pair(const Mechanism& mech, double x0, double y0, double horizon, double dt,
                                               std::uint64_t seed, double n) {
  if (x0 > y0) throw DomainError("coupled_pair: need x0 <= y0");
  EulerOptions o;
  o.dt = dt;
  o.n_max = n;
  Philox rng(seed, 0);
  std::vector<Trajectory> tr;
  auto res = simulate_euler(mech, {x0, y0}, horizon, o, rng, &tr);
  return {to_sample(mech, res[0], std::move(tr[0]), n, seed, horizon),
          to_sample(mech, res[1], std::move(tr[1]), n, seed, horizon)};
}

std::vector<double> approx_from_infinity(const Mechanism& mech, double y, const std::vector<double>& levels,
                                         double horizon, const EulerOptions& opts, Philox& rng) {
  if (!(y > 0.0)) throw DomainError("approx_from_infinity: target level must be > 0");
  if (!std::is_sorted(levels.begin(), levels.end())) throw DomainError("approx_from_infinity: levels must increase");
  EulerOptions o = opts;
  o.level = y;
  o.stop_at_level = true;
  o.record = false;
  auto res = simulate_euler(mech, levels, horizon, o, rng, nullptr);
  std::vector<double> out;
  out.reserve(res.size());
  for (const auto& r : res) out.push_back(r.level_time);
  return out;
}

std::vector<double> approx_from_infinity(const Mechanism& mech, double y, const std::vector<double>& levels,
                                         double horizon, double dt, std::uint64_t seed) {
  EulerOptions o;
  o.dt = dt;
  Philox rng(seed, 0);
  return approx_from_infinity(mech, y, levels, horizon, o, rng);
}

std::size_t ordering_violations(const PathSample& lower, const PathSample& upper) {
  auto at = [](const PathSample& p, std::size_t k, bool left) {
    if (k < p.grid.size()) return left ? p.left[k] : p.states[k];
    return p.states.back();
  };
  std::size_t n = std::max(lower.grid.size(), upper.grid.size());
  std::size_t bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (at(lower, k, false) > at(upper, k, false) || at(lower, k, true) > at(upper, k, true)) ++bad;
  }
  return bad;
}

}  // namespace polybranch
