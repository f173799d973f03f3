#include <algorithm>
#include <cmath>

#include "polybranch/simulate.hpp"

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Position on a segment x0 -> x1 (time-changed straight Levy segment) after X-time tau,
// given the segment's X-duration.
double segment_position(double x0, double x1, double duration, double tau, double theta) {
  if (x0 == x1 || tau <= 0.0) return x0;
  if (tau >= duration) return x1;
  double g = segment_inverse_rate(x0, x1, theta);
  double ds = duration / g;
  double m = (x1 - x0) / ds;
  double y;
  if (theta == 0.0) {
    y = x0 + m * tau;
  } else if (theta == 1.0) {
    y = x0 * std::exp(m * tau);
  } else {
    double base = std::pow(x0, 1.0 - theta) + m * (1.0 - theta) * tau;
    y = base <= 0.0 ? x1 : std::pow(base, 1.0 / (1.0 - theta));
  }
  double lo = std::min(x0, x1), hi = std::max(x0, x1);
  return std::clamp(y, lo, hi);
}

}  // namespace

double PathSample::state_at(double t) const {
  if (grid.empty() || t < grid.front()) return kNaN;
  if (t >= grid.back()) {
    if (tau0 || tau_inf) return states.back();
    if (truncated) return states.back();
    return t == grid.back() ? states.back() : kNaN;
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  double x0 = states[k - 1], x1 = left[k];
  return segment_position(x0, x1, grid[k] - grid[k - 1], t - grid[k - 1], theta);
}

std::optional<double> PathSample::first_passage_below(double y) const {
  if (grid.empty()) return std::nullopt;
  if (states.front() <= y) return grid.front();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    double x0 = states[k - 1], x1 = left[k];
    if (x1 > y) continue;
    double dur = grid[k] - grid[k - 1];
    if (x0 == x1 || dur == 0.0) return grid[k - 1];
    double g = segment_inverse_rate(x0, x1, theta);
    double ds = dur / g;
    double m = (x1 - x0) / ds;
    double sstar = (y - x0) / m;
    double tau = y > 0.0 || theta < 1.0 ? sstar * segment_inverse_rate(x0, y, theta) : dur;
    return grid[k - 1] + std::min(tau, dur);
  }
  return std::nullopt;
}

PathSample inverse_lamperti(const LevyPath& path, double theta, double x_horizon) {
  if (!(theta >= 0.0)) throw DomainError("inverse_lamperti: theta must be >= 0");
  PathSample s;
  s.scheme = Scheme::Lamperti;
  s.theta = theta;
  s.trunc_lower = path.lower;
  s.trunc_upper = path.upper;
  if (path.times.empty()) return s;

  auto push = [&](double t, double l, double v) {
    s.grid.push_back(t);
    s.left.push_back(l);
    s.states.push_back(v);
  };
  push(0.0, path.left.front(), path.values.front());
  if (path.values.front() == 0.0) {
    s.tau0 = 0.0;
    s.tau = 0.0;
    s.horizon = kInf;
    return s;
  }

  double alpha = 0.0;
  for (std::size_t k = 1; k < path.times.size(); ++k) {
    double y0 = path.values[k - 1], y1 = path.left[k];
    double dt = path.times[k] - path.times[k - 1];
    double da;
    if (y1 == 0.0 && theta >= 1.0) {
      // straight approach to 0 with infinite clock: stop at the truncation level
      double lvl = 1.0 / path.upper;
      double sl = dt * (y0 - lvl) / y0;
      da = sl * segment_inverse_rate(y0, lvl, theta);
      if (alpha + da > x_horizon) {
        double v = segment_position(y0, lvl, da, x_horizon - alpha, theta);
        push(x_horizon, v, v);
        s.censored = true;
        s.horizon = x_horizon;
        return s;
      }
      alpha += da;
      push(alpha, lvl, lvl);
      s.truncated = true;
      s.censored = true;
      s.horizon = alpha;
      return s;
    }
    da = dt * segment_inverse_rate(y0, y1, theta);
    if (alpha + da > x_horizon) {
      double v = segment_position(y0, y1, da, x_horizon - alpha, theta);
      push(x_horizon, v, v);
      s.censored = true;
      s.horizon = x_horizon;
      return s;
    }
    alpha += da;
    push(alpha, path.left[k], path.values[k]);
  }

  if (path.absorbed == Boundary::Zero) {
    bool reachable = path.exact ? theta < 1.0 || path.left.back() > 0.0 : path.rule.zero_reachable(theta);
    if (reachable) {
      s.tau0 = alpha;
      s.tau = alpha;
      s.horizon = kInf;
    } else {
      s.truncated = true;
      s.censored = true;
      s.horizon = alpha;
    }
  } else if (path.absorbed == Boundary::Infinity) {
    if (path.killed || path.rule.infinity_reachable(theta)) {
      s.tau_inf = alpha;
      s.tau = alpha;
      s.horizon = kInf;
    } else {
      s.truncated = true;
      s.censored = true;
      s.horizon = alpha;
    }
  } else {
    s.censored = true;
    s.horizon = alpha;
  }
  return s;
}

LevyPath forward_lamperti(const PathSample& sample, double theta) {
  if (!(theta >= 0.0)) throw DomainError("forward_lamperti: theta must be >= 0");
  LevyPath p;
  p.lower = sample.trunc_lower;
  p.upper = sample.trunc_upper;
  if (sample.grid.empty()) return p;
  p.times.push_back(0.0);
  p.left.push_back(sample.left.front());
  p.values.push_back(sample.states.front());
  double gamma = 0.0;
  for (std::size_t k = 1; k < sample.grid.size(); ++k) {
    double x0 = sample.states[k - 1], x1 = sample.left[k];
    double da = sample.grid[k] - sample.grid[k - 1];
    double g = segment_inverse_rate(x0, x1, theta);
    gamma += da / g;
    p.times.push_back(gamma);
    p.left.push_back(sample.left[k]);
    p.values.push_back(sample.states[k]);
    double v = sample.states[k], l = sample.left[k];
    if (std::isfinite(v) && v > l) p.jumps.push_back({gamma, v - l});
  }
  p.horizon = gamma;
  if (sample.tau0) {
    p.absorbed = Boundary::Zero;
    p.absorbed_time = gamma;
  } else if (sample.tau_inf) {
    p.absorbed = Boundary::Infinity;
    p.absorbed_time = gamma;
  }
  p.exact = true;
  return p;
}

}  // namespace polybranch
