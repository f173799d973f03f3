#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polybranch/mechanism.hpp"
#include "polybranch/rng.hpp"

namespace polybranch {

enum class Boundary { None, Zero, Infinity };
enum class Scheme { Lamperti, Euler, Chain };

std::string to_string(Boundary b);
std::string to_string(Scheme s);

// Which boundaries the time-changed process can reach in finite time, as a function of theta.
struct BoundaryRule {
  PowerLaw origin;
  PowerLaw tail;
  double beta = 0.0;
  bool killing = false;

  static BoundaryRule from(const Mechanism& mech);
  bool zero_reachable(double theta) const;
  bool infinity_reachable(double theta) const;
};

// Knot representation shared by Levy paths and time-changed samples: between knots k-1 and k
// the path moves continuously from value[k-1] to left[k]; value[k] - left[k] is the jump at k.
struct LevyPath {
  struct Jump {
    double time;
    double size;
  };
  std::vector<double> times;
  std::vector<double> left;
  std::vector<double> values;
  std::vector<Jump> jumps;
  Boundary absorbed = Boundary::None;
  double absorbed_time = std::numeric_limits<double>::infinity();
  bool killed = false;
  bool exact = false;  // event-driven, linear between knots
  double horizon = 0.0;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  BoundaryRule rule;
};

struct PathSample {
  std::vector<double> grid;
  std::vector<double> left;
  std::vector<double> states;
  std::optional<double> tau0;
  std::optional<double> tau_inf;
  std::optional<double> tau;
  double horizon = 0.0;
  bool censored = false;
  bool truncated = false;  // left [1/n, n] at a boundary the process cannot reach
  Scheme scheme = Scheme::Euler;
  std::uint64_t seed = 0;
  double trunc_lower = 0.0;
  double trunc_upper = std::numeric_limits<double>::infinity();
  double theta = 0.0;  // interpolation rule between knots

  // state at time t (NaN beyond a censoring horizon)
  double state_at(double t) const;
  // first time the path is <= y (continuous downward passage); nullopt if never
  std::optional<double> first_passage_below(double y) const;
};

// Mean of y^{-theta} along the straight segment from y0 to y1 (y0 > 0, y1 >= 0).
double segment_inverse_rate(double y0, double y1, double theta);

// r_n(x): x^theta on (1/n, n], n^theta above, n^{2-theta} x^2 on [0, 1/n]
double truncated_rate(double x, double theta, double n);

struct LevyOptions {
  double jump_cutoff = 1e-3;
  double rel_step = 0.2;
  double n_max = 1048576.0;
  // optional clock: stop once int Y^{-clock_theta} exceeds clock_limit, with X-time
  // resolution dt (step <= dt * Y^theta)
  std::optional<double> clock_theta;
  double clock_limit = std::numeric_limits<double>::infinity();
};

LevyPath sample_levy_path(const Mechanism& mech, double x0, double horizon, double dt, std::uint64_t seed,
                          const LevyOptions& opts = {});
LevyPath sample_levy_path(const Mechanism& mech, double x0, double horizon, double dt, Philox& rng,
                          const LevyOptions& opts = {});

// X_t = Y_{eta(t)}; x_horizon cuts the output in X-time.
PathSample inverse_lamperti(const LevyPath& path, double theta,
                            double x_horizon = std::numeric_limits<double>::infinity());
LevyPath forward_lamperti(const PathSample& sample, double theta);

struct EulerOptions {
  double dt = 1e-3;
  double n_max = 1048576.0;
  double rel_step = 0.2;
  double jump_cutoff = 1e-3;
  double level = 0.0;  // watched level y > 0, or 0 for none
  bool stop_at_level = false;
  std::vector<double> snapshot_times;
  bool record = false;
};

struct PathOutcome {
  Boundary absorbed = Boundary::None;
  double absorbed_time = std::numeric_limits<double>::infinity();
  double level_time = std::numeric_limits<double>::infinity();
  double final_time = 0.0;
  double final_state = 0.0;
  bool truncated = false;
  bool censored = false;
  std::size_t steps = 0;
  std::vector<double> snapshots;
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<double> left;
  std::vector<double> states;
};

// Euler scheme for the jump SDE run on several starting points with one shared driving noise
// (Brownian increments and marked Poisson points accepted iff u <= r(X_i)).
std::vector<PathOutcome> simulate_euler(const Mechanism& mech, const std::vector<double>& x0s, double horizon,
                                        const EulerOptions& opts, Philox& rng,
                                        std::vector<Trajectory>* record = nullptr);

PathSample euler_sde(const Mechanism& mech, double x0, double horizon, double dt, double n, std::uint64_t seed);
std::pair<PathSample, PathSample> coupled_pair(const Mechanism& mech, double x0, double y0, double horizon, double dt,
                                               std::uint64_t seed, double n = 1048576.0);

// tau^x_y for each x in levels with shared noise; +inf marks a censored time
std::vector<double> approx_from_infinity(const Mechanism& mech, double y, const std::vector<double>& levels,
                                         double horizon, double dt, std::uint64_t seed);
std::vector<double> approx_from_infinity(const Mechanism& mech, double y, const std::vector<double>& levels,
                                         double horizon, const EulerOptions& opts, Philox& rng);

// Count of grid points where lower > upper (a common grid is used by coupled_pair).
std::size_t ordering_violations(const PathSample& lower, const PathSample& upper);

}  // namespace polybranch
