#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polybranch/mechanism.hpp"
#include "polybranch/simulate.hpp"

namespace polybranch {

struct Estimate {
  double point = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  // censored paths counted at the horizon (restricted means) or as non-events (probabilities)
  double lower_bound = 0.0;
  // censored paths given an exponential residual fitted to the late events
  double extrapolated = 0.0;

  double ci_low(double z = 1.959963984540054) const { return point - z * std_error; }
  double ci_high(double z = 1.959963984540054) const { return point + z * std_error; }
};

enum class Event { Extinct, Exploded, Either };
std::string to_string(Event e);

struct McOptions {
  Scheme scheme = Scheme::Euler;
  double dt = 1e-3;
  double n_max = 1048576.0;
  double rel_step = 0.2;
  double jump_cutoff = 1e-3;
};

// Per-path outcome in X-time; level_time is +inf unless a level was watched and reached.
struct PathRecord {
  Boundary absorbed = Boundary::None;
  double absorbed_time = 0.0;
  double level_time = 0.0;
  double end_time = 0.0;  // absorption, level stop or censoring time
  bool censored = false;
  bool truncated = false;
};

// Path kernels: path k uses Philox(seed, stream_id(k)), so both give identical records.
std::vector<PathRecord> run_paths(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts, double level = 0.0);
std::vector<PathRecord> run_paths_serial(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                         std::uint64_t seed, const McOptions& opts, double level = 0.0);

// Sum with a fixed binary tree over the index range.
double pairwise_sum(const double* v, std::size_t n);

// mean and standard error of the samples
Estimate summarize(const std::vector<double>& samples);

Estimate estimate_extinction_prob(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts = {});
Estimate estimate_explosion_prob(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                 std::uint64_t seed, const McOptions& opts = {});
// E[tau 1{event}] over all paths
Estimate estimate_restricted_mean(const Mechanism& mech, double x, Event event, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts = {});
// E[tau_inf ^ tau_y], y < x
Estimate estimate_hit_time(const Mechanism& mech, double x, double y, double horizon, std::size_t n_paths,
                           std::uint64_t seed, const McOptions& opts = {});

// Estimators on precomputed records.
Estimate extinction_prob_from(const std::vector<PathRecord>& recs, double horizon);
Estimate restricted_mean_from(const std::vector<PathRecord>& recs, Event event, double horizon);
Estimate hit_time_from(const std::vector<PathRecord>& recs, double horizon);

}  // namespace polybranch
