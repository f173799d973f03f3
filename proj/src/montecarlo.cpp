#include "polybranch/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PathRecord euler_record(const Mechanism& mech, double x, double horizon, Philox& rng, const McOptions& o,
                        double level) {
  EulerOptions eo;
  eo.dt = o.dt;
  eo.n_max = o.n_max;
  eo.rel_step = o.rel_step;
  eo.jump_cutoff = o.jump_cutoff;
  eo.level = level;
  eo.stop_at_level = level > 0.0;
  auto res = simulate_euler(mech, {x}, horizon, eo, rng, nullptr);
  const auto& r = res[0];
  PathRecord p;
  p.absorbed = r.absorbed;
  p.absorbed_time = r.absorbed_time;
  p.level_time = r.level_time;
  p.end_time = r.final_time;
  p.censored = r.censored;
  p.truncated = r.truncated;
  return p;
}

PathRecord lamperti_record(const Mechanism& mech, double x, double horizon, Philox& rng, const McOptions& o,
                           double level) {
  LevyOptions lo;
  lo.jump_cutoff = o.jump_cutoff;
  lo.rel_step = o.rel_step;
  lo.n_max = o.n_max;
  lo.clock_theta = mech.theta();
  lo.clock_limit = horizon;
  LevyPath path = sample_levy_path(mech, x, kInf, o.dt, rng, lo);
  PathSample s = inverse_lamperti(path, mech.theta(), horizon);
  PathRecord p;
  p.level_time = kInf;
  p.absorbed_time = kInf;
  if (level > 0.0) {
    if (auto tl = s.first_passage_below(level)) p.level_time = *tl;
  }
  if (s.tau0) {
    p.absorbed = Boundary::Zero;
    p.absorbed_time = *s.tau0;
  } else if (s.tau_inf) {
    p.absorbed = Boundary::Infinity;
    p.absorbed_time = *s.tau_inf;
  }
  p.censored = s.censored;
  p.truncated = s.truncated;
  p.end_time = p.absorbed != Boundary::None ? p.absorbed_time : s.horizon;
  if (level > 0.0 && std::isfinite(p.level_time) && p.level_time <= p.end_time) {
    // the watched level stops the path
    p.absorbed = Boundary::None;
    p.absorbed_time = kInf;
    p.censored = false;
    p.truncated = false;
    p.end_time = p.level_time;
  }
  return p;
}

PathRecord one_path(const Mechanism& mech, double x, double horizon, std::uint64_t seed, std::size_t k,
                    const McOptions& o, double level) {
  Philox rng(seed, stream_id(k));
  if (o.scheme == Scheme::Lamperti) return lamperti_record(mech, x, horizon, rng, o, level);
  if (o.scheme == Scheme::Chain) throw DomainError("run_paths: chain scheme lives in the discrete module");
  return euler_record(mech, x, horizon, rng, o, level);
}

void check_args(double x, double horizon, std::size_t n_paths) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("monte carlo: x must be finite and >= 0");
  if (!(horizon > 0.0)) throw DomainError("monte carlo: horizon must be > 0");
  if (n_paths < 2) throw DomainError("monte carlo: need at least 2 paths");
}

double censored_fraction(const std::vector<PathRecord>& recs) {
  std::size_t c = 0;
  for (const auto& r : recs) c += r.censored ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(recs.size());
}

// Exponential residual: hazard of event-ending paths on the late half of the horizon.
struct TailFit {
  double residual = kInf;  // mean residual time beyond the horizon
  double share = 0.0;      // fraction of late terminations that are the event
};

template <class IsEvent, class EndTime>
TailFit fit_tail(const std::vector<PathRecord>& recs, double horizon, IsEvent&& is_event, EndTime&& end) {
  double h0 = 0.5 * horizon;
  double exposure = 0.0;
  std::size_t ended = 0, hits = 0;
  for (const auto& r : recs) {
    double e = r.censored ? horizon : end(r);
    if (e <= h0) continue;
    exposure += e - h0;
    if (!r.censored) {
      ++ended;
      if (is_event(r)) ++hits;
    }
  }
  TailFit f;
  if (ended > 0 && exposure > 0.0) {
    f.residual = exposure / static_cast<double>(ended);
    f.share = static_cast<double>(hits) / static_cast<double>(ended);
  }
  return f;
}

}  // namespace

std::string to_string(Event e) {
  switch (e) {
    case Event::Extinct: return "extinct";
    case Event::Exploded: return "exploded";
    case Event::Either: return "either";
  }
  return "unknown";
}

std::vector<PathRecord> run_paths(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts, double level) {
  check_args(x, horizon, n_paths);
  std::vector<PathRecord> out(n_paths);
  const long long np = static_cast<long long>(n_paths);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long k = 0; k < np; ++k) {
    auto idx = static_cast<std::size_t>(k);
    out[idx] = one_path(mech, x, horizon, seed, idx, opts, level);
  }
  return out;
}

std::vector<PathRecord> run_paths_serial(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                         std::uint64_t seed, const McOptions& opts, double level) {
  check_args(x, horizon, n_paths);
  std::vector<PathRecord> out(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) out[k] = one_path(mech, x, horizon, seed, k, opts, level);
  return out;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

Estimate summarize(const std::vector<double>& samples) {
  Estimate e;
  const std::size_t n = samples.size();
  e.n_paths = n;
  if (n == 0) return e;
  double mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (samples[i] - mean) * (samples[i] - mean);
  double var = n > 1 ? pairwise_sum(dev.data(), n) / static_cast<double>(n - 1) : 0.0;
  e.point = mean;
  e.std_error = std::sqrt(var / static_cast<double>(n));
  e.lower_bound = mean;
  e.extrapolated = mean;
  return e;
}

Estimate extinction_prob_from(const std::vector<PathRecord>& recs, double horizon) {
  std::vector<double> v(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) v[i] = recs[i].absorbed == Boundary::Zero ? 1.0 : 0.0;
  Estimate e = summarize(v);
  e.horizon = horizon;
  e.censored_fraction = censored_fraction(recs);
  auto tf = fit_tail(recs, horizon, [](const PathRecord& r) { return r.absorbed == Boundary::Zero; },
                     [](const PathRecord& r) { return r.end_time; });
  e.extrapolated = e.point + e.censored_fraction * tf.share;
  return e;
}

Estimate restricted_mean_from(const std::vector<PathRecord>& recs, Event event, double horizon) {
  auto hit = [event](const PathRecord& r) {
    if (event == Event::Extinct) return r.absorbed == Boundary::Zero;
    if (event == Event::Exploded) return r.absorbed == Boundary::Infinity;
    return r.absorbed != Boundary::None;
  };
  // lower bound: censored paths count as an event at the horizon
  std::vector<double> v(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    v[i] = r.censored ? horizon : (hit(r) ? r.absorbed_time : 0.0);
  }
  Estimate e = summarize(v);
  e.horizon = horizon;
  e.censored_fraction = censored_fraction(recs);
  auto tf = fit_tail(recs, horizon, hit, [](const PathRecord& r) { return r.end_time; });
  double extra = std::isfinite(tf.residual) ? tf.share * (horizon + tf.residual) - horizon : 0.0;
  e.extrapolated = e.point + e.censored_fraction * extra;
  return e;
}

Estimate hit_time_from(const std::vector<PathRecord>& recs, double horizon) {
  std::vector<double> v(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.censored)
      v[i] = horizon;
    else
      v[i] = std::min(r.level_time, r.absorbed == Boundary::Infinity ? r.absorbed_time : kInf);
  }
  Estimate e = summarize(v);
  e.horizon = horizon;
  e.censored_fraction = censored_fraction(recs);
  auto tf = fit_tail(recs, horizon, [](const PathRecord&) { return true; },
                     [](const PathRecord& r) { return r.end_time; });
  e.extrapolated = e.point + e.censored_fraction * (std::isfinite(tf.residual) ? tf.residual : 0.0);
  return e;
}

Estimate estimate_extinction_prob(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts) {
  auto recs = run_paths(mech, x, horizon, n_paths, seed, opts);
  Estimate e = extinction_prob_from(recs, horizon);
  e.seed = seed;
  return e;
}

Estimate estimate_explosion_prob(const Mechanism& mech, double x, double horizon, std::size_t n_paths,
                                 std::uint64_t seed, const McOptions& opts) {
  auto recs = run_paths(mech, x, horizon, n_paths, seed, opts);
  std::vector<double> v(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) v[i] = recs[i].absorbed == Boundary::Infinity ? 1.0 : 0.0;
  Estimate e = summarize(v);
  e.horizon = horizon;
  e.seed = seed;
  e.censored_fraction = censored_fraction(recs);
  return e;
}

Estimate estimate_restricted_mean(const Mechanism& mech, double x, Event event, double horizon, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& opts) {
  auto recs = run_paths(mech, x, horizon, n_paths, seed, opts);
  Estimate e = restricted_mean_from(recs, event, horizon);
  e.seed = seed;
  return e;
}

Estimate estimate_hit_time(const Mechanism& mech, double x, double y, double horizon, std::size_t n_paths,
                           std::uint64_t seed, const McOptions& opts) {
  if (!(y > 0.0 && y <= x)) throw DomainError("estimate_hit_time: need 0 < y <= x");
  auto recs = run_paths(mech, x, horizon, n_paths, seed, opts, y);
  Estimate e = hit_time_from(recs, horizon);
  e.seed = seed;
  return e;
}

}  // namespace polybranch
