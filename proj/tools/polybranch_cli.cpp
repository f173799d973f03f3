#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "polybranch/analytics.hpp"
#include "polybranch/discrete.hpp"
#include "polybranch/io.hpp"
#include "polybranch/ks.hpp"
#include "polybranch/montecarlo.hpp"
#include "polybranch/simulate.hpp"

using namespace polybranch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct Common {
  std::string spec_path;
  std::string out;
  std::string json_out;
};

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad grid entry '" + item + "'");
    }
  }
  return v;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::Euler;
  if (s == "lamperti") return Scheme::Lamperti;
  if (s == "chain") return Scheme::Chain;
  throw ValidationError("unknown scheme '" + s + "'");
}

MechanismSpec load_spec(const std::string& path) { return mechanism_from_json(read_json_file(path)); }

// Text goes to the file when a path is given, otherwise to stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

Json header(const std::string& command, const MechanismSpec& spec, Json options) {
  Json cfg;
  cfg["command"] = command;
  cfg["mechanism"] = to_json(spec);
  cfg["options"] = std::move(options);
  return cfg;
}

std::string fmt(double v) { return format_double(v); }

int cmd_classify(const Common& c, double x, const std::string& lambda_csv, const std::string& lambda_grid) {
  MechanismSpec spec = load_spec(c.spec_path);
  Mechanism mech(spec);
  Json cfg = header("classify", spec, {{"x", x}, {"lambda_grid", lambda_grid}});
  std::string hash = config_hash(cfg);
  ClassificationReport r = classify(mech, x);

  Json j;
  j["config"] = cfg;
  j["config_hash"] = hash;
  j["report"] = to_json(r);
  if (!c.json_out.empty()) write_text_file(c.json_out, j.dump(2) + "\n");

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  os << "theta            " << fmt(r.theta) << "\n";
  os << "q                " << fmt(r.q) << "\n";
  os << "psi'(0)          " << fmt(r.beta) << "\n";
  os << "extinction       " << to_string(r.extinction) << "  P(tau_0<inf)=" << fmt(r.extinction_prob) << "\n";
  os << "explosion        " << to_string(r.explosion) << "  P(tau_inf<inf)=" << fmt(r.explosion_prob) << "\n";
  os << "comes down       " << to_string(r.comes_down) << "\n";
  os << "P(X_inf=0)       " << fmt(r.limit_zero_prob) << "\n";
  os << "P(X_inf=inf)     " << fmt(r.limit_infinity_prob) << "\n";
  for (const auto& e : r.evidence) {
    os << "evidence " << e.test << " on [" << fmt(e.lower) << ", " << fmt(e.upper)
       << "]: " << (e.finite ? "finite" : "divergent");
    if (e.finite) os << " value=" << fmt(e.integral.value);
    if (!e.note.empty()) os << " (" << e.note << ")";
    os << "\n";
  }
  emit(c.out, os.str());

  if (!lambda_csv.empty()) {
    std::ostringstream cs;
    cs << "# config_hash=" << hash << "\n";
    cs << "lambda,psi,psi_prime\n";
    for (double l : parse_grid(lambda_grid)) cs << fmt(l) << ',' << fmt(mech.psi(l)) << ',' << fmt(mech.psi_prime(l)) << '\n';
    write_text_file(lambda_csv, cs.str());
  }
  return kExitOk;
}

int cmd_times(const Common& c, double x, const std::string& ygrid, double rel_tol) {
  MechanismSpec spec = load_spec(c.spec_path);
  Mechanism mech(spec);
  Json cfg = header("times", spec, {{"x", x}, {"y_grid", ygrid}, {"rel_tol", rel_tol}});
  std::string hash = config_hash(cfg);
  Tolerance tol{rel_tol, 0.0};
  bool nonconv = false;

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  os << "quantity,x,y,value,abs_error,converged,divergent\n";
  auto row = [&](const std::string& name, double y, const QuadratureResult& r) {
    if (!r.converged && !r.divergent) nonconv = true;
    os << name << ',' << fmt(x) << ',' << (std::isnan(y) ? std::string("") : fmt(y)) << ',' << fmt(r.value) << ','
       << fmt(r.abs_error) << ',' << (r.converged ? 1 : 0) << ',' << (r.divergent ? 1 : 0) << '\n';
  };
  const double none = std::numeric_limits<double>::quiet_NaN();
  row("E[tau_0;X_inf=0]", none, mean_extinction_time(mech, x, tol));
  row("E[tau_inf;X_inf=inf]", none, mean_explosion_time(mech, x, tol));
  row("E[tau]", none, mean_absorption_time(mech, x, tol));
  bool from_inf_ok = mech.a() == 0.0 && mech.profile().beta >= 0.0;
  for (double y : parse_grid(ygrid)) {
    if (y > 0.0 && y <= x) row("E[tau_inf^tau_y]", y, mean_two_sided(mech, x, y, tol));
    if (from_inf_ok && y >= 0.0) row("E[tau^inf_y]", y, mean_hit_from_infinity(mech, y, tol));
  }
  emit(c.out, os.str());
  return nonconv ? kExitNonConvergence : kExitOk;
}

int cmd_simulate(const Common& c, double x, double horizon, double dt, const std::string& scheme_s,
                 std::uint64_t seed, double n_max, double chain_n) {
  MechanismSpec spec = load_spec(c.spec_path);
  Scheme scheme = parse_scheme(scheme_s);
  Json cfg = header("simulate", spec,
                    {{"x", x}, {"horizon", horizon}, {"dt", dt}, {"scheme", scheme_s}, {"seed", seed},
                     {"n_max", n_max}, {"chain_n", chain_n}});
  std::string hash = config_hash(cfg);
  PathSample s;
  if (scheme == Scheme::Chain) {
    ChainSpec cs = build_approx_sequence(spec, chain_n);
    auto i0 = static_cast<std::uint64_t>(std::llround(chain_n * x));
    s = gillespie(cs, i0, cs.gamma_n * horizon, seed);
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
      s.grid[k] /= cs.gamma_n;
      s.left[k] /= chain_n;
      s.states[k] /= chain_n;
    }
  } else {
    Mechanism mech(spec);
    if (scheme == Scheme::Euler) {
      s = euler_sde(mech, x, horizon, dt, n_max, seed);
    } else {
      LevyOptions lo;
      lo.n_max = n_max;
      lo.clock_theta = mech.theta();
      lo.clock_limit = horizon;
      LevyPath p = sample_levy_path(mech, x, std::numeric_limits<double>::infinity(), dt, seed, lo);
      s = inverse_lamperti(p, mech.theta(), horizon);
      s.seed = seed;
    }
  }
  std::ostringstream os;
  write_path_csv(os, s, hash);
  emit(c.out, os.str());
  return kExitOk;
}

int cmd_mc(const Common& c, double x, double y, double horizon, std::size_t paths, std::uint64_t seed, double dt,
           const std::string& scheme_s, double rel_tol) {
  MechanismSpec spec = load_spec(c.spec_path);
  Mechanism mech(spec);
  McOptions o;
  o.scheme = parse_scheme(scheme_s);
  o.dt = dt;
  Json cfg = header("mc", spec,
                    {{"x", x}, {"y", y}, {"horizon", horizon}, {"paths", paths}, {"seed", seed}, {"dt", dt},
                     {"scheme", scheme_s}, {"rel_tol", rel_tol}});
  std::string hash = config_hash(cfg);
  Tolerance tol{rel_tol, 0.0};

  auto recs = run_paths(mech, x, horizon, paths, seed, o);
  struct Row {
    std::string name;
    double analytic;
    Estimate est;
  };
  std::vector<Row> rows;
  rows.push_back({"P(X_inf=0)", hit_prob(mech, x, 0.0), extinction_prob_from(recs, horizon)});
  rows.push_back({"E[tau_0;X_inf=0]", mean_extinction_time(mech, x, tol).value,
                  restricted_mean_from(recs, Event::Extinct, horizon)});
  rows.push_back({"E[tau_inf;X_inf=inf]", mean_explosion_time(mech, x, tol).value,
                  restricted_mean_from(recs, Event::Exploded, horizon)});
  rows.push_back({"E[tau]", mean_absorption_time(mech, x, tol).value, restricted_mean_from(recs, Event::Either, horizon)});
  if (y > 0.0 && y < x) {
    auto lrecs = run_paths(mech, x, horizon, paths, seed, o, y);
    rows.push_back({"E[tau_inf^tau_y]", mean_two_sided(mech, x, y, tol).value, hit_time_from(lrecs, horizon)});
  }

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  os << "quantity,analytic,mc_point,stderr,n,horizon,censored_fraction,extrapolated,verdict\n";
  Json jr = Json::array();
  for (auto& r : rows) {
    r.est.seed = seed;
    std::string verdict;
    if (!std::isfinite(r.analytic))
      verdict = "analytic_infinite";
    else if (r.est.censored_fraction > 0.01)
      verdict = std::fabs(r.est.point - r.analytic) <= 3.0 * r.est.std_error ? "pass_censored" : "inconclusive_censored";
    else
      verdict = std::fabs(r.est.point - r.analytic) <= 3.0 * r.est.std_error ? "pass" : "fail";
    os << r.name << ',' << fmt(r.analytic) << ',' << fmt(r.est.point) << ',' << fmt(r.est.std_error) << ','
       << r.est.n_paths << ',' << fmt(horizon) << ',' << fmt(r.est.censored_fraction) << ','
       << fmt(r.est.extrapolated) << ',' << verdict << '\n';
    Json e = to_json(r.est);
    e["quantity"] = r.name;
    e["analytic"] = std::isfinite(r.analytic) ? Json(r.analytic) : Json("inf");
    e["verdict"] = verdict;
    jr.push_back(e);
  }
  emit(c.out, os.str());
  if (!c.json_out.empty()) write_text_file(c.json_out, Json{{"config", cfg}, {"config_hash", hash}, {"rows", jr}}.dump(2) + "\n");
  return kExitOk;
}

int cmd_converge(const Common& c, double x, double t, const std::string& ns_s, std::size_t paths,
                 std::uint64_t seed, double dt, const std::string& cdf_prefix) {
  MechanismSpec spec = load_spec(c.spec_path);
  Mechanism mech(spec);
  Json cfg = header("converge", spec,
                    {{"x", x}, {"t", t}, {"n", ns_s}, {"paths", paths}, {"seed", seed}, {"dt", dt}});
  std::string hash = config_hash(cfg);

  EulerOptions eo;
  eo.dt = dt;
  eo.snapshot_times = {t};
  std::vector<double> ref(paths);
  const long long np = static_cast<long long>(paths);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long k = 0; k < np; ++k) {
    Philox rng(seed ^ 0x5eedULL, stream_id(static_cast<std::uint64_t>(k)));
    auto out = simulate_euler(mech, {x}, t, eo, rng, nullptr);
    ref[static_cast<std::size_t>(k)] = out[0].snapshots[0];
  }
  std::sort(ref.begin(), ref.end());

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  os << "n,gamma_n,ks,ks_critical_95,p_value,censored\n";
  for (double n : parse_grid(ns_s)) {
    ChainSpec cs = build_approx_sequence(spec, n);
    Marginal m = rescaled_marginal(cs, x, t, paths, seed);
    KsResult ks = ks_two_sample(m.values, ref);
    os << fmt(n) << ',' << fmt(cs.gamma_n) << ',' << fmt(ks.statistic) << ',' << fmt(ks_critical(ks.n_effective)) << ','
       << fmt(ks.p_value) << ',' << m.censored << '\n';
    if (!cdf_prefix.empty()) {
      std::ostringstream cs_out;
      write_cdf_csv(cs_out, m.values, hash);
      write_text_file(cdf_prefix + "_n" + fmt(n) + ".csv", cs_out.str());
    }
  }
  emit(c.out, os.str());
  return kExitOk;
}

int cmd_roundtrip(const Common& c, std::uint64_t seed, double horizon, double dt) {
  Json in = read_json_file(c.spec_path);
  MechanismSpec spec = mechanism_from_json(in);
  Json back = to_json(spec);
  MechanismSpec again = mechanism_from_json(Json::parse(back.dump()));
  bool exact = to_json(again).dump() == back.dump();
  std::string hash = config_hash(header("roundtrip", spec, {{"seed", seed}, {"horizon", horizon}, {"dt", dt}}));

  Mechanism mech(spec);
  LevyPath p = sample_levy_path(mech, 1.0, horizon, dt, seed);
  PathSample s = inverse_lamperti(p, mech.theta());
  LevyPath r = forward_lamperti(s, mech.theta());
  double max_dt = 0.0;
  bool values_exact = r.values.size() == s.states.size();
  std::size_t m = std::min(r.times.size(), s.grid.size());
  for (std::size_t k = 0; k < m && k < p.times.size(); ++k) {
    max_dt = std::max(max_dt, std::fabs(r.times[k] - p.times[k]));
    if (r.values[k] != p.values[k] && !(std::isinf(r.values[k]) && std::isinf(p.values[k]))) values_exact = false;
  }

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  os << "spec_roundtrip_exact," << (exact ? 1 : 0) << "\n";
  os << "path_knots," << m << "\n";
  os << "max_time_error," << fmt(max_dt) << "\n";
  os << "values_exact," << (values_exact ? 1 : 0) << "\n";
  emit(c.out, os.str());
  if (!c.json_out.empty()) write_text_file(c.json_out, back.dump(2) + "\n");
  return exact ? kExitOk : kExitValidation;
}

void apply_thread_env() {
  if (const char* v = std::getenv("POLYBRANCH_THREADS")) {
    int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"polybranch: polynomial branching processes"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* s, bool need_spec = true) {
    auto* o = s->add_option("--spec", c.spec_path, "mechanism spec (JSON)");
    if (need_spec) o->required()->check(CLI::ExistingFile);
    s->add_option("-o,--out", c.out, "output file (default stdout)");
    s->add_option("--json", c.json_out, "JSON output file");
  };

  double x = 1.0, y = 0.0, horizon = 10.0, dt = 1e-3, rel_tol = 1e-8, n_max = 1048576.0, chain_n = 100.0, t = 1.0;
  std::uint64_t seed = 1;
  std::size_t paths = 10000;
  std::string ygrid = "0,0.5,1", scheme = "euler", ns = "50,200,800", lambda_csv, lambda_grid = "0.25,0.5,1,2,4",
              cdf_prefix;

  auto* classify_cmd = app.add_subcommand("classify", "boundary classification report");
  add_common(classify_cmd);
  classify_cmd->add_option("--x", x, "starting state")->check(CLI::PositiveNumber);
  classify_cmd->add_option("--lambda-csv", lambda_csv, "write psi on a lambda grid as CSV");
  classify_cmd->add_option("--lambda-grid", lambda_grid, "comma-separated lambda values");

  auto* times_cmd = app.add_subcommand("times", "table of mean hitting times");
  add_common(times_cmd);
  times_cmd->add_option("--x", x, "starting state")->check(CLI::PositiveNumber);
  times_cmd->add_option("--y-grid", ygrid, "comma-separated levels y");
  times_cmd->add_option("--rel-tol", rel_tol, "relative quadrature tolerance");

  auto* sim_cmd = app.add_subcommand("simulate", "one path as CSV");
  add_common(sim_cmd);
  sim_cmd->add_option("--x", x, "starting state");
  sim_cmd->add_option("--horizon", horizon, "time horizon");
  sim_cmd->add_option("--dt", dt, "time step");
  sim_cmd->add_option("--scheme", scheme, "euler | lamperti | chain");
  sim_cmd->add_option("--seed", seed, "seed");
  sim_cmd->add_option("--n-max", n_max, "truncation level");
  sim_cmd->add_option("--chain-n", chain_n, "scaling index for the chain scheme");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimates against the formulas");
  add_common(mc_cmd);
  mc_cmd->add_option("--x", x, "starting state");
  mc_cmd->add_option("--y", y, "level for the two-sided time (0 to skip)");
  mc_cmd->add_option("--horizon", horizon, "time horizon");
  mc_cmd->add_option("--paths", paths, "number of paths");
  mc_cmd->add_option("--seed", seed, "master seed");
  mc_cmd->add_option("--dt", dt, "time step");
  mc_cmd->add_option("--scheme", scheme, "euler | lamperti");
  mc_cmd->add_option("--rel-tol", rel_tol, "relative quadrature tolerance");

  auto* conv_cmd = app.add_subcommand("converge", "KS distance of the rescaled chain to the SDE marginal");
  add_common(conv_cmd);
  conv_cmd->add_option("--x", x, "starting state");
  conv_cmd->add_option("--t", t, "marginal time");
  conv_cmd->add_option("--n", ns, "comma-separated scaling indices");
  conv_cmd->add_option("--paths", paths, "paths per sample");
  conv_cmd->add_option("--seed", seed, "master seed");
  conv_cmd->add_option("--dt", dt, "Euler time step");
  conv_cmd->add_option("--cdf-prefix", cdf_prefix, "write empirical CDFs to <prefix>_n<n>.csv");

  auto* rt_cmd = app.add_subcommand("roundtrip", "spec serialization and Lamperti round trip");
  add_common(rt_cmd);
  rt_cmd->add_option("--seed", seed, "seed");
  rt_cmd->add_option("--horizon", horizon, "Levy-time horizon");
  rt_cmd->add_option("--dt", dt, "Levy time step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*classify_cmd) return cmd_classify(c, x, lambda_csv, lambda_grid);
    if (*times_cmd) return cmd_times(c, x, ygrid, rel_tol);
    if (*sim_cmd) return cmd_simulate(c, x, horizon, dt, scheme, seed, n_max, chain_n);
    if (*mc_cmd) return cmd_mc(c, x, y, horizon, paths, seed, dt, scheme, rel_tol);
    if (*conv_cmd) return cmd_converge(c, x, t, ns, paths, seed, dt, cdf_prefix);
    if (*rt_cmd) return cmd_roundtrip(c, seed, horizon, dt);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
