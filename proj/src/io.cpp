#include "polybranch/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace polybranch {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError(std::string("field '") + key + "' must be a number");
}

}  // namespace

Json to_json(const MechanismSpec& spec) {
  Json j;
  j["a"] = spec.a;
  j["b"] = spec.b;
  j["c"] = spec.c;
  j["theta"] = spec.theta;
  Json atoms = Json::array();
  for (const auto& at : spec.measure.atoms) atoms.push_back({at.z, at.w});
  j["atoms"] = atoms;
  if (spec.measure.stable) j["stable"] = {{"alpha", spec.measure.stable->alpha}, {"scale", spec.measure.stable->scale}};
  j["killing"] = spec.measure.killing;
  return j;
}

MechanismSpec mechanism_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("mechanism spec must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (k != "a" && k != "b" && k != "c" && k != "theta" && k != "atoms" && k != "stable" && k != "killing")
      throw ValidationError("unknown mechanism field '" + k + "'");
  }
  MechanismSpec s;
  s.a = get_num(j, "a", 0.0);
  s.b = get_num(j, "b", 0.0);
  s.c = get_num(j, "c", 0.0);
  s.theta = get_num(j, "theta", 1.0);
  if (j.contains("atoms")) {
    const Json& atoms = j.at("atoms");
    if (!atoms.is_array()) throw ValidationError("atoms must be an array of [z, w]");
    for (const auto& at : atoms) {
      if (!at.is_array() || at.size() != 2 || !at[0].is_number() || !at[1].is_number())
        throw ValidationError("each atom must be [z, w]");
      s.measure.atoms.push_back({at[0].get<double>(), at[1].get<double>()});
    }
  }
  if (j.contains("stable") && !j.at("stable").is_null()) {
    const Json& st = j.at("stable");
    if (!st.is_object()) throw ValidationError("stable must be an object {alpha, scale}");
    s.measure.stable = StableSpec{get_num(st, "alpha", 1.5), get_num(st, "scale", 1.0)};
  }
  s.measure.killing = get_num(j, "killing", s.a);
  return s;
}

Json to_json(const ChainSpec& spec) {
  Json j;
  j["theta"] = spec.theta;
  j["alpha_rate"] = spec.alpha_rate;
  j["n"] = spec.n;
  j["gamma_n"] = spec.gamma_n;
  j["offspring"] = spec.offspring.p;
  j["to_infinity"] = spec.offspring.to_infinity();
  return j;
}

ChainSpec chain_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("chain spec must be a JSON object");
  ChainSpec s;
  s.theta = get_num(j, "theta", 1.0);
  s.alpha_rate = get_num(j, "alpha_rate", 1.0);
  s.n = get_num(j, "n", 1.0);
  s.gamma_n = get_num(j, "gamma_n", 1.0);
  if (!j.contains("offspring") || !j.at("offspring").is_array()) throw ValidationError("chain needs an offspring array");
  for (const auto& v : j.at("offspring")) {
    if (!v.is_number()) throw ValidationError("offspring entries must be numbers");
    s.offspring.p.push_back(v.get<double>());
  }
  s.validate();
  return s;
}

Json to_json(const QuadratureResult& r) {
  return {{"value", num(r.value)},
          {"abs_error", num(r.abs_error)},
          {"converged", r.converged},
          {"subdivisions", r.subdivisions},
          {"divergent", r.divergent}};
}

Json to_json(const ClassificationReport& r) {
  Json j;
  j["x"] = num(r.x);
  j["theta"] = num(r.theta);
  j["q"] = num(r.q);
  j["beta"] = num(r.beta);
  j["psi_at_zero"] = num(r.psi_at_zero);
  j["extinction"] = to_string(r.extinction);
  j["extinction_prob"] = num(r.extinction_prob);
  j["explosion"] = to_string(r.explosion);
  j["explosion_prob"] = num(r.explosion_prob);
  j["comes_down_from_infinity"] = to_string(r.comes_down);
  j["limit_zero_prob"] = num(r.limit_zero_prob);
  j["limit_infinity_prob"] = num(r.limit_infinity_prob);
  j["grid_scan_positive"] = r.grid_scan_positive;
  Json ev = Json::array();
  for (const auto& e : r.evidence) {
    ev.push_back({{"test", e.test},
                  {"integrand", to_string(e.kind)},
                  {"lower", num(e.lower)},
                  {"upper", num(e.upper)},
                  {"finite", e.finite},
                  {"integral", to_json(e.integral)},
                  {"note", e.note}});
  }
  j["evidence"] = ev;
  return j;
}

Json to_json(const Estimate& e) {
  return {{"point", num(e.point)},
          {"stderr", num(e.std_error)},
          {"n_paths", e.n_paths},
          {"censored_fraction", num(e.censored_fraction)},
          {"horizon", num(e.horizon)},
          {"seed", e.seed},
          {"lower_bound", num(e.lower_bound)},
          {"extrapolated", num(e.extrapolated)}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream& os, const PathSample& s, const std::string& hash) {
  os << "# config_hash=" << hash << " scheme=" << to_string(s.scheme) << " seed=" << s.seed << "\n";
  os << "t,left,state\n";
  for (std::size_t k = 0; k < s.grid.size(); ++k)
    os << format_double(s.grid[k]) << ',' << format_double(s.left[k]) << ',' << format_double(s.states[k]) << '\n';
}

void write_cdf_csv(std::ostream& os, const std::vector<double>& sorted_values, const std::string& hash) {
  os << "# config_hash=" << hash << "\n";
  os << "value,cumprob\n";
  for (const auto& [v, p] : empirical_cdf(sorted_values)) os << format_double(v) << ',' << format_double(p) << '\n';
}

}  // namespace polybranch
