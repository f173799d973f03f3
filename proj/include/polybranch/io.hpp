#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "polybranch/analytics.hpp"
#include "polybranch/discrete.hpp"
#include "polybranch/mechanism.hpp"
#include "polybranch/montecarlo.hpp"
#include "polybranch/simulate.hpp"

namespace polybranch {

using Json = nlohmann::json;

// {"a","b","c","theta","atoms":[[z,w],...],"stable":{"alpha","scale"},"killing"}; a missing
// killing field defaults to a.
Json to_json(const MechanismSpec& spec);
MechanismSpec mechanism_from_json(const Json& j);

// chain: {"theta","alpha_rate","n","gamma_n","offspring":[b_0, b_1, ...]}
Json to_json(const ChainSpec& spec);
ChainSpec chain_from_json(const Json& j);

Json to_json(const QuadratureResult& r);
Json to_json(const ClassificationReport& r);
Json to_json(const Estimate& e);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const Json& config);

// CSV: t,left,state per knot
void write_path_csv(std::ostream& os, const PathSample& s, const std::string& hash);
// CSV: value,cumprob
void write_cdf_csv(std::ostream& os, const std::vector<double>& sorted_values, const std::string& hash);

// shortest representation that parses back to the same double
std::string format_double(double v);

}  // namespace polybranch
