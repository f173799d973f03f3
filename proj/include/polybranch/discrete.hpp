#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "polybranch/mechanism.hpp"
#include "polybranch/rng.hpp"
#include "polybranch/simulate.hpp"

namespace polybranch {

// Offspring distribution b_k, k = 0, 2, 3, ...; p[1] is kept at 0. The deficiency 1 - sum p
// is the mass b_inf of a jump to infinity.
struct OffspringLaw {
  std::vector<double> p;

  double total() const;
  double to_infinity() const;
  // sum_k p_k s^k for s in [0,1]
  double pgf(double s) const;
  void validate() const;
};

// One closed-form piece of a generating-function mixture gamma * g(s).
struct GfBlock {
  enum class Kind { Killing, Death, Birth, Diffusion, Poisson };
  Kind kind = Kind::Death;
  double gamma = 0.0;
  double param = 0.0;  // killing: a / n^2; Poisson: mean m >= 1
};

struct ChainSpec {
  OffspringLaw offspring;
  double theta = 1.0;
  double alpha_rate = 1.0;
  double n = 1.0;
  double gamma_n = 1.0;
  std::vector<GfBlock> blocks;  // construction record; empty for hand-written chains

  void validate() const;
};

struct QRow {
  std::map<std::uint64_t, double> rates;  // off-diagonal finite targets
  double to_infinity = 0.0;
  double diagonal = 0.0;
};

QRow q_matrix_row(const ChainSpec& spec, std::uint64_t i);

struct ChainOptions {
  std::uint64_t max_events = 100000000;
  double max_state = 9007199254740992.0;  // 2^53, treated as a truncation
  bool record = true;
};

// Exact event-driven simulation; the sample uses Scheme::Chain with piecewise constant states.
PathSample gillespie(const ChainSpec& spec, std::uint64_t i0, double horizon, std::uint64_t seed,
                     const ChainOptions& opts = {});
PathSample gillespie(const ChainSpec& spec, std::uint64_t i0, double horizon, Philox& rng,
                     const ChainOptions& opts = {});

// gamma [g(e^{-lambda/n}) - e^{-lambda/n}] and gamma [g(1 - lambda/n) - (1 - lambda/n)] by direct
// summation over the law.
double phi_n(const OffspringLaw& law, double gamma_n, double n, double lambda);
double psi_n(const OffspringLaw& law, double gamma_n, double n, double lambda);
// Same quantities from the closed-form blocks of a constructed chain.
double phi_n_blocks(const ChainSpec& spec, double lambda);
double psi_n_blocks(const ChainSpec& spec, double lambda);

struct ApproxOptions {
  std::uint64_t max_children = 1000000;
  double cell_ratio = 1.02;  // geometric cell width for stable jumps
};

// Chain whose rescaling n^{-1} xi_n(gamma_n t) approximates the process of the mechanism.
// The rate constant is n^{-theta}, so gamma_n t is the chain time matching X-time t.
ChainSpec build_approx_sequence(const MechanismSpec& spec, double n, const ApproxOptions& opts = {});
ChainSpec build_approx_sequence(const Mechanism& mech, double n, const ApproxOptions& opts = {});

struct Marginal {
  std::vector<double> values;  // sorted; +inf for explosion
  std::size_t censored = 0;    // event cap or state cap reached before t
};

// n^{-1} xi_n(gamma_n t) over n_paths chains started at round(n x0).
Marginal rescaled_marginal(const ChainSpec& spec, double x0, double t, std::size_t n_paths, std::uint64_t seed,
                           const ChainOptions& opts = {});
Marginal rescaled_marginal_serial(const ChainSpec& spec, double x0, double t, std::size_t n_paths,
                                  std::uint64_t seed, const ChainOptions& opts = {});

// (value, cumulative probability) at each distinct value
std::vector<std::pair<double, double>> empirical_cdf(const std::vector<double>& sorted_values);

}  // namespace polybranch
