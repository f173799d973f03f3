#pragma once

#include <vector>

#include "polybranch/mechanism.hpp"
#include "polybranch/rng.hpp"

namespace polybranch::detail {

// Levy-time dynamics of Y split for simulation: drift + Gaussian part (including the
// small stable jumps below the cutoff) + finitely many simulated jumps + killing.
struct JumpSource {
  double drift = 0.0;       // per unit Levy time
  double gauss_rate = 0.0;  // variance per unit Levy time
  double jump_rate = 0.0;   // simulated jumps per unit Levy time
  double kill_rate = 0.0;
  double stable_rate = 0.0;
  double stable_alpha = 0.0;
  double cutoff = 0.0;
  std::vector<double> atom_z;
  std::vector<double> atom_cum;  // cumulative atom rates

  JumpSource(const Mechanism& mech, double cutoff);

  double sample_size(Philox& rng) const;
};

}  // namespace polybranch::detail
