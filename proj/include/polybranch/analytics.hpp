#pragma once

#include <string>
#include <vector>

#include "polybranch/kernel.hpp"
#include "polybranch/mechanism.hpp"
#include "polybranch/quadrature.hpp"

namespace polybranch {

// P_x(tau_y < inf) = e^{-q(x-y)}; y = 0 gives P_x(X_inf = 0).
double hit_prob(const Mechanism& mech, double x, double y);

// Restricted expectations E_x(tau_0; X_inf = 0), E_x(tau_inf; X_inf = inf), E_x(tau).
// value = +inf when the integral diverges.
QuadratureResult mean_extinction_time(const Mechanism& mech, double x, Tolerance tol = {});
QuadratureResult mean_explosion_time(const Mechanism& mech, double x, Tolerance tol = {});
QuadratureResult mean_absorption_time(const Mechanism& mech, double x, Tolerance tol = {});
// E_x(tau_inf ^ tau_y), 0 < y <= x
QuadratureResult mean_two_sided(const Mechanism& mech, double x, double y, Tolerance tol = {});
// E(tau^inf_y); needs a = 0 and psi'(0) >= 0
QuadratureResult mean_hit_from_infinity(const Mechanism& mech, double y, Tolerance tol = {});

// Conditional versions: divide by P(X_inf = 0) or P(X_inf = inf).
double conditional_extinction_time(const Mechanism& mech, double x, Tolerance tol = {});
double conditional_explosion_time(const Mechanism& mech, double x, Tolerance tol = {});

enum class Verdict { Impossible, Possible, NotApplicable };
std::string to_string(Verdict v);

struct CriterionEvidence {
  std::string test;  // "extinction_tail", "explosion_origin", "coming_down_origin"
  IntegrandKind kind = IntegrandKind::CriterionPositive;
  double lower = 0.0;
  double upper = 0.0;
  bool finite = false;  // analytic verdict
  QuadratureResult integral;
  std::string note;
};

struct ClassificationReport {
  double x = 0.0;
  double q = 0.0;
  double beta = 0.0;
  double psi_at_zero = 0.0;
  double theta = 0.0;
  Verdict extinction = Verdict::Impossible;
  double extinction_prob = 0.0;  // P_x(tau_0 < inf)
  Verdict explosion = Verdict::Impossible;
  double explosion_prob = 0.0;  // P_x(tau_inf < inf)
  Verdict comes_down = Verdict::NotApplicable;
  double limit_zero_prob = 0.0;      // P_x(X_inf = 0)
  double limit_infinity_prob = 0.0;  // P_x(X_inf = inf)
  bool grid_scan_positive = false;
  std::vector<CriterionEvidence> evidence;
};

ClassificationReport classify(const Mechanism& mech, double x);

}  // namespace polybranch
