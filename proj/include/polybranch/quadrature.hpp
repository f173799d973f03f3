#pragma once

#include <limits>
#include <string>
#include <vector>

#include "polybranch/mechanism.hpp"

namespace polybranch {

enum class IntegrandKind {
  Absorption,         // h_x(l) l^(theta-1)
  Extinction,         // h_x(l+q) l^(theta-1)
  Explosion,          // [h_x(l) - h_x(l+q)] l^(theta-1)
  TwoSided,           // e^{-qx} [e^{-(l-q)y} - e^{-(l-q)x}] / psi(l) l^(theta-1)
  FromInfinity,       // e^{-l y} l^(theta-1) / psi(l)
  CriterionPositive,  // l^(theta-1) / psi(l)
  CriterionNegative,  // l^(theta-1) / (-psi(l))
};

std::string to_string(IntegrandKind kind);

struct IntegrandParams {
  double x = 1.0;
  double y = 0.0;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct Tolerance {
  double rel = 1e-8;
  double abs = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
  int subdivisions = 0;
  bool divergent = false;
};

// Singular points {0, q, inf} of the family, in increasing order.
std::vector<double> singular_points(IntegrandKind kind, const Mechanism& mech);

// Raw integrand (no 1/Gamma(theta) prefactor). d is lambda - q, passed for precision near q.
double integrand(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params, double lambda);

// Decided from the origin/tail power laws of psi, never numerically.
bool analytically_divergent(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params);

// Integral over [params.lower, params.upper] (default (0, inf)).
QuadratureResult integrate(IntegrandKind kind, const Mechanism& mech, const IntegrandParams& params,
                           Tolerance tol = {});

}  // namespace polybranch
