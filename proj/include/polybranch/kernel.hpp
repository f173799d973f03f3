#pragma once

#include "polybranch/mechanism.hpp"

namespace polybranch {

// h_x(lambda) = (e^{-qx} - e^{-lambda x}) / psi(lambda), with h_x(q) = x e^{-qx} / psi'(q).
// Evaluation takes the offset d = lambda - q separately so that points near q keep
// full relative precision.
class HxKernel {
 public:
  HxKernel(const Mechanism& mech, double x);

  double x() const { return x_; }
  double q() const { return q_; }

  double operator()(double lambda) const { return value(lambda, lambda - q_); }
  double value(double lambda, double d) const;
  // h_x(q + d) for d >= 0
  double shifted(double d) const { return value(q_ + d, d); }
  // lambda * h_x(lambda); finite at lambda -> 0 when a = 0
  double reduced(double lambda, double d) const;
  double at_q() const;

  // e^{-qx} - e^{-(q+d)x}
  double numerator(double d) const;
  double window() const { return window_; }

 private:
  double taylor(double d) const;

  const Mechanism* mech_;
  double x_;
  double q_;
  double eqx_;
  double window_;
};

}  // namespace polybranch
