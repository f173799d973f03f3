#include "polybranch/kernel.hpp"

#include <cmath>
#include <limits>

namespace polybranch {

HxKernel::HxKernel(const Mechanism& mech, double x)
    : mech_(&mech), x_(x), q_(mech.profile().q), eqx_(std::exp(-mech.profile().q * x)) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("h_x kernel: x must be finite and >= 0");
  window_ = q_ > 0.0 ? 1e-8 * (1.0 + q_) : 0.0;
}

double HxKernel::numerator(double d) const { return -eqx_ * std::expm1(-d * x_); }

double HxKernel::at_q() const {
  const auto& p = mech_->profile();
  if (x_ == 0.0) return 0.0;
  if (p.psi_prime_q == 0.0) return std::numeric_limits<double>::infinity();
  return x_ * eqx_ / p.psi_prime_q;
}

double HxKernel::taylor(double d) const {
  const auto& p = mech_->profile();
  return eqx_ * x_ * (1.0 - 0.5 * x_ * d) / (p.psi_prime_q + 0.5 * p.psi_second_q * d);
}

double HxKernel::value(double lambda, double d) const {
  if (x_ == 0.0) return 0.0;
  if (q_ > 0.0 && std::fabs(d) <= window_) return taylor(d);
  if (lambda == 0.0) {
    // q > 0 here; a = 0 gives psi(0) = 0 and an infinite value
    if (mech_->a() == 0.0) return std::numeric_limits<double>::infinity();
    return (eqx_ - 1.0) / -mech_->a();
  }
  if (q_ == 0.0) {
    if (d == 0.0) return at_q();
    return (-std::expm1(-d * x_) / d) / mech_->psi_reduced(d);
  }
  return numerator(d) / mech_->psi(lambda);
}

double HxKernel::reduced(double lambda, double d) const {
  if (x_ == 0.0 || lambda == 0.0) {
    if (x_ == 0.0) return 0.0;
    if (mech_->a() > 0.0) return 0.0;
    if (q_ == 0.0) return 0.0;
    return (eqx_ - 1.0) / mech_->psi_reduced(std::numeric_limits<double>::min());
  }
  if (q_ > 0.0 && std::fabs(d) <= window_) return lambda * taylor(d);
  if (mech_->a() == 0.0) {
    if (q_ == 0.0) return -std::expm1(-d * x_) / mech_->psi_reduced(d);
    return numerator(d) / mech_->psi_reduced(lambda);
  }
  return lambda * (numerator(d) / mech_->psi(lambda));
}

}  // namespace polybranch
