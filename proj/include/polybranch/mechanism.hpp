#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polybranch {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Atom {
  double z = 0.0;
  double w = 0.0;
};

struct StableSpec {
  double alpha = 1.5;
  double scale = 1.0;
};

// m(dz) = sum of atoms + C z^(-1-alpha) dz + killing * delta_inf
struct LevyMeasureSpec {
  std::vector<Atom> atoms;
  std::optional<StableSpec> stable;
  double killing = 0.0;
};

// Raw parameters as read from a file. Not checked against the standing assumption.
struct MechanismSpec {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double theta = 1.0;
  LevyMeasureSpec measure;
};

// Leading behaviour coefficient * lambda^exponent * (ln lambda)^log_power.
struct PowerLaw {
  double exponent = 0.0;
  int log_power = 0;
  double coefficient = 0.0;
};

struct MechanismProfile {
  double beta = 0.0;  // psi'(0), may be -inf
  double q = 0.0;
  double psi_at_zero = 0.0;
  PowerLaw origin;  // psi near 0
  PowerLaw tail;    // psi near infinity
  double psi_prime_q = 0.0;
  double psi_second_q = 0.0;
  bool grid_scan_positive = false;
};

// Stable closed forms (the compensator cut at z = 1 is folded into a linear term).
double stable_linear_shift(double alpha, double scale);
double stable_psi_part(double alpha, double scale, double lambda);

class Mechanism {
 public:
  explicit Mechanism(const MechanismSpec& spec);

  // psi(lambda) = lambda^alpha, theta given
  static Mechanism pure_stable(double alpha, double theta);
  static Mechanism quadratic(double b, double c, double theta, double a = 0.0);

  double a() const { return spec_.a; }
  double b() const { return spec_.b; }
  double c() const { return spec_.c; }
  double theta() const { return spec_.theta; }
  const LevyMeasureSpec& measure() const { return spec_.measure; }
  const MechanismSpec& spec() const { return spec_; }
  const MechanismProfile& profile() const { return profile_; }

  // lin: coefficient of lambda after regrouping all compensators
  double linear_coefficient() const { return lin_; }
  bool has_stable() const { return spec_.measure.stable.has_value(); }
  bool finite_variation() const;

  double psi(double lambda) const;
  // (psi(lambda) + a) / lambda, stable for tiny lambda
  double psi_reduced(double lambda) const;
  double psi_prime(double lambda) const;
  double psi_second(double lambda) const;
  double generator_on_exponential(double lambda, double x) const;

  // tail test: int^inf lambda^(theta-1)/psi < inf
  bool extinction_possible() const;
  // origin test together with the killing/beta conditions
  bool explosion_possible() const;

 private:
  void validate() const;
  void build_profile();
  double find_root() const;

  MechanismSpec spec_;
  double lin_ = 0.0;
  MechanismProfile profile_;
};

double psi(const Mechanism& m, double lambda);
double psi_prime(const Mechanism& m, double lambda);
double root_q(const Mechanism& m);
double generator_on_exponential(const Mechanism& m, double lambda, double x);

// Convergence of int lambda^e (ln lambda)^k near 0 (at_origin) or infinity.
bool power_integrable(double e, int k, bool at_origin);

}  // namespace polybranch
