#pragma once

#include <vector>

namespace polybranch {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double n_effective = 0.0;  // n1 n2 / (n1 + n2)
};

// Two-sample Kolmogorov-Smirnov statistic; ties and infinite values are allowed.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// Same statistic for samples already sorted ascending.
double ks_statistic_sorted(const std::vector<double>& a, const std::vector<double>& b);

// Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2)
double kolmogorov_q(double t);
// Asymptotic p-value for statistic d at effective size ne (small-sample corrected).
double ks_p_value(double d, double ne);
// Distance d with ks_p_value(d, ne) = level.
double ks_critical(double ne, double level = 0.05);

}  // namespace polybranch
