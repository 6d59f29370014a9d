#pragma once

#include <cstddef>
#include <span>

namespace compstat::stats {

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution: P(X >= x) with df degrees of freedom.
double chi_square_sf(double x, double df);

/// Inverse standard normal CDF.
double normal_quantile(double p);

/// Two-sided z multiplier for a given confidence level (e.g. 0.95 -> 1.95996...).
double z_for_confidence(double confidence);

/// log C(n, k) via lgamma.
double log_choose(double n, double k);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // propagated from per-point standard errors
};

/// Ordinary least squares of y on x. y_se (same length, may be empty) are
/// standard errors of the y values; the slope SE is sum(c_i^2 se_i^2) with
/// the OLS weights c_i, i.e. pure input-noise propagation.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y,
                  std::span<const double> y_se);

}  // namespace compstat::stats
