#pragma once

namespace survmine::stats {

// Upper tail of the chi-square distribution with df degrees of freedom,
// P(X > x). Returns 1 for x <= 0.
double chi_square_upper_tail(double x, double df);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double reg_gamma_p(double a, double x);
double reg_gamma_q(double a, double x);

// Standard normal density, CDF, and quantile (inverse CDF).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// Two-sided normal tail probability for a z statistic: 2 * (1 - Phi(|z|)).
double two_sided_p_from_z(double z);

}  // namespace survmine::stats
