#pragma once

namespace dcn::num {

// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);

// Inverse of the standard normal distribution function on (0,1).
// Rational initial approximation polished by one Halley step; absolute error
// is far below 1e-9 across [1e-12, 1 - 1e-12].
double std_normal_quantile(double p);

// First Debye function D1(x) = (1/x) * Integral_0^x t/(e^t - 1) dt, x > 0,
// relative error below 1e-10.  Power series for small x, the exact
// exponential tail sum otherwise.
double debye1(double x);

// Student t distribution with nu > 0 degrees of freedom (standard location
// and scale).
double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

} // namespace dcn::num
