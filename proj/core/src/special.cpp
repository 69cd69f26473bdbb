#include "decouplenet/special.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "decouplenet/errors.hpp"

namespace dcn::num {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    // erfc keeps full relative accuracy in the lower tail; symmetry covers
    // the upper one.
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

namespace {

// Acklam's rational approximation of the normal quantile (|rel err| < 1.2e-9).
double normal_quantile_approx(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    static const double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("std_normal_quantile: p must lie strictly in (0,1)");
    // Work on the lower tail: 1-p is exact for p >= 0.5, and there the
    // residual normal_cdf(x) - p is free of cancellation, so the Halley
    // polish below reaches full precision uniformly in p.
    if (p > 0.5)
        return -std_normal_quantile(1.0 - p);
    double x = normal_quantile_approx(p);
    // One Halley step against the exact CDF.
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double debye1(double x) {
    if (!(x >= 0.0))
        throw DomainError("debye1: x must be nonnegative");
    if (x == 0.0)
        return 1.0; // continuous limit
    if (x < 1.0) {
        // D1(x) = 1 - x/4 + sum_k B_{2k} x^{2k} / ((2k+1)(2k)!)
        static const double coeff[] = {
            1.0 / 36.0,                  // B2/(3*2!)
            -1.0 / 3600.0,               // B4/(5*4!)
            1.0 / 211680.0,              // B6/(7*6!)
            -1.0 / 10886400.0,           // B8/(9*8!)
            1.0 / 526901760.0,           // B10/(11*10!)
            -691.0 / 16999766784000.0,   // B12/(13*12!)
            1.0 / 1120863744000.0,       // B14/(15*14!)
        };
        const double x2 = x * x;
        double term = 1.0, sum = 1.0 - 0.25 * x;
        for (double ck : coeff) {
            term *= x2;
            sum += ck * term;
        }
        return sum;
    }
    // D1(x) = (1/x) [ pi^2/6 - sum_{k>=1} e^{-kx} (x/k + 1/k^2) ]
    static const double pi2_6 = 1.6449340668482264365;
    double sum = 0.0;
    for (int k = 1; k < 64; ++k) {
        const double t = std::exp(-k * x) * (x / k + 1.0 / (static_cast<double>(k) * k));
        sum += t;
        if (t < 1e-18 * pi2_6)
            break;
    }
    return (pi2_6 - sum) / x;
}

double t_pdf(double x, double nu) {
    if (!(nu > 0.0))
        throw DomainError("t_pdf: nu must be positive");
    return boost::math::pdf(boost::math::students_t(nu), x);
}

double t_cdf(double x, double nu) {
    if (!(nu > 0.0))
        throw DomainError("t_cdf: nu must be positive");
    return boost::math::cdf(boost::math::students_t(nu), x);
}

double t_quantile(double p, double nu) {
    if (!(nu > 0.0))
        throw DomainError("t_quantile: nu must be positive");
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("t_quantile: p must lie strictly in (0,1)");
    return boost::math::quantile(boost::math::students_t(nu), p);
}

} // namespace dcn::num
