#pragma once

// Independent numerical oracles used only by the tests. Everything here is
// derived from first principles or from vetted third-party code (std::erfc,
// Boost distributions, Eigen linear algebra) without calling into the code
// paths under test: a normal CDF, bisection inversion, Kolmogorov-Smirnov
// p-values, adaptive Simpson quadrature, mixed finite differences, and
// density-slice conditional CDFs for the normal and t copulas.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_logpdf(double x) {
    return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
}

// Bisection inverse of a strictly increasing function; 200 halvings take the
// bracket to one ulp of its width.
inline double invert_increasing(const std::function<double(double)>& f, double target,
                                double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double normal_quantile(double p) {
    if (p > 0.5) // 1-p is exact here; the lower tail avoids quantization at 1
        return -normal_quantile(1.0 - p);
    return invert_increasing([](double x) { return normal_cdf(x); }, p, -40.0, 40.0);
}

inline double t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t(nu), x);
}

inline double t_quantile(double p, double nu) {
    return boost::math::quantile(boost::math::students_t(nu), p);
}

inline double t_logpdf(double x, double nu) {
    return std::log(boost::math::pdf(boost::math::students_t(nu), x));
}

// Asymptotic Kolmogorov distribution tail Q(t) = 2 sum (-1)^{k-1} e^{-2k^2t^2}.
inline double kolmogorov_tail(double t) {
    if (t < 1e-8)
        return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * std::exp(-2.0 * double(k) * double(k) * t * t);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-16)
            break;
    }
    return std::clamp(q, 0.0, 1.0);
}

// One-sample KS p-value against a continuous CDF (Stephens' small-sample
// correction on the asymptotic distribution).
inline double ks_pvalue(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    return kolmogorov_tail(t);
}

inline double ks_uniform_pvalue(std::vector<double> x) {
    return ks_pvalue(std::move(x), [](double u) { return std::clamp(u, 0.0, 1.0); });
}

// Two-sample KS p-value (asymptotic).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
}

// Adaptive Simpson quadrature with an absolute tolerance.
namespace detail {
inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
} // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11) {
    if (!(a < b))
        return a == b ? 0.0 : -integrate(f, b, a, tol);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return detail::adapt(f, a, fa, b, fb, m, fm, detail::simpson(a, fa, b, fb, fm), tol, 40);
}

// Integrate with interior landmark splits so adaptive refinement cannot
// terminate early on an unseen spike.
inline double integrate_split(const std::function<double(double)>& f, double a, double b,
                              std::vector<double> landmarks, double tol = 1e-11) {
    landmarks.push_back(a);
    landmarks.push_back(b);
    std::sort(landmarks.begin(), landmarks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < landmarks.size(); ++i) {
        const double lo = std::clamp(landmarks[i], a, b);
        const double hi = std::clamp(landmarks[i + 1], a, b);
        if (hi > lo)
            total += integrate(f, lo, hi, tol);
    }
    return total;
}

// Central mixed partial derivative of f over the listed coordinates, each
// differentiated once, by the 2^k corner stencil. The step is chosen per
// derivative order so truncation and cancellation errors balance.
template <class F>
double mixed_partial(const F& f, const Eigen::VectorXd& u, const std::vector<int>& vars,
                     double h) {
    const int k = static_cast<int>(vars.size());
    double sum = 0.0;
    for (int mask = 0; mask < (1 << k); ++mask) {
        Eigen::VectorXd v = u;
        int sign = 1;
        for (int i = 0; i < k; ++i) {
            if (mask & (1 << i)) {
                v[vars[i]] += h;
            } else {
                v[vars[i]] -= h;
                sign = -sign;
            }
        }
        sum += sign * f(v);
    }
    return sum / std::pow(2.0 * h, k);
}

inline double fd_step_for_order(int order) {
    return std::pow(2.2e-16, 1.0 / (order + 2));
}

// Richardson extrapolation of the stencil at h and h/2 cancels the leading
// O(h^2) truncation term, leaving O(h^4); the matching step balances that
// against the stencil's O(eps / h^order) cancellation error.
template <class F>
double mixed_partial_richardson(const F& f, const Eigen::VectorXd& u,
                                const std::vector<int>& vars, double h) {
    const double coarse = mixed_partial(f, u, vars, h);
    const double fine = mixed_partial(f, u, vars, 0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

inline double richardson_step_for_order(int order) {
    return std::pow(2.2e-16, 1.0 / (order + 4));
}

// ---------------------------------------------------------------------------
// Density-slice conditional CDF oracles for the elliptical copulas.
//
// For U ~ normal copula with correlation P, write z_i = Phi^{-1}(u_i). Then
//   C(u_j | u_1..u_{j-1}) = Int_{-inf}^{z_j} phi_P(z_1..z_{j-1}, s) ds
//                           / phi_{P_{j-1}}(z_1..z_{j-1}),
// i.e. a slice integral of the joint normal density over the last coordinate
// normalized by the marginal block density. The t copula is the same with
// multivariate-t densities (the leading block of a t is t with the same nu).
// Both are evaluated by adaptive quadrature with landmark splits; nothing is
// shared with the closed-form conditionals under test.
// ---------------------------------------------------------------------------

inline double mvn_logpdf(const Eigen::VectorXd& z, const Eigen::MatrixXd& P) {
    const Eigen::Index k = z.size();
    const Eigen::LLT<Eigen::MatrixXd> llt(P.topLeftCorner(k, k));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("oracle mvn_logpdf: block not positive definite");
    const Eigen::VectorXd w = llt.matrixL().solve(z);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (w.squaredNorm() + logdet + static_cast<double>(k) * std::log(2.0 * M_PI));
}

inline double mvt_logpdf(const Eigen::VectorXd& x, double nu, const Eigen::MatrixXd& P) {
    const Eigen::Index k = x.size();
    const Eigen::LLT<Eigen::MatrixXd> llt(P.topLeftCorner(k, k));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("oracle mvt_logpdf: block not positive definite");
    const Eigen::VectorXd w = llt.matrixL().solve(x);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double kk = static_cast<double>(k);
    return std::lgamma(0.5 * (nu + kk)) - std::lgamma(0.5 * nu) -
           0.5 * kk * std::log(nu * M_PI) - 0.5 * logdet -
           0.5 * (nu + kk) * std::log1p(w.squaredNorm() / nu);
}

// Conditional CDF of the normal copula's j-th coordinate (0-based) given the
// first j coordinates of u, via quadrature in z-space.
inline double normal_conditional_cdf(const Eigen::VectorXd& u, int j,
                                     const Eigen::MatrixXd& P) {
    Eigen::VectorXd z(j + 1);
    for (int i = 0; i <= j; ++i)
        z[i] = normal_quantile(u[i]);
    const auto joint = [&](double s) {
        Eigen::VectorXd v = z;
        v[j] = s;
        return std::exp(mvn_logpdf(v, P));
    };
    const std::vector<double> marks = {-8, -4, -2, -1, 0, 1, 2, 4, 8};
    const double numerator = integrate_split(joint, -40.0, z[j], marks);
    const double denominator = std::exp(mvn_logpdf(z.head(j), P));
    return numerator / denominator;
}

// Same for the t copula; the integral runs in an arctan-substituted variable
// so the heavy tail is integrated exactly over a finite interval.
inline double t_conditional_cdf(const Eigen::VectorXd& u, int j, double nu,
                                const Eigen::MatrixXd& P) {
    Eigen::VectorXd x(j + 1);
    for (int i = 0; i <= j; ++i)
        x[i] = t_quantile(u[i], nu);
    const double scale = 3.0;
    const auto integrand = [&](double phi) {
        const double s = scale * std::tan(phi);
        const double jac = scale / (std::cos(phi) * std::cos(phi));
        Eigen::VectorXd v = x;
        v[j] = s;
        return std::exp(mvt_logpdf(v, nu, P)) * jac;
    };
    const double upper = std::atan(x[j] / scale);
    std::vector<double> marks;
    for (double m : {-1.5, -1.2, -0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9, 1.2, 1.5})
        marks.push_back(m);
    const double numerator = integrate_split(integrand, -0.5 * M_PI + 1e-12, upper, marks);
    const double denominator = std::exp(mvt_logpdf(x.head(j), nu, P));
    return numerator / denominator;
}

} // namespace oracle
