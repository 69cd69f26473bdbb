#include "decouplenet/copula.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/samplers.hpp"
#include "decouplenet/special.hpp"

namespace dcn::copula {

namespace {

constexpr double UEPS = 1e-15; // keep sampled margins strictly inside (0,1)

double clamp_unit(double u) { return std::min(1.0 - UEPS, std::max(UEPS, u)); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

bool is_exchangeable(const Eigen::MatrixXd& P) {
    const double r = P(0, 1);
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j)
            if (i != j && P(i, j) != r)
                return false;
    return true;
}

} // namespace

int dim(const CopulaSpec& spec) {
    return std::visit(overloaded{
                          [](const Independence& c) { return c.d; },
                          [](const Clayton& c) { return c.d; },
                          [](const Frank& c) { return c.d; },
                          [](const Gumbel& c) { return c.d; },
                          [](const Normal& c) { return c.P.dim(); },
                          [](const NormalExchangeable& c) { return c.d; },
                          [](const StudentT& c) { return c.P.dim(); },
                          [](const NestedClayton& c) { return c.d; },
                          [](const EmpiricalCopula& c) { return static_cast<int>(c.points.d()); },
                      },
                      spec);
}

std::string label(const CopulaSpec& spec) {
    return std::visit(
        overloaded{
            [](const Independence&) { return std::string("independence"); },
            [](const Clayton& c) { return "clayton(tau=" + fmt(param_to_tau(Family::clayton, c.theta)) + ")"; },
            [](const Frank& c) { return "frank(tau=" + fmt(param_to_tau(Family::frank, c.theta)) + ")"; },
            [](const Gumbel& c) { return "gumbel(tau=" + fmt(param_to_tau(Family::gumbel, c.theta)) + ")"; },
            [](const Normal& c) {
                if (is_exchangeable(c.P.matrix()))
                    return "normal(rho=" + fmt(c.P.matrix()(0, 1)) + ")";
                return "normal(d=" + std::to_string(c.P.dim()) + ")";
            },
            [](const NormalExchangeable& c) { return "normal(rho=" + fmt(c.rho) + ")"; },
            [](const StudentT& c) {
                if (is_exchangeable(c.P.matrix()))
                    return "t(nu=" + fmt(c.nu) + "; rho=" + fmt(c.P.matrix()(0, 1)) + ")";
                return "t(nu=" + fmt(c.nu) + "; d=" + std::to_string(c.P.dim()) + ")";
            },
            [](const NestedClayton& c) {
                std::string s = "nested-clayton(tau0=" + fmt(param_to_tau(Family::clayton, c.theta0));
                for (const auto& g : c.groups) {
                    s += "; ";
                    for (std::size_t k = 0; k < g.members.size(); ++k)
                        s += (k ? "+" : "") + std::to_string(g.members[k] + 1);
                    s += ":" + fmt(param_to_tau(Family::clayton, g.theta));
                }
                return s + ")";
            },
            [](const EmpiricalCopula& c) { return "empirical(n=" + std::to_string(c.points.n()) + ")"; },
        },
        spec);
}

void validate(const CopulaSpec& spec) {
    std::visit(
        overloaded{
            [](const Independence& c) {
                if (c.d < 2)
                    throw DomainError("independence copula: d must be at least 2");
            },
            [](const Clayton& c) {
                if (c.d < 2)
                    throw DomainError("clayton copula: d must be at least 2");
                if (!(c.theta > 0.0) || !std::isfinite(c.theta))
                    throw DomainError("clayton copula: theta must be positive");
            },
            [](const Frank& c) {
                if (c.d < 2)
                    throw DomainError("frank copula: d must be at least 2");
                if (c.theta == 0.0 || !std::isfinite(c.theta))
                    throw DomainError("frank copula: theta must be finite and non-zero");
            },
            [](const Gumbel& c) {
                if (c.d < 2)
                    throw DomainError("gumbel copula: d must be at least 2");
                if (!(c.theta >= 1.0) || !std::isfinite(c.theta))
                    throw DomainError("gumbel copula: theta must be at least 1");
            },
            [](const Normal& c) {
                if (c.P.dim() < 2)
                    throw DomainError("normal copula: dimension must be at least 2");
            },
            [](const NormalExchangeable& c) {
                if (c.d < 2)
                    throw DomainError("normal copula: d must be at least 2");
                if (!(c.rho <= 1.0) || !(c.rho >= -1.0 / (c.d - 1)))
                    throw DomainError("normal copula: exchangeable rho out of range");
            },
            [](const StudentT& c) {
                if (c.P.dim() < 2)
                    throw DomainError("t copula: dimension must be at least 2");
                if (!(c.nu > 0.0) || !std::isfinite(c.nu))
                    throw DomainError("t copula: nu must be positive");
            },
            [](const NestedClayton& c) {
                if (c.d < 2)
                    throw DomainError("nested-clayton copula: d must be at least 2");
                if (!(c.theta0 > 0.0) || !std::isfinite(c.theta0))
                    throw DomainError("nested-clayton copula: theta0 must be positive");
                std::set<int> seen;
                for (const auto& g : c.groups) {
                    if (g.members.size() < 2)
                        throw DomainError("nested-clayton copula: groups need at least 2 members");
                    if (!(g.theta >= c.theta0) || !std::isfinite(g.theta))
                        throw DomainError(
                            "nested-clayton copula: group theta must be >= theta0 (sufficient "
                            "nesting condition)");
                    for (int m : g.members) {
                        if (m < 0 || m >= c.d)
                            throw DomainError("nested-clayton copula: member index out of range");
                        if (!seen.insert(m).second)
                            throw DomainError("nested-clayton copula: groups must be disjoint");
                    }
                }
            },
            [](const EmpiricalCopula& c) {
                if (c.points.n() < 1 || c.points.d() < 2)
                    throw DomainError("empirical copula: need at least one point, d >= 2");
                if (!(c.points.values.minCoeff() > 0.0) || !(c.points.values.maxCoeff() < 1.0))
                    throw DomainError("empirical copula: points must lie strictly inside (0,1)^d");
            },
        },
        spec);
}

// ---------------------------------------------------------------------------
// tau <-> parameter
// ---------------------------------------------------------------------------

namespace {

double frank_tau_of_theta(double theta) {
    if (theta < 0.0)
        return -frank_tau_of_theta(-theta);
    return 1.0 - 4.0 / theta * (1.0 - num::debye1(theta));
}

double frank_theta_of_tau(double tau) {
    if (tau < 0.0)
        return -frank_theta_of_tau(-tau);
    double lo = 1e-12, hi = 1.0;
    while (frank_tau_of_theta(hi) < tau) {
        hi *= 2.0;
        if (hi > 1e15)
            throw NumericError("frank copula: tau inversion failed to bracket");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (frank_tau_of_theta(mid) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double tau_to_param(Family family, double tau) {
    switch (family) {
    case Family::independence:
        throw DomainError("tau_to_param: the independence copula has no parameter");
    case Family::clayton:
        if (!(tau > 0.0 && tau < 1.0))
            throw DomainError("tau_to_param: clayton requires tau in (0,1)");
        return 2.0 * tau / (1.0 - tau);
    case Family::gumbel:
        if (!(tau > 0.0 && tau < 1.0))
            throw DomainError("tau_to_param: gumbel requires tau in (0,1)");
        return 1.0 / (1.0 - tau);
    case Family::frank:
        if (!(std::abs(tau) > 1e-12) || !(std::abs(tau) < 1.0))
            throw DomainError("tau_to_param: frank requires tau in (-1,1) \\ {0}");
        return frank_theta_of_tau(tau);
    case Family::normal:
    case Family::student_t:
        if (!(tau > -1.0 && tau < 1.0))
            throw DomainError("tau_to_param: elliptical families require tau in (-1,1)");
        return std::sin(M_PI * tau / 2.0);
    }
    throw DomainError("tau_to_param: unknown family");
}

double param_to_tau(Family family, double param) {
    switch (family) {
    case Family::independence:
        throw DomainError("param_to_tau: the independence copula has no parameter");
    case Family::clayton:
        if (!(param > 0.0))
            throw DomainError("param_to_tau: clayton requires theta > 0");
        return param / (param + 2.0);
    case Family::gumbel:
        if (!(param >= 1.0))
            throw DomainError("param_to_tau: gumbel requires theta >= 1");
        return 1.0 - 1.0 / param;
    case Family::frank:
        if (param == 0.0)
            throw DomainError("param_to_tau: frank requires theta != 0");
        return frank_tau_of_theta(param);
    case Family::normal:
    case Family::student_t:
        if (!(param >= -1.0 && param <= 1.0))
            throw DomainError("param_to_tau: elliptical families require rho in [-1,1]");
        return 2.0 / M_PI * std::asin(param);
    }
    throw DomainError("param_to_tau: unknown family");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd sample_independence(int d, Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd u(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            u(i, j) = rng.uniform_open();
    return u;
}

Eigen::MatrixXd sample_clayton(int d, double theta, Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd u(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = num::sample_gamma(1.0 / theta, rng);
        for (int j = 0; j < d; ++j)
            u(i, j) = clamp_unit(std::exp(-std::log1p(rng.exponential() / v) / theta));
    }
    return u;
}

Eigen::MatrixXd sample_gumbel(int d, double theta, Eigen::Index n, Rng& rng) {
    if (theta == 1.0) // boundary case: the independence copula
        return sample_independence(d, n, rng);
    const double alpha = 1.0 / theta;
    Eigen::MatrixXd u(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = num::sample_positive_stable(alpha, rng);
        for (int j = 0; j < d; ++j)
            u(i, j) = clamp_unit(std::exp(-std::pow(rng.exponential() / v, alpha)));
    }
    return u;
}

Eigen::MatrixXd sample_frank(int d, double theta, Eigen::Index n, Rng& rng) {
    if (!(theta > 0.0))
        throw DomainError("sample_copula: the frank frailty construction requires theta > 0");
    const double p = -std::expm1(-theta); // 1 - e^{-theta}
    const double em = std::expm1(-theta); // e^{-theta} - 1
    Eigen::MatrixXd u(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = static_cast<double>(num::sample_log_series(p, rng));
        for (int j = 0; j < d; ++j)
            u(i, j) = clamp_unit(-std::log1p(std::exp(-rng.exponential() / v) * em) / theta);
    }
    return u;
}

Eigen::MatrixXd sample_nested_clayton(const NestedClayton& c, Eigen::Index n, Rng& rng) {
    std::vector<int> group_of(static_cast<std::size_t>(c.d), -1);
    for (std::size_t k = 0; k < c.groups.size(); ++k)
        for (int m : c.groups[k].members)
            group_of[static_cast<std::size_t>(m)] = static_cast<int>(k);

    Eigen::MatrixXd u(n, c.d);
    std::vector<double> vk(c.groups.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v0 = num::sample_gamma(1.0 / c.theta0, rng);
        for (std::size_t k = 0; k < c.groups.size(); ++k) {
            const double theta_k = c.groups[k].theta;
            if (theta_k == c.theta0) {
                vk[k] = v0; // inner generator collapses onto the root one
            } else {
                // Inner frailty with Laplace transform exp(-v0 ((1+t)^a - 1)),
                // a = theta0/theta_k: a tilted stable scaled by v0^{1/a}.
                const double a = c.theta0 / theta_k;
                const double scale = std::pow(v0, 1.0 / a);
                vk[k] = scale * num::sample_exp_tilted_stable(a, scale, rng);
            }
        }
        for (int j = 0; j < c.d; ++j) {
            const int g = group_of[static_cast<std::size_t>(j)];
            const double theta = g < 0 ? c.theta0 : c.groups[static_cast<std::size_t>(g)].theta;
            const double v = g < 0 ? v0 : vk[static_cast<std::size_t>(g)];
            u(i, j) = clamp_unit(std::exp(-std::log1p(rng.exponential() / v) / theta));
        }
    }
    return u;
}

Eigen::MatrixXd sample_elliptical(const num::CorrelationMatrix& P, double nu, Eigen::Index n,
                                  Rng& rng) {
    const Eigen::MatrixXd L = num::cholesky_factor(P);
    const int d = P.dim();
    Eigen::MatrixXd u(n, d);
    Eigen::VectorXd g(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j)
            g(j) = num::std_normal_quantile(rng.uniform_open());
        const Eigen::VectorXd z = L * g;
        if (nu <= 0.0) { // normal copula
            for (int j = 0; j < d; ++j)
                u(i, j) = clamp_unit(num::normal_cdf(z(j)));
        } else { // t copula: divide by sqrt(chi^2_nu / nu)
            const double w = 2.0 * num::sample_gamma(nu / 2.0, rng);
            const double scale = std::sqrt(nu / w);
            for (int j = 0; j < d; ++j)
                u(i, j) = clamp_unit(num::t_cdf(z(j) * scale, nu));
        }
    }
    return u;
}

} // namespace

Sample sample_copula(const CopulaSpec& spec, Eigen::Index n, Rng& rng) {
    validate(spec);
    if (n < 1)
        throw DataError("sample_copula: n must be positive");
    Eigen::MatrixXd u = std::visit(
        overloaded{
            [&](const Independence& c) { return sample_independence(c.d, n, rng); },
            [&](const Clayton& c) { return sample_clayton(c.d, c.theta, n, rng); },
            [&](const Frank& c) { return sample_frank(c.d, c.theta, n, rng); },
            [&](const Gumbel& c) { return sample_gumbel(c.d, c.theta, n, rng); },
            [&](const Normal& c) { return sample_elliptical(c.P, 0.0, n, rng); },
            [&](const NormalExchangeable& c) {
                return sample_elliptical(num::CorrelationMatrix::exchangeable(c.d, c.rho), 0.0, n,
                                         rng);
            },
            [&](const StudentT& c) { return sample_elliptical(c.P, c.nu, n, rng); },
            [&](const NestedClayton& c) { return sample_nested_clayton(c, n, rng); },
            [&](const EmpiricalCopula& c) {
                return empirical::sample_empirical(c.points, n, rng).values;
            },
        },
        spec);
    return Sample{std::move(u)};
}

// ---------------------------------------------------------------------------
// Distribution functions
// ---------------------------------------------------------------------------

namespace {

double clayton_cdf_terms(const double* u, std::size_t count, double theta) {
    // sum u_j^{-theta} - (count - 1), which is >= 1 on [0,1]^count
    double s = 1.0;
    for (std::size_t j = 0; j < count; ++j)
        s += std::expm1(-theta * std::log(u[j]));
    return s;
}

} // namespace

double copula_cdf(const CopulaSpec& spec, const Eigen::VectorXd& u) {
    validate(spec);
    if (u.size() != dim(spec))
        throw DomainError("copula_cdf: argument dimension mismatch");
    for (Eigen::Index j = 0; j < u.size(); ++j)
        if (!(u(j) >= 0.0 && u(j) <= 1.0))
            throw DomainError("copula_cdf: argument must lie in [0,1]^d");

    return std::visit(
        overloaded{
            [&](const Independence&) { return u.prod(); },
            [&](const Clayton& c) {
                if (u.minCoeff() == 0.0)
                    return 0.0;
                const double s = clayton_cdf_terms(u.data(), static_cast<std::size_t>(u.size()),
                                                   c.theta);
                return std::exp(-std::log(s) / c.theta);
            },
            [&](const Frank& c) {
                if (u.minCoeff() == 0.0)
                    return 0.0;
                const double em = std::expm1(-c.theta);
                double t = 0.0;
                for (Eigen::Index j = 0; j < u.size(); ++j)
                    t += -std::log(std::expm1(-c.theta * u(j)) / em);
                return -std::log1p(std::exp(-t) * em) / c.theta;
            },
            [&](const Gumbel& c) {
                if (u.minCoeff() == 0.0)
                    return 0.0;
                double t = 0.0;
                for (Eigen::Index j = 0; j < u.size(); ++j)
                    t += std::pow(-std::log(u(j)), c.theta);
                return std::exp(-std::pow(t, 1.0 / c.theta));
            },
            [&](const NestedClayton& c) {
                if (u.minCoeff() == 0.0)
                    return 0.0;
                std::vector<bool> grouped(static_cast<std::size_t>(c.d), false);
                double s = 1.0;
                for (const auto& g : c.groups) {
                    std::vector<double> v;
                    v.reserve(g.members.size());
                    for (int m : g.members) {
                        grouped[static_cast<std::size_t>(m)] = true;
                        v.push_back(u(m));
                    }
                    const double ck =
                        std::exp(-std::log(clayton_cdf_terms(v.data(), v.size(), g.theta)) /
                                 g.theta);
                    s += std::expm1(-c.theta0 * std::log(ck));
                }
                for (int j = 0; j < c.d; ++j)
                    if (!grouped[static_cast<std::size_t>(j)])
                        s += std::expm1(-c.theta0 * std::log(u(j)));
                return std::exp(-std::log(s) / c.theta0);
            },
            [&](const EmpiricalCopula& c) { return empirical::empirical_copula_eval(c.points, u); },
            [&](const Normal&) -> double {
                throw DomainError("copula_cdf: the normal copula has no closed form here; use "
                                  "box_probability with the monte_carlo method");
            },
            [&](const NormalExchangeable&) -> double {
                throw DomainError("copula_cdf: the normal copula has no closed form here; use "
                                  "box_probability with the monte_carlo method");
            },
            [&](const StudentT&) -> double {
                throw DomainError("copula_cdf: the t copula has no closed form here; use "
                                  "box_probability with the monte_carlo method");
            },
        },
        spec);
}

BoxProbability box_probability(const CopulaSpec& spec, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, BoxMethod method, Eigen::Index n_mc,
                               Rng* rng) {
    validate(spec);
    const int d = dim(spec);
    if (lower.size() != d || upper.size() != d)
        throw DomainError("box_probability: bounds dimension mismatch");
    for (int j = 0; j < d; ++j)
        if (!(0.0 <= lower(j) && lower(j) <= upper(j) && upper(j) <= 1.0))
            throw DomainError("box_probability: bounds must satisfy 0 <= lower <= upper <= 1");

    if (method == BoxMethod::closed_form) {
        if (d > 20)
            throw DomainError("box_probability: closed form refuses d > 20 (2^d corner terms)");
        double p = 0.0;
        Eigen::VectorXd corner(d);
        for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
            for (int j = 0; j < d; ++j)
                corner(j) = (mask >> j) & 1u ? lower(j) : upper(j);
            const int sign = __builtin_popcount(mask) % 2 == 0 ? 1 : -1;
            p += sign * copula_cdf(spec, corner);
        }
        return BoxProbability{std::max(0.0, p), 0.0};
    }

    if (n_mc < 1 || rng == nullptr)
        throw DomainError("box_probability: monte_carlo needs n_mc >= 1 and a generator");
    const Sample s = sample_copula(spec, n_mc, *rng);
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < n_mc; ++i) {
        bool in = true;
        for (int j = 0; j < d && in; ++j)
            in = s.values(i, j) > lower(j) && s.values(i, j) <= upper(j);
        hits += in;
    }
    const double v = static_cast<double>(hits) / static_cast<double>(n_mc);
    return BoxProbability{v, std::sqrt(v * (1.0 - v) / static_cast<double>(n_mc))};
}

double t_copula_log_density(const StudentT& spec, const Eigen::VectorXd& u) {
    validate(CopulaSpec{spec});
    const int d = spec.P.dim();
    if (u.size() != d)
        throw DomainError("t_copula_log_density: argument dimension mismatch");
    for (int j = 0; j < d; ++j)
        if (!(u(j) > 0.0 && u(j) < 1.0))
            throw DomainError("t_copula_log_density: argument must lie strictly inside (0,1)^d");

    const double nu = spec.nu;
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j)
        x(j) = num::t_quantile(u(j), nu);

    const Eigen::MatrixXd L = num::cholesky_factor(spec.P);
    const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(x);
    const double q = w.squaredNorm(); // x^T P^{-1} x
    double log_det = 0.0;
    for (int j = 0; j < d; ++j)
        log_det += 2.0 * std::log(L(j, j));

    double margins = 0.0;
    for (int j = 0; j < d; ++j)
        margins += std::log1p(x(j) * x(j) / nu);

    return std::lgamma((nu + d) / 2.0) + (d - 1) * std::lgamma(nu / 2.0) -
           d * std::lgamma((nu + 1.0) / 2.0) - 0.5 * log_det -
           0.5 * (nu + d) * std::log1p(q / nu) + 0.5 * (nu + 1.0) * margins;
}

double average_pairwise_tau(const CopulaSpec& spec) {
    validate(spec);
    return std::visit(
        overloaded{
            [](const Independence&) { return 0.0; },
            [](const Clayton& c) { return param_to_tau(Family::clayton, c.theta); },
            [](const Frank& c) { return param_to_tau(Family::frank, c.theta); },
            [](const Gumbel& c) {
                return c.theta == 1.0 ? 0.0 : param_to_tau(Family::gumbel, c.theta);
            },
            [](const Normal& c) {
                double s = 0.0;
                const int d = c.P.dim();
                for (int i = 0; i < d; ++i)
                    for (int j = i + 1; j < d; ++j)
                        s += param_to_tau(Family::normal, c.P.matrix()(i, j));
                return s / (d * (d - 1) / 2.0);
            },
            [](const NormalExchangeable& c) { return param_to_tau(Family::normal, c.rho); },
            [](const StudentT& c) {
                double s = 0.0;
                const int d = c.P.dim();
                for (int i = 0; i < d; ++i)
                    for (int j = i + 1; j < d; ++j)
                        s += param_to_tau(Family::student_t, c.P.matrix()(i, j));
                return s / (d * (d - 1) / 2.0);
            },
            [](const NestedClayton& c) {
                // Pairs inside group k have tau_k, every other pair tau_0.
                const double pairs = c.d * (c.d - 1) / 2.0;
                double s = 0.0, inner_pairs = 0.0;
                for (const auto& g : c.groups) {
                    const double p = static_cast<double>(g.members.size()) *
                                     (static_cast<double>(g.members.size()) - 1.0) / 2.0;
                    s += p * param_to_tau(Family::clayton, g.theta);
                    inner_pairs += p;
                }
                s += (pairs - inner_pairs) * param_to_tau(Family::clayton, c.theta0);
                return s / pairs;
            },
            [](const EmpiricalCopula& c) {
                const Eigen::MatrixXd T = empirical::kendalls_tau_matrix(c.points.values);
                double s = 0.0;
                const Eigen::Index d = T.rows();
                for (Eigen::Index i = 0; i < d; ++i)
                    for (Eigen::Index j = i + 1; j < d; ++j)
                        s += T(i, j);
                return s / (static_cast<double>(d) * (d - 1) / 2.0);
            },
        },
        spec);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

std::string fit_family_name(FitFamily family) {
    switch (family) {
    case FitFamily::clayton:
        return "clayton";
    case FitFamily::frank:
        return "frank";
    case FitFamily::gumbel:
        return "gumbel";
    case FitFamily::normal_exchangeable:
        return "normal";
    case FitFamily::normal_unstructured:
        return "normal-unstructured";
    case FitFamily::student_t:
        return "t";
    }
    return "?";
}

namespace {

double mean_offdiagonal(const Eigen::MatrixXd& T) {
    const Eigen::Index d = T.rows();
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
            s += T(i, j);
    return s / (static_cast<double>(d) * (d - 1) / 2.0);
}

num::CorrelationMatrix tau_inverted_correlation(const Eigen::MatrixXd& T) {
    Eigen::MatrixXd R = (M_PI / 2.0 * T.array()).sin().matrix();
    R.diagonal().setOnes();
    return num::CorrelationMatrix::from(num::psd_repair(std::move(R)));
}

} // namespace

CopulaSpec fit_copula(FitFamily family, const Sample& pseudo_obs) {
    const auto d = static_cast<int>(pseudo_obs.d());
    if (pseudo_obs.n() < 2 || d < 2)
        throw FitError("fit_copula: need at least two rows and two columns");
    const Eigen::MatrixXd T = empirical::kendalls_tau_matrix(pseudo_obs.values);
    const double tau = mean_offdiagonal(T);

    switch (family) {
    case FitFamily::clayton:
        if (!(tau > 0.0 && tau < 1.0))
            throw FitError("fit_copula: clayton needs average tau in (0,1), got " + fmt(tau));
        return Clayton{d, tau_to_param(Family::clayton, tau)};
    case FitFamily::gumbel:
        if (!(tau > 0.0 && tau < 1.0))
            throw FitError("fit_copula: gumbel needs average tau in (0,1), got " + fmt(tau));
        return Gumbel{d, tau_to_param(Family::gumbel, tau)};
    case FitFamily::frank:
        if (!(std::abs(tau) > 1e-12 && std::abs(tau) < 1.0))
            throw FitError("fit_copula: frank needs average tau in (-1,1) \\ {0}, got " + fmt(tau));
        return Frank{d, tau_to_param(Family::frank, tau)};
    case FitFamily::normal_exchangeable: {
        const double rho = tau_to_param(Family::normal, tau);
        if (!(rho >= -1.0 / (d - 1)))
            throw FitError("fit_copula: exchangeable normal needs rho >= -1/(d-1), got " +
                           fmt(rho));
        return NormalExchangeable{d, rho};
    }
    case FitFamily::normal_unstructured:
        return Normal{tau_inverted_correlation(T)};
    case FitFamily::student_t: {
        const num::CorrelationMatrix P = tau_inverted_correlation(T);
        const Eigen::MatrixXd L = num::cholesky_factor(P);
        double log_det = 0.0;
        for (int j = 0; j < d; ++j)
            log_det += 2.0 * std::log(L(j, j));
        const Eigen::Index n = pseudo_obs.n();

        double best_ll = -std::numeric_limits<double>::infinity();
        int best_nu = 0;
        Eigen::MatrixXd x(n, d);
        for (int nu = 1; nu <= 30; ++nu) {
            for (Eigen::Index i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    x(i, j) = num::t_quantile(pseudo_obs.values(i, j), nu);
            const Eigen::MatrixXd w =
                L.triangularView<Eigen::Lower>().solve(x.transpose());
            double ll = static_cast<double>(n) *
                        (std::lgamma((nu + d) / 2.0) + (d - 1) * std::lgamma(nu / 2.0) -
                         d * std::lgamma((nu + 1.0) / 2.0) - 0.5 * log_det);
            for (Eigen::Index i = 0; i < n; ++i) {
                double margins = 0.0;
                for (int j = 0; j < d; ++j)
                    margins += std::log1p(x(i, j) * x(i, j) / nu);
                ll += -0.5 * (nu + d) * std::log1p(w.col(i).squaredNorm() / nu) +
                      0.5 * (nu + 1.0) * margins;
            }
            if (ll > best_ll) {
                best_ll = ll;
                best_nu = nu;
            }
        }
        return StudentT{static_cast<double>(best_nu), P};
    }
    }
    throw FitError("fit_copula: unknown family");
}

} // namespace dcn::copula
