#include <doctest.h>

#include <cmath>
#include <vector>

#include "decouplenet/copula.hpp"
#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/rosenblatt.hpp"

#include "support.hpp"

using namespace dcn;
using copula::CopulaSpec;

namespace {

// Conditional-CDF oracle for the Clayton copula: the ratio of mixed partials
// of the joint CDF per the sequential-conditioning definition, evaluated by
// central finite differences on copula_cdf.
double clayton_fd_conditional(const copula::Clayton& spec, const Eigen::VectorXd& u, int j) {
    const int d = spec.d;
    std::vector<int> vars(static_cast<std::size_t>(j));
    for (int i = 0; i < j; ++i)
        vars[static_cast<std::size_t>(i)] = i;
    const double h = oracle::richardson_step_for_order(j);
    const auto cdf_first = [&](int upto, const Eigen::VectorXd& v) {
        Eigen::VectorXd w = Eigen::VectorXd::Ones(d);
        w.head(upto) = v.head(upto);
        return copula::copula_cdf(spec, w);
    };
    const double numer = oracle::mixed_partial_richardson(
        [&](const Eigen::VectorXd& v) { return cdf_first(j + 1, v); }, u, vars, h);
    const double denom = oracle::mixed_partial_richardson(
        [&](const Eigen::VectorXd& v) { return cdf_first(j, v); }, u, vars, h);
    return numer / denom;
}

Sample random_interior(int n, int d, Rng& rng, double lo = 0.08, double hi = 0.92) {
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = lo + (hi - lo) * rng.uniform_open();
    return Sample{m};
}

} // namespace

TEST_CASE("independence transform is the identity") {
    Rng rng(1);
    const Sample u = random_interior(50, 3, rng);
    const Sample out = rosenblatt::transform(copula::Independence{3}, u);
    CHECK(out.values == u.values);
}

TEST_CASE("first output column equals the first input column for every family") {
    Rng rng(2);
    const double rho = std::sin(0.2 * M_PI);
    const std::vector<CopulaSpec> specs = {
        copula::Independence{3},
        copula::Clayton{3, 4.0 / 3.0},
        copula::NormalExchangeable{3, rho},
        copula::StudentT{4.0, num::CorrelationMatrix::exchangeable(3, rho)},
    };
    for (const CopulaSpec& spec : specs) {
        const Sample u = random_interior(40, 3, rng);
        const Sample out = rosenblatt::transform(spec, u);
        CHECK(out.values.col(0) == u.values.col(0));
        CHECK(out.n() == u.n());
        CHECK(out.d() == u.d());
    }
}

TEST_CASE("Clayton conditionals match the CDF finite-difference oracle") {
    // The d=2 anchor point first.
    const copula::Clayton c2{2, 4.0 / 3.0};
    Eigen::VectorXd p(2);
    p << 0.3, 0.7;
    const Sample out2 = rosenblatt::transform(c2, Sample{p.transpose()});
    CHECK(std::abs(out2.values(0, 1) - clayton_fd_conditional(c2, p, 1)) < 1e-5);

    Rng rng(3);
    for (int d : {2, 3, 4}) {
        const copula::Clayton spec{d, 4.0 / 3.0};
        const Sample u = random_interior(25, d, rng);
        const Sample out = rosenblatt::transform(spec, u);
        for (Eigen::Index i = 0; i < u.n(); ++i)
            for (int j = 1; j < d; ++j) {
                const double fd =
                    clayton_fd_conditional(spec, u.values.row(i).transpose(), j);
                CHECK(std::abs(out.values(i, j) - fd) < 1e-5);
            }
    }
}

TEST_CASE("normal conditionals match the density-slice quadrature oracle") {
    Rng rng(4);
    for (int d : {2, 3, 4}) {
        const auto P = num::random_correlation_matrix(d, rng);
        const copula::Normal spec{P};
        const Sample u = random_interior(12, d, rng);
        const Sample out = rosenblatt::transform(spec, u);
        for (Eigen::Index i = 0; i < u.n(); ++i)
            for (int j = 1; j < d; ++j) {
                const double quad =
                    oracle::normal_conditional_cdf(u.values.row(i).transpose(), j,
                                                   P.matrix());
                CHECK(std::abs(out.values(i, j) - quad) < 1e-5);
            }
    }

    // The exchangeable parameterization must agree with the explicit matrix.
    const double rho = 0.55;
    const copula::NormalExchangeable ex{3, rho};
    const copula::Normal full{num::CorrelationMatrix::exchangeable(3, rho)};
    const Sample u = random_interior(20, 3, rng);
    CHECK(rosenblatt::transform(ex, u).values == rosenblatt::transform(full, u).values);
}

TEST_CASE("t conditionals match the density-slice quadrature oracle") {
    Rng rng(5);
    for (int d : {2, 3, 4}) {
        const auto P = num::random_correlation_matrix(d, rng);
        const copula::StudentT spec{4.0, P};
        const Sample u = random_interior(10, d, rng);
        const Sample out = rosenblatt::transform(spec, u);
        for (Eigen::Index i = 0; i < u.n(); ++i)
            for (int j = 1; j < d; ++j) {
                const double quad = oracle::t_conditional_cdf(u.values.row(i).transpose(), j,
                                                              4.0, P.matrix());
                CHECK(std::abs(out.values(i, j) - quad) < 1e-5);
            }
    }
}

TEST_CASE("transform is strictly increasing in the conditioned coordinate") {
    Rng rng(6);
    const double rho = std::sin(0.2 * M_PI);
    const std::vector<CopulaSpec> specs = {
        copula::Clayton{3, 4.0 / 3.0},
        copula::NormalExchangeable{3, rho},
        copula::StudentT{4.0, num::CorrelationMatrix::exchangeable(3, rho)},
    };
    for (const CopulaSpec& spec : specs) {
        Eigen::MatrixXd rows(21, 3);
        const double u0 = 0.35, u1 = 0.6;
        for (int k = 0; k <= 20; ++k) {
            rows(k, 0) = u0;
            rows(k, 1) = u1;
            rows(k, 2) = 0.04 + 0.92 * k / 20.0;
        }
        const Sample out = rosenblatt::transform(spec, Sample{rows});
        for (int k = 1; k <= 20; ++k)
            CHECK(out.values(k, 2) > out.values(k - 1, 2));
    }
}

TEST_CASE("matched transforms produce uniform independent output") {
    Rng rng(7);
    const copula::Clayton spec{3, 4.0 / 3.0};
    Rng gen = rng.derive(1);
    const Sample u = copula::sample_copula(spec, 100000, gen);
    const Sample out = rosenblatt::transform(spec, u);
    for (int j = 0; j < 3; ++j) {
        std::vector<double> col(out.values.col(j).data(), out.values.col(j).data() + out.n());
        CHECK(oracle::ks_uniform_pvalue(col) > 0.001);
    }
    // Pairwise tau of the output is 0 within 3 sigma of the independence SE.
    const double se = std::sqrt(2.0 * (2.0 * 100000 + 5.0) / (9.0 * 100000.0 * 99999.0));
    const Eigen::MatrixXd T = empirical::kendalls_tau_matrix(out.values);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            CHECK(std::abs(T(i, j)) < 3.0 * se);
}

TEST_CASE("unsupported families are rejected and inputs validated") {
    Rng rng(8);
    const Sample u = random_interior(5, 2, rng);
    CHECK_THROWS_AS((void)rosenblatt::transform(copula::Gumbel{2, 2.0}, u), DomainError);
    CHECK_THROWS_AS((void)rosenblatt::transform(copula::Frank{2, 4.0}, u), DomainError);
    CHECK_FALSE(rosenblatt::supported(copula::Gumbel{2, 2.0}));
    CHECK(rosenblatt::supported(copula::Clayton{2, 1.0}));

    Eigen::MatrixXd bad(1, 2);
    bad << 0.5, 1.0; // boundary value
    CHECK_THROWS_AS((void)rosenblatt::transform(copula::Clayton{2, 1.0}, Sample{bad}),
                    DomainError);
    CHECK_THROWS_AS((void)rosenblatt::transform(copula::Clayton{3, 1.0}, u), DomainError);
}

TEST_CASE("uniformity_check separates matched from misspecified models") {
    const double frank_theta = copula::tau_to_param(copula::Family::frank, 0.4);

    Rng r1(9);
    const auto matched =
        rosenblatt::uniformity_check(copula::Clayton{3, 4.0 / 3.0},
                                     copula::Clayton{3, 4.0 / 3.0}, 4000, r1);
    CHECK(matched.percentile < 0.99);
    CHECK(matched.score >= 0.0);

    Rng r2(10);
    const auto wrong = rosenblatt::uniformity_check(copula::Clayton{3, 4.0 / 3.0},
                                                    copula::Frank{3, frank_theta}, 4000, r2);
    CHECK(wrong.percentile > 0.99);

    // Two-argument overload: same transform and data model.
    Rng r3(9);
    const auto matched2 =
        rosenblatt::uniformity_check(copula::Clayton{3, 4.0 / 3.0}, 4000, r3);
    CHECK(matched2.score == matched.score);
    CHECK(matched2.percentile == matched.percentile);
}
