#include <doctest.h>

#include <cmath>

#include "decouplenet/copula.hpp"
#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/format.hpp"
#include "decouplenet/spec_strings.hpp"

#include "support.hpp"

using namespace dcn;
using copula::CopulaSpec;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

double offdiag_tau(const Eigen::MatrixXd& T, int i, int j) { return T(i, j); }

} // namespace

TEST_CASE("tau_to_param anchor values") {
    CHECK(copula::tau_to_param(copula::Family::clayton, 0.4) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(copula::tau_to_param(copula::Family::gumbel, 0.4) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(copula::tau_to_param(copula::Family::normal, 0.4) ==
          doctest::Approx(std::sin(0.2 * M_PI)).epsilon(1e-12));
    CHECK(copula::tau_to_param(copula::Family::student_t, 0.4) ==
          doctest::Approx(0.587785252292).epsilon(1e-9));
    CHECK(copula::tau_to_param(copula::Family::frank, 0.4) ==
          doctest::Approx(4.1611).epsilon(5e-5 / 4.1611));

    CHECK_THROWS_AS((void)copula::tau_to_param(copula::Family::clayton, 0.0), DomainError);
    CHECK_THROWS_AS((void)copula::tau_to_param(copula::Family::clayton, 1.0), DomainError);
    CHECK_THROWS_AS((void)copula::tau_to_param(copula::Family::gumbel, -0.2), DomainError);
    CHECK_THROWS_AS((void)copula::tau_to_param(copula::Family::frank, 0.0), DomainError);
    CHECK_THROWS_AS((void)copula::tau_to_param(copula::Family::normal, 1.0), DomainError);
}

TEST_CASE("param_to_tau inverts tau_to_param across every family") {
    CHECK(copula::param_to_tau(copula::Family::clayton, 4.0 / 3.0) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(copula::param_to_tau(copula::Family::gumbel, 5.0 / 3.0) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::abs(copula::param_to_tau(copula::Family::frank, 4.1611) - 0.4) < 1e-4);

    using copula::Family;
    for (Family f : {Family::clayton, Family::gumbel}) {
        for (double tau = 0.05; tau < 0.95; tau += 0.05)
            CHECK(copula::param_to_tau(f, copula::tau_to_param(f, tau)) ==
                  doctest::Approx(tau).epsilon(1e-8));
    }
    for (double tau = -0.9; tau < 0.95; tau += 0.1) {
        CHECK(copula::param_to_tau(Family::normal, copula::tau_to_param(Family::normal, tau)) ==
              doctest::Approx(tau).epsilon(1e-8));
        if (std::abs(tau) > 1e-6)
            CHECK(copula::param_to_tau(Family::frank,
                                       copula::tau_to_param(Family::frank, tau)) ==
                  doctest::Approx(tau).epsilon(1e-8));
    }

    // Frank tau(theta) is odd in theta.
    CHECK(copula::param_to_tau(copula::Family::frank, -4.1611) ==
          doctest::Approx(-copula::param_to_tau(copula::Family::frank, 4.1611))
              .epsilon(1e-12));
}

TEST_CASE("spec validation accepts the good and rejects the bad") {
    CHECK_NOTHROW(copula::validate(copula::Clayton{3, 4.0 / 3.0}));
    CHECK_THROWS_AS(copula::validate(copula::Clayton{3, 0.0}), DomainError);
    CHECK_THROWS_AS(copula::validate(copula::Clayton{1, 1.0}), DomainError);
    CHECK_THROWS_AS(copula::validate(copula::Gumbel{2, 0.9}), DomainError);
    CHECK_THROWS_AS(copula::validate(copula::Frank{2, 0.0}), DomainError);
    CHECK_NOTHROW(copula::validate(copula::Frank{2, -2.0}));
    CHECK_THROWS_AS(copula::validate(copula::StudentT{0.0, num::CorrelationMatrix::identity(2)}),
                    DomainError);

    // Nested Clayton: groups of >= 2 disjoint in-range members, theta_k >= theta0.
    copula::NestedClayton good{3, 0.5, {{{0, 1}, 4.0 / 3.0}}};
    CHECK_NOTHROW(copula::validate(good));
    copula::NestedClayton weak_inner{3, 2.0, {{{0, 1}, 1.0}}};
    CHECK_THROWS_AS(copula::validate(weak_inner), DomainError);
    copula::NestedClayton tiny_group{3, 0.5, {{{0}, 2.0}}};
    CHECK_THROWS_AS(copula::validate(tiny_group), DomainError);
    copula::NestedClayton overlap{4, 0.5, {{{0, 1}, 2.0}, {{1, 2}, 2.0}}};
    CHECK_THROWS_AS(copula::validate(overlap), DomainError);
    copula::NestedClayton out_of_range{3, 0.5, {{{1, 3}, 2.0}}};
    CHECK_THROWS_AS(copula::validate(out_of_range), DomainError);

    Eigen::MatrixXd pts(2, 2);
    pts << 0.2, 0.4, 0.9, 0.6;
    CHECK_NOTHROW(copula::validate(copula::EmpiricalCopula{Sample{pts}}));
    pts(0, 0) = 0.0;
    CHECK_THROWS_AS(copula::validate(copula::EmpiricalCopula{Sample{pts}}), DomainError);
}

TEST_CASE("sampled Kendall tau matches the parameter conversions") {
    const Eigen::Index n = 100000;

    Rng r1(101);
    const Sample clay = copula::sample_copula(copula::Clayton{2, 4.0 / 3.0}, n, r1);
    const double tau_c = empirical::kendalls_tau(clay.values.col(0), clay.values.col(1));
    CHECK(std::abs(tau_c - 0.4) < 0.01);

    Rng r2(102);
    const Sample gum = copula::sample_copula(copula::Gumbel{2, 2.0}, n, r2);
    CHECK(std::abs(empirical::kendalls_tau(gum.values.col(0), gum.values.col(1)) - 0.5) <
          0.01);

    Rng r3(103);
    const double frank_theta = copula::tau_to_param(copula::Family::frank, 0.4);
    const Sample fr = copula::sample_copula(copula::Frank{2, frank_theta}, n, r3);
    CHECK(std::abs(empirical::kendalls_tau(fr.values.col(0), fr.values.col(1)) - 0.4) < 0.01);

    Rng r4(104);
    const double rho = std::sin(0.2 * M_PI);
    const Sample no =
        copula::sample_copula(copula::NormalExchangeable{2, rho}, n, r4);
    CHECK(std::abs(empirical::kendalls_tau(no.values.col(0), no.values.col(1)) - 0.4) < 0.01);

    Rng r5(105);
    const Sample st = copula::sample_copula(
        copula::StudentT{4.0, num::CorrelationMatrix::exchangeable(2, rho)}, n, r5);
    CHECK(std::abs(empirical::kendalls_tau(st.values.col(0), st.values.col(1)) - 0.4) < 0.01);

    Rng r6(106);
    const Sample ind = copula::sample_copula(copula::Independence{2}, n, r6);
    CHECK(std::abs(empirical::kendalls_tau(ind.values.col(0), ind.values.col(1))) < 0.01);
}

TEST_CASE("independence margins are uniform and Gumbel theta=1 is independence") {
    const Eigen::Index n = 100000;
    Rng rng(107);
    const Sample s = copula::sample_copula(copula::Independence{3}, n, rng);
    for (int j = 0; j < 3; ++j) {
        std::vector<double> col(s.values.col(j).data(), s.values.col(j).data() + n);
        CHECK(oracle::ks_uniform_pvalue(col) > 0.01);
    }

    Rng r2(108);
    const Sample g1 = copula::sample_copula(copula::Gumbel{2, 1.0}, 50000, r2);
    CHECK(std::abs(empirical::kendalls_tau(g1.values.col(0), g1.values.col(1))) < 0.015);
}

TEST_CASE("nested Clayton hits the per-block tau structure") {
    // (2,1)-structure: coordinates {0,1} share tau=0.4, cross pairs tau=0.2.
    const double th0 = copula::tau_to_param(copula::Family::clayton, 0.2);
    const double th1 = copula::tau_to_param(copula::Family::clayton, 0.4);
    copula::NestedClayton spec{3, th0, {{{0, 1}, th1}}};
    Rng rng(109);
    const Sample s = copula::sample_copula(spec, 100000, rng);
    const Eigen::MatrixXd T = empirical::kendalls_tau_matrix(s.values);
    CHECK(std::abs(offdiag_tau(T, 0, 1) - 0.4) < 0.01);
    CHECK(std::abs(offdiag_tau(T, 0, 2) - 0.2) < 0.01);
    CHECK(std::abs(offdiag_tau(T, 1, 2) - 0.2) < 0.01);
}

TEST_CASE("nested Clayton with equal parameters collapses to plain Clayton") {
    const double theta = 4.0 / 3.0;
    copula::NestedClayton nested{3, theta, {{{0, 1}, theta}}};
    const copula::Clayton plain{3, theta};

    // CDFs agree on a grid.
    Rng grid_rng(110);
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd u(3);
        for (int j = 0; j < 3; ++j)
            u[j] = grid_rng.uniform_open();
        CHECK(std::abs(copula::copula_cdf(nested, u) - copula::copula_cdf(plain, u)) <=
              1e-10);
    }

    // Samples agree distributionally: KS on each margin and on C(U) values.
    Rng ra(111), rb(112);
    const Sample a = copula::sample_copula(nested, 20000, ra);
    const Sample b = copula::sample_copula(plain, 20000, rb);
    for (int j = 0; j < 3; ++j) {
        std::vector<double> ca(a.values.col(j).data(), a.values.col(j).data() + a.n());
        std::vector<double> cb(b.values.col(j).data(), b.values.col(j).data() + b.n());
        CHECK(oracle::ks_two_sample_pvalue(ca, cb) > 0.01);
    }
    std::vector<double> pa, pb;
    for (Eigen::Index i = 0; i < a.n(); ++i) {
        pa.push_back(copula::copula_cdf(plain, a.values.row(i).transpose()));
        pb.push_back(copula::copula_cdf(plain, b.values.row(i).transpose()));
    }
    CHECK(oracle::ks_two_sample_pvalue(pa, pb) > 0.01);
}

TEST_CASE("copula_cdf boundary laws, anchors and monotonicity") {
    const copula::Clayton clay{2, 4.0 / 3.0};
    CHECK(copula::copula_cdf(clay, vec2(1.0, 1.0)) == 1.0);
    CHECK(std::abs(copula::copula_cdf(clay, vec2(1.0 / 7.0, 1.0 / 7.0)) - 0.0874) < 5e-4);
    for (double u1 : {0.05, 0.3, 0.85})
        CHECK(copula::copula_cdf(clay, vec2(u1, 1.0)) == doctest::Approx(u1).epsilon(1e-12));
    CHECK(copula::copula_cdf(clay, vec2(0.0, 0.7)) == 0.0);

    // Frank closed form (works for negative theta too): compare with the
    // direct bivariate formula.
    for (double theta : {4.1611, -3.0}) {
        const copula::Frank fr{2, theta};
        for (double u : {0.1, 0.5, 0.8})
            for (double v : {0.2, 0.6, 0.95}) {
                const double direct =
                    -std::log1p(std::expm1(-theta * u) * std::expm1(-theta * v) /
                                std::expm1(-theta)) /
                    theta;
                CHECK(copula::copula_cdf(fr, vec2(u, v)) ==
                      doctest::Approx(direct).epsilon(1e-12));
            }
    }

    // Gumbel closed form.
    const copula::Gumbel gum{2, 2.0};
    const double lu = std::pow(-std::log(0.3), 2.0), lv = std::pow(-std::log(0.6), 2.0);
    CHECK(copula::copula_cdf(gum, vec2(0.3, 0.6)) ==
          doctest::Approx(std::exp(-std::sqrt(lu + lv))).epsilon(1e-12));

    // Monotone in each coordinate on a random grid.
    Rng rng(113);
    const copula::NestedClayton nested{
        3, 0.5, {{{0, 1}, 2.0}}};
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd u(3);
        for (int j = 0; j < 3; ++j)
            u[j] = 0.05 + 0.9 * rng.uniform_open();
        const double base = copula::copula_cdf(nested, u);
        for (int j = 0; j < 3; ++j) {
            Eigen::VectorXd v = u;
            v[j] = std::min(1.0, v[j] + 0.03);
            CHECK(copula::copula_cdf(nested, v) >= base - 1e-14);
        }
    }

    // Elliptical CDFs are rejected with a pointer to the MC path.
    CHECK_THROWS_AS((void)copula::copula_cdf(
                        copula::NormalExchangeable{2, 0.5}, vec2(0.5, 0.5)),
                    DomainError);
    CHECK_THROWS_AS((void)copula::copula_cdf(
                        copula::StudentT{4.0, num::CorrelationMatrix::identity(2)},
                        vec2(0.5, 0.5)),
                    DomainError);
}

TEST_CASE("box probabilities: product law, anchors, MC agreement") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const Eigen::VectorXd seventh = Eigen::VectorXd::Constant(2, 1.0 / 7.0);
    const Eigen::VectorXd six7 = Eigen::VectorXd::Constant(2, 6.0 / 7.0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(2);

    const auto ind = copula::Independence{2};
    CHECK(copula::box_probability(ind, zero, seventh, copula::BoxMethod::closed_form).value ==
          doctest::Approx(1.0 / 49.0).epsilon(1e-12));

    const copula::Clayton clay{2, 4.0 / 3.0};
    CHECK(std::abs(
              copula::box_probability(clay, six7, one, copula::BoxMethod::closed_form).value -
              0.0400) < 5e-4);

    // t copula lower-corner probability via MC.
    const double rho = std::sin(0.2 * M_PI);
    const copula::StudentT t4{4.0, num::CorrelationMatrix::exchangeable(2, rho)};
    Rng rng(114);
    const auto mc =
        copula::box_probability(t4, zero, seventh, copula::BoxMethod::monte_carlo, 1000000,
                                &rng);
    CHECK(std::abs(mc.value - 0.0673) < 0.004);
    CHECK(mc.std_error > 0.0);
    CHECK(mc.std_error < 5e-4);

    // Closed-form and MC agree within 4 standard errors on every
    // closed-form family.
    const std::vector<CopulaSpec> specs = {
        copula::Clayton{3, 4.0 / 3.0},
        copula::Frank{2, 4.1611},
        copula::Gumbel{3, 2.0},
        copula::NestedClayton{3, 0.5, {{{0, 1}, 4.0 / 3.0}}},
    };
    std::uint64_t seed = 115;
    for (const CopulaSpec& spec : specs) {
        const int d = copula::dim(spec);
        const Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, 0.25);
        const Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, 0.75);
        const auto closed =
            copula::box_probability(spec, lo, hi, copula::BoxMethod::closed_form);
        Rng r(seed++);
        const auto sampled =
            copula::box_probability(spec, lo, hi, copula::BoxMethod::monte_carlo, 200000, &r);
        CHECK(std::abs(closed.value - sampled.value) <= 4.0 * sampled.std_error);
        CHECK(closed.std_error == 0.0);
    }

    // Guards: dimension blow-up and bad boxes.
    const auto big = copula::Independence{21};
    const Eigen::VectorXd bl = Eigen::VectorXd::Zero(21), bu = Eigen::VectorXd::Ones(21);
    CHECK_THROWS_AS((void)copula::box_probability(big, bl, bu,
                                                  copula::BoxMethod::closed_form),
                    DomainError);
    CHECK_THROWS_AS((void)copula::box_probability(ind, seventh, zero,
                                                  copula::BoxMethod::closed_form),
                    DomainError);
}

TEST_CASE("t copula log density: hand value, symmetry, normalization") {
    const copula::StudentT spec{4.0, num::CorrelationMatrix::identity(2)};
    // At u = (0.5, 0.5): joint t4 density at the origin over squared marginal
    // density: (1/(2 pi)) / (3/8)^2 = 32/(9 pi).
    const double hand = std::log(32.0 / (9.0 * M_PI));
    CHECK(copula::t_copula_log_density(spec, vec2(0.5, 0.5)) ==
          doctest::Approx(hand).epsilon(1e-10));

    // Radial symmetry c(u) = c(1-u).
    const copula::StudentT spec2{4.0, num::CorrelationMatrix::exchangeable(2, 0.6)};
    Rng rng(116);
    for (int k = 0; k < 50; ++k) {
        const Eigen::VectorXd u = vec2(rng.uniform_open(), rng.uniform_open());
        const Eigen::VectorXd v = vec2(1.0 - u[0], 1.0 - u[1]);
        CHECK(copula::t_copula_log_density(spec2, u) ==
              doctest::Approx(copula::t_copula_log_density(spec2, v)).epsilon(1e-9));
    }

    // Independent reimplementation from the standard formula.
    Rng rr(117);
    const auto P = num::random_correlation_matrix(3, rr);
    const copula::StudentT spec3{4.0, P};
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd u(3), x(3);
        for (int j = 0; j < 3; ++j) {
            u[j] = 0.02 + 0.96 * rr.uniform_open();
            x[j] = oracle::t_quantile(u[j], 4.0);
        }
        double expect = oracle::mvt_logpdf(x, 4.0, P.matrix());
        for (int j = 0; j < 3; ++j)
            expect -= oracle::t_logpdf(x[j], 4.0);
        CHECK(copula::t_copula_log_density(spec3, u) ==
              doctest::Approx(expect).epsilon(1e-7));
    }

    // MC normalization: the density integrates to 1 over the cube.
    Rng mc(118);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd u = vec2(mc.uniform_open(), mc.uniform_open());
        sum += std::exp(copula::t_copula_log_density(spec2, u));
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("average_pairwise_tau mirrors the weighted pairwise structure") {
    CHECK(copula::average_pairwise_tau(copula::Clayton{4, 4.0 / 3.0}) ==
          doctest::Approx(0.4).epsilon(1e-10));
    const double th0 = copula::tau_to_param(copula::Family::clayton, 0.2);
    const double th1 = copula::tau_to_param(copula::Family::clayton, 0.4);
    CHECK(copula::average_pairwise_tau(copula::NestedClayton{3, th0, {{{0, 1}, th1}}}) ==
          doctest::Approx((2.0 * 0.2 + 0.4) / 3.0).epsilon(1e-10));
    CHECK(copula::average_pairwise_tau(copula::NormalExchangeable{3, std::sin(0.2 * M_PI)}) ==
          doctest::Approx(0.4).epsilon(1e-10));
    CHECK(copula::average_pairwise_tau(copula::Independence{5}) == 0.0);
}

TEST_CASE("fit_copula recovers parameters and flags unattainable fits") {
    const Eigen::Index n = 50000;

    Rng r1(119);
    const Sample clay = copula::sample_copula(copula::Clayton{2, 4.0 / 3.0}, n, r1);
    const auto cfit = copula::fit_copula(copula::FitFamily::clayton,
                                         empirical::pseudo_observations(clay.values));
    const double theta_hat = std::get<copula::Clayton>(cfit).theta;
    CHECK(theta_hat >= 1.28);
    CHECK(theta_hat <= 1.39);

    Rng r2(120);
    const Sample ind = copula::sample_copula(copula::Independence{2}, n, r2);
    const auto nfit = copula::fit_copula(copula::FitFamily::normal_exchangeable,
                                         empirical::pseudo_observations(ind.values));
    CHECK(std::abs(std::get<copula::NormalExchangeable>(nfit).rho) < 0.02);

    Rng r3(121);
    const double rho = std::sin(0.2 * M_PI);
    const Sample ts = copula::sample_copula(
        copula::StudentT{4.0, num::CorrelationMatrix::exchangeable(2, rho)}, n, r3);
    const auto tfit = copula::fit_copula(copula::FitFamily::student_t,
                                         empirical::pseudo_observations(ts.values));
    const auto& tspec = std::get<copula::StudentT>(tfit);
    CHECK(tspec.nu >= 3.0);
    CHECK(tspec.nu <= 5.0);
    CHECK(std::abs(tspec.P.matrix()(0, 1) - rho) < 0.02);

    // Unstructured normal recovers a block matrix, PSD with unit diagonal.
    Eigen::MatrixXd B(3, 3);
    const double r_in = std::sin(0.5 * M_PI * 0.5), r_out = std::sin(0.5 * M_PI * 0.2);
    B << 1, r_in, r_out, r_in, 1, r_out, r_out, r_out, 1;
    Rng r4(122);
    const Sample ns =
        copula::sample_copula(copula::Normal{num::CorrelationMatrix::from(B)}, n, r4);
    const auto ufit = copula::fit_copula(copula::FitFamily::normal_unstructured,
                                         empirical::pseudo_observations(ns.values));
    const Eigen::MatrixXd& Bh = std::get<copula::Normal>(ufit).P.matrix();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(Bh(i, j) - B(i, j)) < 0.03);

    // Clayton cannot fit (near-)independent or negative-dependence data.
    Rng r5(123);
    Sample neg = copula::sample_copula(copula::Independence{2}, 2000, r5);
    neg.values.col(1) = (1.0 - neg.values.col(0).array()).matrix(); // countermonotone
    CHECK_THROWS_AS((void)copula::fit_copula(copula::FitFamily::clayton,
                                             empirical::pseudo_observations(neg.values)),
                    FitError);
}

TEST_CASE("spec strings parse, format and round trip") {
    using spec::parse_copula;

    const auto c = parse_copula("clayton(d=3,tau=0.4)");
    CHECK(std::get<copula::Clayton>(c).theta == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(copula::dim(c) == 3);
    CHECK(spec::format_copula(c) == "clayton(d=3,theta=" +
                                        format_double(std::get<copula::Clayton>(c).theta) +
                                        ")");
    // format -> parse -> format is a fixed point.
    CHECK(spec::format_copula(parse_copula(spec::format_copula(c))) ==
          spec::format_copula(c));

    const auto g = parse_copula(" gumbel( d=2 , theta=2 ) ");
    CHECK(std::get<copula::Gumbel>(g).theta == 2.0);

    const auto t = parse_copula("t(d=2,nu=4,tau=0.4)");
    CHECK(std::get<copula::StudentT>(t).nu == 4.0);
    CHECK(std::get<copula::StudentT>(t).P.matrix()(0, 1) ==
          doctest::Approx(std::sin(0.2 * M_PI)).epsilon(1e-9));

    const auto nrho = parse_copula("normal(d=3,rho=0.5)");
    CHECK(std::get<copula::NormalExchangeable>(nrho).rho == 0.5);

    // pseed builds a reproducible random correlation matrix.
    const auto p1 = parse_copula("normal(d=4,pseed=7)");
    const auto p2 = parse_copula("normal(d=4,pseed=7)");
    CHECK(std::get<copula::Normal>(p1).P.matrix() == std::get<copula::Normal>(p2).P.matrix());

    const auto nest = parse_copula("nested-clayton(d=5,tau0=0.2,g=1+2:0.4,g=3+4+5:0.6)");
    const auto& ns = std::get<copula::NestedClayton>(nest);
    CHECK(ns.d == 5);
    CHECK(ns.groups.size() == 2);
    CHECK(ns.groups[0].members == std::vector<int>{0, 1});
    CHECK(ns.groups[1].members == std::vector<int>{2, 3, 4});
    CHECK(ns.groups[0].theta ==
          doctest::Approx(copula::tau_to_param(copula::Family::clayton, 0.4)).epsilon(1e-12));

    CHECK_THROWS_AS((void)parse_copula("clayton(d=3)"), DomainError);              // no tau
    CHECK_THROWS_AS((void)parse_copula("clayton(d=3,tau=0.4,theta=2)"), DomainError);
    CHECK_THROWS_AS((void)parse_copula("clayton(d=3,tau=0.4,tau=0.5)"), DomainError);
    CHECK_THROWS_AS((void)parse_copula("zeppelin(d=2,tau=0.4)"), DomainError);
    CHECK_THROWS_AS((void)parse_copula("clayton(d=3,tau=0.4,frob=1)"), DomainError);
    CHECK_THROWS_AS((void)parse_copula("normal(d=2,rho=0.5,pseed=3)"), DomainError);
    CHECK_THROWS_AS((void)parse_copula("empirical(n=10)"), DomainError);

    // Candidates: fixed specs or fit families.
    const auto cand = spec::parse_candidate("fit:gumbel");
    CHECK(cand.fitted());
    CHECK(cand.label == "fit:gumbel");
    CHECK(std::get<copula::FitFamily>(cand.model) == copula::FitFamily::gumbel);
    const auto fixed = spec::parse_candidate("frank(d=3,tau=0.4)");
    CHECK_FALSE(fixed.fitted());
    CHECK(fixed.label == copula::label(std::get<CopulaSpec>(fixed.model)));
    CHECK_THROWS_AS((void)spec::parse_candidate("fit:empirical"), DomainError);
}

TEST_CASE("labels are compact, deterministic and comma-free") {
    CHECK(copula::label(copula::Independence{3}) == "independence");
    CHECK(copula::label(copula::Clayton{3, 4.0 / 3.0}) == "clayton(tau=0.4)");
    CHECK(copula::label(copula::Gumbel{2, 2.0}) == "gumbel(tau=0.5)");
    const double rho = std::sin(0.2 * M_PI);
    CHECK(copula::label(copula::StudentT{4.0, num::CorrelationMatrix::exchangeable(3, rho)}) ==
          "t(nu=4; rho=0.5878)");
    const double th0 = copula::tau_to_param(copula::Family::clayton, 0.2);
    const double th1 = copula::tau_to_param(copula::Family::clayton, 0.4);
    const std::string nl =
        copula::label(copula::NestedClayton{3, th0, {{{0, 1}, th1}}});
    CHECK(nl.find("nested-clayton") == 0);
    CHECK(nl.find(',') == std::string::npos);
    for (const CopulaSpec& s :
         {CopulaSpec{copula::Frank{2, 4.1611}}, CopulaSpec{copula::NormalExchangeable{2, 0.5}}})
        CHECK(copula::label(s).find(',') == std::string::npos);
}
