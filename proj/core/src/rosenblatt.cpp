#include "decouplenet/rosenblatt.hpp"

#include <algorithm>
#include <cmath>

#include "decouplenet/empirical.hpp"
#include "decouplenet/errors.hpp"
#include "decouplenet/linalg.hpp"
#include "decouplenet/special.hpp"

namespace dcn::rosenblatt {

namespace {

Eigen::MatrixXd transform_clayton(const Eigen::MatrixXd& u, double theta) {
    const Eigen::Index n = u.rows(), d = u.cols();
    Eigen::MatrixXd out(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, 0) = u(i, 0);
        double s = std::expm1(-theta * std::log(u(i, 0))); // sum of u_k^{-theta} - 1, k < j
        for (Eigen::Index j = 1; j < d; ++j) {
            const double t = std::expm1(-theta * std::log(u(i, j)));
            const double log_ratio = std::log1p(t / (s + 1.0)); // log((s + u_j^{-theta})/(s+1))
            out(i, j) =
                std::exp(-(static_cast<double>(j) + 1.0 / theta) * log_ratio);
            s += t;
        }
    }
    return out;
}

// Shared elliptical sweep: a progressive forward solve of L w = z yields both
// the conditional mean of z_j given the previous coordinates (mu = z_j - L_jj
// w_j) and, for the t family, the accumulated Mahalanobis term sum w_k^2.
Eigen::MatrixXd transform_normal(const Eigen::MatrixXd& u, const num::CorrelationMatrix& P) {
    const Eigen::MatrixXd L = num::cholesky_factor(P);
    const Eigen::Index n = u.rows(), d = u.cols();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, 0) = u(i, 0);
        w(0) = num::std_normal_quantile(u(i, 0));
        for (Eigen::Index j = 1; j < d; ++j) {
            const double z = num::std_normal_quantile(u(i, j));
            double mu = 0.0;
            for (Eigen::Index k = 0; k < j; ++k)
                mu += L(j, k) * w(k);
            w(j) = (z - mu) / L(j, j);
            out(i, j) = num::normal_cdf(w(j));
        }
    }
    return out;
}

Eigen::MatrixXd transform_student_t(const Eigen::MatrixXd& u, double nu,
                                    const num::CorrelationMatrix& P) {
    const Eigen::MatrixXd L = num::cholesky_factor(P);
    const Eigen::Index n = u.rows(), d = u.cols();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, 0) = u(i, 0);
        w(0) = num::t_quantile(u(i, 0), nu);
        double q = w(0) * w(0); // Mahalanobis term of the conditioning block
        for (Eigen::Index j = 1; j < d; ++j) {
            const double x = num::t_quantile(u(i, j), nu);
            double mu = 0.0;
            for (Eigen::Index k = 0; k < j; ++k)
                mu += L(j, k) * w(k);
            w(j) = (x - mu) / L(j, j);
            const double df = nu + static_cast<double>(j);
            const double scale = L(j, j) * std::sqrt((nu + q) / df);
            out(i, j) = num::t_cdf((x - mu) / scale, df);
            q += w(j) * w(j);
        }
    }
    return out;
}

} // namespace

bool supported(const copula::CopulaSpec& spec) {
    return std::holds_alternative<copula::Independence>(spec) ||
           std::holds_alternative<copula::Clayton>(spec) ||
           std::holds_alternative<copula::Normal>(spec) ||
           std::holds_alternative<copula::NormalExchangeable>(spec) ||
           std::holds_alternative<copula::StudentT>(spec);
}

Sample transform(const copula::CopulaSpec& spec, const Sample& u) {
    copula::validate(spec);
    if (u.d() != copula::dim(spec))
        throw DomainError("rosenblatt: sample dimension does not match the model");
    if (u.n() < 1)
        throw DataError("rosenblatt: empty sample");
    if (!(u.values.minCoeff() > 0.0) || !(u.values.maxCoeff() < 1.0))
        throw DomainError("rosenblatt: sample must lie strictly inside (0,1)^d");

    if (std::holds_alternative<copula::Independence>(spec))
        return Sample{u.values};
    if (const auto* c = std::get_if<copula::Clayton>(&spec))
        return Sample{transform_clayton(u.values, c->theta)};
    if (const auto* c = std::get_if<copula::Normal>(&spec))
        return Sample{transform_normal(u.values, c->P)};
    if (const auto* c = std::get_if<copula::NormalExchangeable>(&spec))
        return Sample{
            transform_normal(u.values, num::CorrelationMatrix::exchangeable(c->d, c->rho))};
    if (const auto* c = std::get_if<copula::StudentT>(&spec))
        return Sample{transform_student_t(u.values, c->nu, c->P)};
    throw DomainError("rosenblatt: no closed-form conditionals for " + copula::label(spec) +
                      "; supported families are independence, clayton, normal and t");
}

UniformityCheck uniformity_check(const copula::CopulaSpec& transform_spec,
                                 const copula::CopulaSpec& data_spec, Eigen::Index n, Rng& rng) {
    Rng data_rng = rng.derive(1);
    Rng null_rng = rng.derive(2);
    const Sample data = copula::sample_copula(data_spec, n, data_rng);
    const Sample transformed = transform(transform_spec, data);
    const double score = empirical::cvm_score(transformed);

    const int d = copula::dim(transform_spec);
    const std::vector<double> null_scores = empirical::cvm_null_scores(n, d, 200, null_rng);
    const auto at_or_below = std::upper_bound(null_scores.begin(), null_scores.end(), score) -
                             null_scores.begin();
    return UniformityCheck{score,
                           static_cast<double>(at_or_below) /
                               static_cast<double>(null_scores.size())};
}

} // namespace dcn::rosenblatt
