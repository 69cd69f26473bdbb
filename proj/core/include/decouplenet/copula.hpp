#pragma once

#include <string>
#include <variant>
#include <vector>

#include "decouplenet/linalg.hpp"
#include "decouplenet/rng.hpp"
#include "decouplenet/sample.hpp"

namespace dcn::copula {

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

struct Independence {
    int d;
};

struct Clayton { // theta > 0
    int d;
    double theta;
};

struct Frank { // theta != 0; frailty sampling additionally needs theta > 0
    int d;
    double theta;
};

struct Gumbel { // theta >= 1
    int d;
    double theta;
};

struct Normal {
    num::CorrelationMatrix P;
};

struct NormalExchangeable {
    int d;
    double rho;
};

struct StudentT { // nu > 0
    double nu;
    num::CorrelationMatrix P;
};

// Clayton copulas nested one level deep: a root Clayton with parameter
// theta0 joins the listed groups (each an inner Clayton with parameter
// theta_k >= theta0) and any remaining coordinates directly.
struct NestedClaytonGroup {
    std::vector<int> members; // 0-based coordinate indices, size >= 2
    double theta;
};

struct NestedClayton {
    int d;
    double theta0;
    std::vector<NestedClaytonGroup> groups;
};

struct EmpiricalCopula { // points strictly inside (0,1)^d
    Sample points;
};

using CopulaSpec = std::variant<Independence, Clayton, Frank, Gumbel, Normal,
                                NormalExchangeable, StudentT, NestedClayton, EmpiricalCopula>;

int dim(const CopulaSpec& spec);
std::string label(const CopulaSpec& spec); // compact deterministic tag
void validate(const CopulaSpec& spec);     // throws DomainError / MatrixError

// ---------------------------------------------------------------------------
// Kendall's tau <-> parameter maps
// ---------------------------------------------------------------------------

enum class Family { independence, clayton, frank, gumbel, normal, student_t };

// clayton: theta = 2 tau/(1-tau), tau in (0,1); gumbel: theta = 1/(1-tau),
// tau in (0,1); frank: root of tau(theta) = 1 - (4/theta)(1 - D1(theta)),
// tau != 0; normal / student_t: rho = sin(pi tau / 2), tau in (-1,1).
double tau_to_param(Family family, double tau);
double param_to_tau(Family family, double param);

// ---------------------------------------------------------------------------
// Sampling and probabilities
// ---------------------------------------------------------------------------

// n independent rows from the copula.  Archimedean families draw through
// their frailty representation (gamma, positive stable, log-series;
// exponentially tilted stable inside the nested-Clayton groups), elliptical
// families through a Cholesky factor of P, the empirical one by resampling
// rows.  Frank requires theta > 0 here (the frailty construction).
Sample sample_copula(const CopulaSpec& spec, Eigen::Index n, Rng& rng);

// Closed-form C(u) for independence, Archimedean, nested-Clayton and
// empirical specifications; normal and t have no closed form and are
// rejected (use box_probability's monte_carlo method instead).
double copula_cdf(const CopulaSpec& spec, const Eigen::VectorXd& u);

struct BoxProbability {
    double value;
    double std_error; // 0 for closed-form evaluation
};

enum class BoxMethod { closed_form, monte_carlo };

// P(lower < U <= upper).  closed_form runs 2^d inclusion-exclusion over
// copula_cdf (refused for d > 20); monte_carlo draws n_mc samples and also
// reports the binomial standard error.
BoxProbability box_probability(const CopulaSpec& spec, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, BoxMethod method,
                               Eigen::Index n_mc = 0, Rng* rng = nullptr);

// log density of the t copula at an interior point of (0,1)^d.
double t_copula_log_density(const StudentT& spec, const Eigen::VectorXd& u);

// Average of Kendall's tau over all coordinate pairs, e.g. (2 tau0 + tau1)/3
// for a 3-dimensional nested model with one 2-member group. Used to build
// exchangeable candidates whose overall dependence matches a structured
// model's.
double average_pairwise_tau(const CopulaSpec& spec);

// ---------------------------------------------------------------------------
// Fitting (rank-based)
// ---------------------------------------------------------------------------

enum class FitFamily {
    clayton,
    frank,
    gumbel,
    normal_exchangeable,
    normal_unstructured,
    student_t,
};

std::string fit_family_name(FitFamily family);

// One-parameter Archimedean families and the exchangeable normal invert the
// average pairwise tau; the unstructured normal inverts tau entrywise and
// repairs the result to a correlation matrix; the t copula additionally
// selects nu from {1,...,30} by pseudo log-likelihood.  Throws FitError when
// the tau estimate leaves the family's attainable range.
CopulaSpec fit_copula(FitFamily family, const Sample& pseudo_obs);

} // namespace dcn::copula
