#pragma once

#include <vector>

#include "decouplenet/rng.hpp"
#include "decouplenet/sample.hpp"

namespace dcn::empirical {

// Componentwise rank transform: entry (i,j) becomes rank_ij / (n+1), where
// tied values within a column share their average rank.  Output lies strictly
// inside the open unit cube.
Sample pseudo_observations(const Eigen::MatrixXd& data);

// Empirical copula of `points` at u: the fraction of rows that are
// componentwise <= u.
double empirical_copula_eval(const Sample& points, const Eigen::VectorXd& u);

// Kendall's tau_b (tie-adjusted) between two columns of equal length n >= 2.
// O(n log n) merge-sort counting; the O(n^2) variant counts pairs directly
// and exists as a cross-check -- both reduce to the same integer pair counts,
// so they agree exactly.
double kendalls_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double kendalls_tau_naive(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Symmetric matrix of pairwise tau_b values, unit diagonal.
Eigen::MatrixXd kendalls_tau_matrix(const Eigen::MatrixXd& data);

// Cramer-von Mises distance to independence: the sample is first re-ranked
// into pseudo-observations U*, then
//     S = sum_i ( C_n(U*_i) - prod_j U*_ij )^2
// with C_n the empirical copula of U* itself.  Equals n times the CvM
// integral of (C_n - Pi)^2 against C_n's atoms.
double cvm_score(const Sample& sample);

// Direct all-pairs evaluation of the same statistic.  cvm_score uses sweep
// structures for the dominance counts; both derive identical integer counts
// and sum them in the same order, so the two agree bit for bit.
double cvm_score_reference(const Sample& sample);

// n rows drawn uniformly with replacement from `points`.
Sample sample_empirical(const Sample& points, Eigen::Index n, Rng& rng);

// CvM scores of `count` genuine uniform samples of shape n x d, sorted
// ascending; serves as the calibration null for cvm_score.  Replicate r uses
// the stream rng.derive(r), so the result does not depend on evaluation
// order.
std::vector<double> cvm_null_scores(Eigen::Index n, int d, int count, const Rng& rng);

} // namespace dcn::empirical
