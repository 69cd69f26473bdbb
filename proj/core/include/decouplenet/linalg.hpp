#pragma once

#include <Eigen/Dense>

#include "decouplenet/rng.hpp"

namespace dcn::num {

// Symmetric, unit-diagonal, positive semidefinite matrix.  Eigenvalues above
// -1e-10 are treated as zero (clipped on construction); anything below that
// is rejected.
class CorrelationMatrix {
public:
    // Validates (and, for roundoff-level negative eigenvalues, repairs) M.
    static CorrelationMatrix from(Eigen::MatrixXd M);

    static CorrelationMatrix identity(int d);

    // Constant off-diagonal entry rho, admissible iff rho >= -1/(d-1).
    static CorrelationMatrix exchangeable(int d, double rho);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }

private:
    explicit CorrelationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
    Eigen::MatrixXd m_;
};

// Lower-triangular L with L L^T = P (max-norm error below 1e-10).
Eigen::MatrixXd cholesky_factor(const CorrelationMatrix& P);

// Normalized Wishart draw W W^T with W a d x d standard normal matrix;
// full rank with probability one.
CorrelationMatrix random_correlation_matrix(int d, Rng& rng);

// Nearest-in-spirit correlation matrix from an arbitrary symmetric estimate:
// clip negative eigenvalues to zero, then renormalize the diagonal to one.
Eigen::MatrixXd psd_repair(Eigen::MatrixXd S);

} // namespace dcn::num
