#include "decouplenet/linalg.hpp"

#include <cmath>

#include "decouplenet/errors.hpp"
#include "decouplenet/special.hpp"

namespace dcn::num {

CorrelationMatrix CorrelationMatrix::from(Eigen::MatrixXd M) {
    const auto d = M.rows();
    if (d < 1 || M.cols() != d)
        throw MatrixError("CorrelationMatrix: matrix must be square and non-empty");
    if (((M - M.transpose()).cwiseAbs().maxCoeff()) > 1e-12)
        throw MatrixError("CorrelationMatrix: matrix must be symmetric");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(M(i, i) - 1.0) > 1e-12)
            throw MatrixError("CorrelationMatrix: diagonal entries must equal 1");
        for (Eigen::Index j = 0; j < d; ++j)
            if (std::abs(M(i, j)) > 1.0 + 1e-12)
                throw MatrixError("CorrelationMatrix: entries must lie in [-1,1]");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw MatrixError("CorrelationMatrix: eigendecomposition failed");
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-10)
        throw MatrixError("CorrelationMatrix: matrix is not positive semidefinite");
    if (lo < 0.0) {
        // Roundoff-level indefiniteness: clip and restore the unit diagonal.
        M = psd_repair(std::move(M));
    }
    return CorrelationMatrix(std::move(M));
}

CorrelationMatrix CorrelationMatrix::identity(int d) {
    if (d < 1)
        throw MatrixError("CorrelationMatrix: dimension must be positive");
    return CorrelationMatrix(Eigen::MatrixXd::Identity(d, d));
}

CorrelationMatrix CorrelationMatrix::exchangeable(int d, double rho) {
    if (d < 2)
        throw MatrixError("CorrelationMatrix: exchangeable structure needs d >= 2");
    if (!(rho <= 1.0) || !(rho >= -1.0 / (d - 1)))
        throw MatrixError("CorrelationMatrix: exchangeable rho must lie in [-1/(d-1), 1]");
    Eigen::MatrixXd M = Eigen::MatrixXd::Constant(d, d, rho);
    M.diagonal().setOnes();
    return CorrelationMatrix(std::move(M));
}

Eigen::MatrixXd cholesky_factor(const CorrelationMatrix& P) {
    Eigen::LLT<Eigen::MatrixXd> llt(P.matrix());
    if (llt.info() != Eigen::Success) {
        // Semidefinite inputs (clipped eigenvalues) may need a whisper of
        // diagonal jitter; the reconstruction error stays below 1e-10.
        Eigen::MatrixXd M = P.matrix();
        M.diagonal().array() += 1e-12;
        llt.compute(M);
        if (llt.info() != Eigen::Success)
            throw MatrixError("cholesky_factor: matrix is not positive semidefinite");
    }
    return llt.matrixL();
}

CorrelationMatrix random_correlation_matrix(int d, Rng& rng) {
    if (d < 2)
        throw MatrixError("random_correlation_matrix: d must be at least 2");
    Eigen::MatrixXd W(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            W(i, j) = std_normal_quantile(rng.uniform_open());
    Eigen::MatrixXd S = W * W.transpose();
    const Eigen::VectorXd inv_sd = S.diagonal().array().sqrt().inverse();
    S = inv_sd.asDiagonal() * S * inv_sd.asDiagonal();
    S = ((S + S.transpose()) / 2.0).eval();
    S.diagonal().setOnes();
    return CorrelationMatrix::from(std::move(S));
}

Eigen::MatrixXd psd_repair(Eigen::MatrixXd S) {
    S = ((S + S.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw MatrixError("psd_repair: eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    S = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd diag = S.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (!(diag(i) > 0.0))
            throw MatrixError("psd_repair: zero variance direction cannot be renormalized");
    const Eigen::VectorXd inv_sd = diag.array().sqrt().inverse();
    S = inv_sd.asDiagonal() * S * inv_sd.asDiagonal();
    S = ((S + S.transpose()) / 2.0).eval();
    S.diagonal().setOnes();
    return S;
}

} // namespace dcn::num
