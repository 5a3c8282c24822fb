#include "mettrials/linalg.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "mettrials/error.hpp"

namespace mettrials::linalg {

bool is_symmetric_positive_definite(const Matrix& m, double rel_tol, double sym_tol) {
    if (m.rows() == 0 || m.rows() != m.cols() || !m.allFinite()) {
        return false;
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return false;
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        return false;
    }
    const Vector& ev = eig.eigenvalues();
    const double largest = ev.maxCoeff();
    return largest > 0.0 && ev.minCoeff() > rel_tol * largest;
}

Matrix spd_inverse(const Matrix& m, double max_condition) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Cholesky factorization failed: matrix is not positive definite");
    }
    // Cheap condition estimate from the Cholesky diagonal, exact check only
    // when the estimate is suspicious.
    const Vector d = llt.matrixL().toDenseMatrix().diagonal();
    const double ratio = d.maxCoeff() / d.minCoeff();
    if (ratio * ratio > 1e-2 * max_condition) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
        const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
        if (!(cond <= max_condition)) {
            throw NumericalError("matrix condition number " + std::to_string(cond) + " exceeds limit");
        }
    }
    Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    symmetrize(inv);
    return inv;
}

Matrix symmetric_pinv(const Matrix& m, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed in generalized inverse");
    }
    const Vector& ev = eig.eigenvalues();
    const double cutoff = rel_tol * ev.cwiseAbs().maxCoeff();
    Vector inv_ev(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        inv_ev(i) = std::abs(ev(i)) > cutoff ? 1.0 / ev(i) : 0.0;
    }
    const Matrix& q = eig.eigenvectors();
    Matrix out = q * inv_ev.asDiagonal() * q.transpose();
    symmetrize(out);
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

Matrix ones(Eigen::Index rows, Eigen::Index cols) {
    return Matrix::Ones(rows, cols);
}

void symmetrize(Matrix& m) {
    m = 0.5 * (m + m.transpose()).eval();
}

}  // namespace mettrials::linalg
