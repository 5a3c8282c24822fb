#pragma once

#include <Eigen/Dense>

namespace mettrials::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// True when `m` is symmetric to `sym_tol` (relative to its largest entry)
/// and its smallest eigenvalue exceeds `rel_tol` times the largest.
bool is_symmetric_positive_definite(const Matrix& m, double rel_tol = 1e-10, double sym_tol = 1e-12);

/// Inverse of a symmetric positive definite matrix through a Cholesky
/// factorization. Throws NumericalError if the factorization fails or the
/// 2-norm condition number exceeds `max_condition`.
Matrix spd_inverse(const Matrix& m, double max_condition = 1e14);

/// Moore-Penrose inverse of a symmetric matrix; eigenvalues below
/// `rel_tol * max|eigenvalue|` are treated as zero.
Matrix symmetric_pinv(const Matrix& m, double rel_tol = 1e-12);

Matrix kron(const Matrix& a, const Matrix& b);

Matrix ones(Eigen::Index rows, Eigen::Index cols);

/// Symmetrize in place: (m + m^T) / 2.
void symmetrize(Matrix& m);

}  // namespace mettrials::linalg
