#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's algebra: inverses use FullPivLU, Kronecker products are
// written out with loops, and F is built row by row.

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix inverse(const Matrix& m) { return m.fullPivLu().inverse(); }

/// block-diag(1_{r J_1}, ..., 1_{r J_P}).
inline Matrix explicit_F(const std::vector<int>& counts, int r) {
    int rows = 0;
    for (int c : counts) rows += r * c;
    Matrix F = Matrix::Zero(rows, static_cast<Eigen::Index>(counts.size()));
    int row = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (int k = 0; k < r * counts[i]; ++k) F(row++, static_cast<Eigen::Index>(i)) = 1.0;
    }
    return F;
}

/// (rJ / (r v2 + 1)) * sigma2D / sigma2, entry by entry.
inline Matrix delta(const Matrix& sigma2D, double sigma2, double v2, int J, int r) {
    Matrix out(sigma2D.rows(), sigma2D.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = r * J / (r * v2 + 1.0) * sigma2D(i, j) / sigma2;
    }
    return out;
}

/// (diag(w) + Delta^{-1})^{-1}.
inline Matrix normalized_mse(const Vector& w, const Matrix& delta) {
    Matrix m = inverse(delta);
    for (Eigen::Index i = 0; i < w.size(); ++i) m(i, i) += w(i);
    return inverse(m);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            for (Eigen::Index k = 0; k < b.rows(); ++k) {
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
            }
        }
    }
    return out;
}

/// sigma2 [ (1/K) 11' (x) D + (I - 11'/K) (x) (c M + D^{-1})^{-1} ],
/// c = rJ / (r v2 + 1), D = sigma2D / sigma2.
inline Matrix mse_alpha(const Vector& w, const Matrix& sigma2D, double sigma2, double v2, int J, int r, int K) {
    const Matrix D = sigma2D / sigma2;
    const double c = r * J / (r * v2 + 1.0);
    Matrix inner = inverse(D);
    for (Eigen::Index i = 0; i < w.size(); ++i) inner(i, i) += c * w(i);
    const Matrix S = inverse(inner);
    const Matrix J1 = Matrix::Constant(K, K, 1.0 / K);
    const Matrix centre = Matrix::Identity(K, K) - J1;
    return sigma2 * (kron(J1, D) + kron(centre, S));
}

inline Matrix random_pd(int P, std::mt19937_64& rng, double ridge = 0.5) {
    std::normal_distribution<double> z;
    Matrix B(P, P);
    for (int i = 0; i < P; ++i) {
        for (int j = 0; j < P; ++j) B(i, j) = z(rng);
    }
    Matrix m = B * B.transpose() / P;
    m.diagonal().array() += ridge;
    return m;
}

/// Uniform draw from the probability simplex.
inline Vector random_simplex(int P, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Vector w(P);
    for (int i = 0; i < P; ++i) w(i) = e(rng);
    return w / w.sum();
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace oracle
