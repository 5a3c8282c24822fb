#include "mettrials/equal_efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "mettrials/error.hpp"

namespace mettrials {

namespace {

Vector to_weights(const Vector& x) {
    Vector w(x.size() + 1);
    w.head(x.size()) = x;
    w(x.size()) = 1.0 - x.sum();
    return w;
}

// Diagonal of (diag(w) + Delta^{-1})^{-1} for raw w, which may sit a
// finite-difference step outside the simplex. Empty if not PD there.
std::optional<Vector> raw_variances(const Vector& w, const Matrix& delta_inv) {
    Matrix precision = delta_inv;
    precision.diagonal() += w;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) return std::nullopt;
    return llt.solve(Matrix::Identity(w.size(), w.size())).diagonal().eval();
}

std::optional<Vector> residuals(const Vector& x, const Matrix& delta_inv) {
    auto g = raw_variances(to_weights(x), delta_inv);
    if (!g) return std::nullopt;
    return (Vector::Constant(x.size(), (*g)(0)) - g->tail(x.size())).eval();
}

double norm(const Vector& r) {
    return r.cwiseAbs().maxCoeff();
}

std::optional<Matrix> jacobian(const Vector& x, const Matrix& delta_inv, double step) {
    const Eigen::Index n = x.size();
    Matrix jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector xp = x;
        Vector xm = x;
        xp(j) += step;
        xm(j) -= step;
        auto rp = residuals(xp, delta_inv);
        auto rm = residuals(xm, delta_inv);
        if (!rp || !rm) return std::nullopt;
        jac.col(j) = (*rp - *rm) / (2.0 * step);
    }
    return jac;
}

// Largest alpha in (0, 1] keeping x + alpha * dx inside the simplex.
double feasible_fraction(const Vector& x, const Vector& dx) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (dx(i) < 0.0) alpha = std::min(alpha, x(i) / -dx(i));
    }
    const double slack = 1.0 - x.sum();
    const double dsum = dx.sum();
    if (dsum > 0.0) alpha = std::min(alpha, slack / dsum);
    return std::max(alpha, 0.0);
}

Vector project(const Vector& x) {
    Vector w = to_weights(x).cwiseMax(0.0);
    w /= w.sum();
    return w.head(x.size());
}

}  // namespace

Vector subregion_variances(const ApproximateDesign& design, const AdjustedCovariance& adj) {
    return normalized_mse(design, adj).diagonal();
}

EqualEfficiencySolution solve_equal_efficiency(const AdjustedCovariance& adj, const EqualEfficiencyConfig& cfg) {
    const int P = adj.size();
    if (P < 2) throw ValidationError("equal-efficiency designs need P >= 2");
    if (cfg.max_iterations < 1 || !(cfg.tol > 0.0) || !(cfg.fd_step > 0.0)) {
        throw ValidationError("invalid equal-efficiency configuration");
    }
    const Matrix& delta_inv = adj.delta_inv();

    const auto start = optimize(adj, Criterion::standard_a(), cfg.start_solver);
    Vector x = start.design.weights().head(P - 1);
    Vector r = *residuals(x, delta_inv);
    double g1 = (*raw_variances(to_weights(x), delta_inv))(0);

    int iter = 0;
    auto done = [&] { return norm(r) <= cfg.tol * g1; };

    // Damped Newton with step clipping.
    bool stalled = false;
    for (; iter < cfg.max_iterations && !done(); ++iter) {
        auto jac = jacobian(x, delta_inv, cfg.fd_step);
        if (!jac) {
            stalled = true;
            break;
        }
        Eigen::FullPivLU<Matrix> lu(*jac);
        if (!lu.isInvertible()) {
            stalled = true;
            break;
        }
        const Vector dx = lu.solve(-r);
        double alpha = std::min(1.0, 0.999999 * feasible_fraction(x, dx));
        if (feasible_fraction(x, dx) >= 1.0) alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-12) {
            const Vector trial = x + alpha * dx;
            auto rt = residuals(trial, delta_inv);
            if (rt && norm(*rt) < norm(r)) {
                x = trial;
                r = *rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        g1 = (*raw_variances(to_weights(x), delta_inv))(0);
    }

    // Levenberg-Marquardt on 0.5 |r|^2 with projection onto the simplex.
    if (stalled && !done()) {
        double mu = 1e-3;
        for (; iter < cfg.max_iterations && !done(); ++iter) {
            auto jac = jacobian(x, delta_inv, cfg.fd_step);
            if (!jac) break;
            const Matrix jtj = jac->transpose() * *jac;
            const Vector grad = jac->transpose() * r;
            bool improved = false;
            for (int attempt = 0; attempt < 40 && !improved; ++attempt) {
                Matrix lhs = jtj;
                lhs.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
                const Vector dx = lhs.ldlt().solve(-grad);
                const Vector trial = project(x + dx);
                auto rt = residuals(trial, delta_inv);
                if (rt && rt->squaredNorm() < r.squaredNorm()) {
                    x = trial;
                    r = *rt;
                    mu = std::max(mu / 3.0, 1e-15);
                    improved = true;
                } else {
                    mu *= 4.0;
                }
            }
            if (!improved) break;
            g1 = (*raw_variances(to_weights(x), delta_inv))(0);
        }
    }

    Vector w = to_weights(x).cwiseMax(0.0);
    w /= w.sum();
    ApproximateDesign design(w);
    const Vector g = subregion_variances(design, adj);
    const double residual = (g.array() - g(0)).abs().maxCoeff();
    const bool converged = residual <= cfg.tol * g(0);
    return EqualEfficiencySolution{std::move(design), residual, g(0), converged, iter};
}

ExactDesign exact_equal_efficiency(const EqualEfficiencySolution& sol, int J) {
    if (!sol.converged) {
        throw NumericalError("equal-efficiency system did not converge (residual " +
                             std::to_string(sol.residual_norm) + "); refusing to round");
    }
    return efficient_rounding(sol.design, J);
}

}  // namespace mettrials
