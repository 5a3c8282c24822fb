#pragma once

#include "mettrials/approx_optimizer.hpp"
#include "mettrials/exact_designs.hpp"

namespace mettrials {

struct EqualEfficiencyConfig {
    int max_iterations = 200;
    double tol = 1e-10;         // on max_i |g_1 - g_i|, relative to g_1
    double fd_step = 1e-7;      // central-difference step for the Jacobian
    SolverConfig start_solver;  // used to compute the StandardA start point
};

struct EqualEfficiencySolution {
    ApproximateDesign design;
    double residual_norm = 0.0;  // max_i |g_1 - g_i|, g = diag (M + Delta^{-1})^{-1}
    double g1 = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Diagonal of (M + Delta^{-1})^{-1}, the per-sub-region prediction
/// variances up to a common factor.
Vector subregion_variances(const ApproximateDesign& design, const AdjustedCovariance& adj);

/// Finds simplex weights that equalise the diagonal of (M + Delta^{-1})^{-1}.
/// Damped Newton on w_1..w_{P-1} (w_P = 1 - sum) with a central-difference
/// Jacobian, started at the StandardA optimum; falls back to
/// Levenberg-Marquardt on the residual norm if Newton stalls.
EqualEfficiencySolution solve_equal_efficiency(const AdjustedCovariance& adj, const EqualEfficiencyConfig& cfg = {});

/// Efficient rounding of a converged solution.
ExactDesign exact_equal_efficiency(const EqualEfficiencySolution& sol, int J);

}  // namespace mettrials
