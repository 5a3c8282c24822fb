#pragma once

#include <cstdint>
#include <vector>

#include "mettrials/criteria.hpp"

namespace mettrials {

enum class StepRule {
    Multiplicative,  // w_i <- w_i * rhs_i / lhs, then vertex-exchange polish
    VertexExchange,  // pairwise mass transfer with exact line search only
};

struct SolverConfig {
    int max_iterations = 10000;
    double convergence_tol = 1e-9;  // relative to the certificate lhs
    int restarts = 8;
    StepRule step_rule = StepRule::Multiplicative;
    std::uint64_t seed = 20240601;

    void validate() const;
};

struct OptimizationResult {
    ApproximateDesign design;
    DesignCertificate certificate;
    bool certified = false;
    int iterations = 0;                  // iterations of the winning restart
    std::vector<double> restart_values;  // criterion value per restart, in order
};

/// Minimizes `crit` over the probability simplex. Restart 0 starts at the
/// balanced design, the others at Dirichlet(1) draws from `cfg.seed`; the
/// best value wins. Values within 1e-12 relative are ties, settled by the
/// smaller certificate residual, then the lower index. Restarts run in parallel
/// when OpenMP is available; output does not depend on the thread count.
OptimizationResult optimize(const AdjustedCovariance& adj, const Criterion& crit, const SolverConfig& cfg = {});

/// Single descent from `start`; exposed for tests and for warm starts.
OptimizationResult optimize_from(const ApproximateDesign& start, const AdjustedCovariance& adj,
                                 const Criterion& crit, const SolverConfig& cfg = {});

/// w_i = l_i / sum(l).
ApproximateDesign proportional_design(const SubRegionLoads& loads);

}  // namespace mettrials
