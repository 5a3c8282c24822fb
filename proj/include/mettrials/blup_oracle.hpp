#pragma once

// Full linear mixed model Y = X mu + Z alpha + e~ for a given exact design,
// Henderson's MSE formula for the BLUP of alpha, and Monte Carlo sampling of
// the model. Independent of the closed-form algebra in model.hpp, which it
// exists to check.
//
// Observation order: genotype k outermost, then sub-region i, location j
// within the sub-region, replicate l innermost.

#include <cstdint>

#include "mettrials/model.hpp"

namespace mettrials {

struct ModelMatrices {
    Matrix F;  // (rJ) x P, block-diag(1_{r J_1}, ..., 1_{r J_P}); zero column when J_i = 0
    Matrix H;  // (rJ) x J, I_J (x) 1_r
    Matrix X;  // (rJK) x P, 1_K (x) F
    Matrix Z;  // (rJK) x (PK), I_K (x) F
    Matrix G;  // (PK) x (PK), sigma^2 I_K (x) D
    Matrix R;  // (rJK) x (rJK), residual covariance
    std::vector<int> counts;
    int K = 0;
    int r = 0;
};

inline constexpr long kMaxOracleRows = 200'000;

/// Throws ValidationError when rJK exceeds kMaxOracleRows.
ModelMatrices assemble(const ExactDesign& exact, const VarianceComponents& vc, const GenotypeCovariance& gc,
                       int K, int r = 2);

/// (Z'R^{-1}Z + G^{-1} - Z'R^{-1}X (X'R^{-1}X)^- X'R^{-1}Z)^{-1} with a
/// dense factorization of R. The generalized inverse drops eigenvalues below
/// 1e-12 of the largest.
Matrix henderson_mse(const ModelMatrices& mm);

/// Same quantity without forming R: observations at different locations are
/// independent, so R^{-1} is block diagonal with one shared rK x rK block.
Matrix henderson_mse_structured(const ExactDesign& exact, const VarianceComponents& vc,
                                const GenotypeCovariance& gc, int K, int r = 2);

/// MSE of the contrast alpha_k - alpha_k' extracted from a (PK)x(PK) MSE
/// matrix: ((e_k - e_k')' (x) I_P) MSE ((e_k - e_k') (x) I_P).
Matrix contrast_mse(const Matrix& mse_alpha, int P, int k, int k_prime);

struct SimulationConfig {
    std::uint64_t replications = 20000;
    std::uint64_t seed = 1;
    Vector fixed_means;  // mu, length P; empty means zero

    void validate(int P) const;
};

struct SimulationResult {
    Matrix empirical_mse;      // mean of (alpha^ - alpha)(alpha^ - alpha)'
    Matrix standard_errors;    // per-entry Monte Carlo standard error
    Matrix alpha_covariance;   // mean of alpha alpha' (checks the sampler)
    std::uint64_t replications = 0;
};

/// Replications are processed in fixed chunks, each drawing from streams
/// derived from (seed, replication index); chunk sums are added in order,
/// so the result is bit-identical for any thread count and equal to
/// simulate_empirical_mse_serial.
SimulationResult simulate_empirical_mse(const ModelMatrices& mm, const VarianceComponents& vc,
                                        const GenotypeCovariance& gc, const SimulationConfig& cfg);

SimulationResult simulate_empirical_mse_serial(const ModelMatrices& mm, const VarianceComponents& vc,
                                               const GenotypeCovariance& gc, const SimulationConfig& cfg);

/// Fraction of entries with |empirical - analytic| <= z * SE.
double fraction_within(const SimulationResult& sim, const Matrix& analytic, double z);

}  // namespace mettrials
