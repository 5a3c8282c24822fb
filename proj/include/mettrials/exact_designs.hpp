#pragma once

#include <cstdint>
#include <vector>

#include "mettrials/criteria.hpp"

namespace mettrials {

struct EnumerationBudget {
    std::uint64_t max_compositions = 10'000'000;

    void validate() const;
};

struct EnumerationResult {
    ExactDesign design;              // lexicographically smallest minimizer
    double criterion_value = 0.0;
    std::vector<ExactDesign> ties;   // every minimizer (within 1e-12 relative), lexicographic order
    std::uint64_t visited = 0;       // compositions evaluated
};

/// Efficient rounding of an approximate design to J locations. Starts from
/// ceil((J - s/2) w_i) on the s support points, then adds a unit where
/// J_i / w_i is smallest or removes one where (J_i - 1) / w_i is largest
/// until the counts sum to J. Ties go to the lowest index. Sub-regions with
/// zero weight receive zero.
ExactDesign efficient_rounding(const ApproximateDesign& design, int J);

/// C(J + P - 1, P - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(int J, int P);

/// Exhaustive search over all compositions of J into P non-negative parts.
/// Throws BudgetExceededError when composition_count(J, P) exceeds the
/// budget. Parallelised over the first coordinate; the result is identical
/// to enumerate_optimal_serial.
EnumerationResult enumerate_optimal(const AdjustedCovariance& adj, const Criterion& crit, int J,
                                    const EnumerationBudget& budget = {});

/// Single-threaded reference implementation.
EnumerationResult enumerate_optimal_serial(const AdjustedCovariance& adj, const Criterion& crit, int J,
                                           const EnumerationBudget& budget = {});

/// Criterion value of an exact design, evaluated at w = counts / J.
double exact_criterion_value(const ExactDesign& design, const AdjustedCovariance& adj, const Criterion& crit);

}  // namespace mettrials
