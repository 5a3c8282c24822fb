#pragma once

#include <optional>

#include "mettrials/model.hpp"

namespace mettrials {

/// Standard A-criterion tr (M + Delta^{-1})^{-1}, or its weighted form
/// tr L (M + Delta^{-1})^{-1} with L = diag(loads). Constant factors are
/// dropped; see report helpers for reconstructing MSE-scale values.
class Criterion {
public:
    static Criterion standard_a() { return Criterion(); }
    static Criterion weighted_a(SubRegionLoads loads) { return Criterion(std::move(loads)); }

    bool is_weighted() const noexcept { return loads_.has_value(); }
    const SubRegionLoads& loads() const { return *loads_; }

    /// Diagonal of H: ones for StandardA, the loads for WeightedA.
    Vector load_diagonal(int P) const;

    const char* name() const noexcept { return is_weighted() ? "weighted-a" : "a"; }

private:
    Criterion() = default;
    explicit Criterion(SubRegionLoads loads) : loads_(std::move(loads)) {}

    std::optional<SubRegionLoads> loads_;
};

/// Equivalence-theorem residuals for a design. With A = (M + Delta^{-1})^{-1}
/// and H the load matrix: rhs_i = (A H A)_ii and lhs = tr(M A H A) =
/// sum_i w_i rhs_i. A design is optimal iff rhs_i <= lhs for all i, with
/// equality on the support.
struct DesignCertificate {
    double criterion_value = 0.0;
    double lhs = 0.0;
    Vector rhs;
    double max_violation = 0.0;         // max_i (rhs_i - lhs)
    double support_equality_spread = 0.0;  // max - min of rhs_i over w_i > support_tol

    double relative_violation() const noexcept { return max_violation / lhs; }
    double relative_spread() const noexcept { return support_equality_spread / lhs; }

    /// Both the violation and the support spread are within `rel_tol * lhs`.
    bool certifies(double rel_tol) const noexcept;
};

inline constexpr double kSupportTolerance = 1e-8;

double criterion_value(const ApproximateDesign& design, const AdjustedCovariance& adj, const Criterion& crit);

DesignCertificate optimality_condition(const ApproximateDesign& design, const AdjustedCovariance& adj,
                                       const Criterion& crit, double support_tol = kSupportTolerance);

}  // namespace mettrials
