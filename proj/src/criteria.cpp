#include "mettrials/criteria.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mettrials/error.hpp"

namespace mettrials {

Vector Criterion::load_diagonal(int P) const {
    if (!loads_) return Vector::Ones(P);
    if (loads_->size() != P) {
        throw ValidationError("criterion has " + std::to_string(loads_->size()) + " loads but P = " +
                              std::to_string(P));
    }
    return loads_->values();
}

bool DesignCertificate::certifies(double rel_tol) const noexcept {
    return max_violation <= rel_tol * lhs && support_equality_spread <= rel_tol * lhs;
}

double criterion_value(const ApproximateDesign& design, const AdjustedCovariance& adj, const Criterion& crit) {
    const Matrix a = normalized_mse(design, adj);
    return crit.load_diagonal(design.size()).dot(a.diagonal());
}

DesignCertificate optimality_condition(const ApproximateDesign& design, const AdjustedCovariance& adj,
                                       const Criterion& crit, double support_tol) {
    const Matrix a = normalized_mse(design, adj);
    const Vector h = crit.load_diagonal(design.size());
    const Matrix aha = a * h.asDiagonal() * a;

    DesignCertificate cert;
    cert.criterion_value = h.dot(a.diagonal());
    cert.rhs = aha.diagonal();
    cert.lhs = design.weights().dot(cert.rhs);
    cert.max_violation = (cert.rhs.array() - cert.lhs).maxCoeff();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < design.size(); ++i) {
        if (design[i] > support_tol) {
            lo = std::min(lo, cert.rhs(i));
            hi = std::max(hi, cert.rhs(i));
        }
    }
    cert.support_equality_spread = hi >= lo ? hi - lo : 0.0;
    return cert;
}

}  // namespace mettrials
