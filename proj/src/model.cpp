#include "mettrials/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mettrials/error.hpp"

namespace mettrials {

namespace {

constexpr double kSimplexTol = 1e-12;

}  // namespace

void ProblemDims::validate() const {
    if (P < 1) throw ValidationError("number of sub-regions P must be >= 1");
    if (K < 2) throw ValidationError("number of genotypes K must be >= 2");
    if (J < 1) throw ValidationError("total number of locations J must be >= 1");
    if (r < 1) throw ValidationError("replicate count r must be >= 1");
}

void VarianceComponents::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be positive and finite");
    if (!(v1 >= 0.0) || !std::isfinite(v1)) throw ValidationError("v1 must be non-negative");
    if (!(v2 >= 0.0) || !std::isfinite(v2)) throw ValidationError("v2 must be non-negative");
    if (!(v3 >= 0.0) || !std::isfinite(v3)) throw ValidationError("v3 must be non-negative");
}

const char* to_string(CovarianceStructure s) {
    switch (s) {
        case CovarianceStructure::CompoundSymmetry: return "compound-symmetry";
        case CovarianceStructure::FactorAnalytic: return "factor-analytic";
        case CovarianceStructure::General: return "general";
    }
    return "general";
}

GenotypeCovariance::GenotypeCovariance(Matrix sigma2D, CovarianceStructure structure)
    : sigma2D_(std::move(sigma2D)), structure_(structure) {
    if (!linalg::is_symmetric_positive_definite(sigma2D_)) {
        throw ValidationError("genotype covariance matrix (" + std::to_string(sigma2D_.rows()) + "x" +
                              std::to_string(sigma2D_.cols()) + ") is not symmetric positive definite");
    }
    linalg::symmetrize(sigma2D_);
    if (structure_ == CovarianceStructure::CompoundSymmetry) {
        const Eigen::Index P = sigma2D_.rows();
        cs_a_ = P > 1 ? sigma2D_(0, 1) : 0.0;
        cs_b_ = sigma2D_(0, 0) - cs_a_;
        const Matrix expected = cs_a_ * Matrix::Ones(P, P) + cs_b_ * Matrix::Identity(P, P);
        if ((expected - sigma2D_).cwiseAbs().maxCoeff() > 1e-12 * sigma2D_.cwiseAbs().maxCoeff()) {
            throw ValidationError("matrix tagged compound-symmetry does not have the a*11'+b*I form");
        }
    }
}

GenotypeCovariance GenotypeCovariance::compound_symmetry(int P, double a, double b) {
    if (P < 1) throw ValidationError("compound symmetry needs P >= 1");
    if (!(b > 0.0)) throw ValidationError("compound symmetry requires b > 0");
    if (!(a + b / P > 0.0)) throw ValidationError("compound symmetry requires a + b/P > 0");
    Matrix m = a * Matrix::Ones(P, P) + b * Matrix::Identity(P, P);
    GenotypeCovariance gc(std::move(m), CovarianceStructure::CompoundSymmetry);
    gc.cs_a_ = a;
    gc.cs_b_ = b;
    return gc;
}

ApproximateDesign::ApproximateDesign(Vector weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) throw ValidationError("design needs at least one weight");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (!(weights_(i) >= 0.0) || !std::isfinite(weights_(i))) {
            throw ValidationError("design weight w" + std::to_string(i + 1) + " is negative or not finite");
        }
    }
    if (std::abs(weights_.sum() - 1.0) > kSimplexTol) {
        throw ValidationError("design weights must sum to 1 (got " + std::to_string(weights_.sum()) + ")");
    }
}

ApproximateDesign ApproximateDesign::balanced(int P) {
    if (P < 1) throw ValidationError("balanced design needs P >= 1");
    return ApproximateDesign(Vector::Constant(P, 1.0 / P));
}

ApproximateDesign ApproximateDesign::from_exact(const ExactDesign& exact) {
    Vector w(exact.size());
    for (int i = 0; i < exact.size(); ++i) {
        w(i) = static_cast<double>(exact[i]) / exact.total();
    }
    return ApproximateDesign(std::move(w));
}

int ApproximateDesign::support_size(double tol) const {
    return static_cast<int>((weights_.array() > tol).count());
}

ExactDesign::ExactDesign(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw ValidationError("exact design needs at least one sub-region");
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] < 0) throw ValidationError("location count J" + std::to_string(i + 1) + " is negative");
    }
    total_ = std::accumulate(counts_.begin(), counts_.end(), 0);
    if (total_ < 1) throw ValidationError("exact design must place at least one location");
}

AdjustedCovariance::AdjustedCovariance(Matrix delta, Matrix delta_inv, double scale)
    : delta_(std::move(delta)), delta_inv_(std::move(delta_inv)), scale_(scale) {}

AdjustedCovariance AdjustedCovariance::from_matrix(Matrix delta, double scale) {
    if (!linalg::is_symmetric_positive_definite(delta)) {
        throw ValidationError("adjusted covariance is not symmetric positive definite");
    }
    if (!(scale > 0.0)) throw ValidationError("adjusted covariance scale must be positive");
    Matrix inv = linalg::spd_inverse(delta);
    return AdjustedCovariance(std::move(delta), std::move(inv), scale);
}

SubRegionLoads::SubRegionLoads(Vector ell) : ell_(std::move(ell)) {
    if (ell_.size() == 0) throw ValidationError("loads vector is empty");
    for (Eigen::Index i = 0; i < ell_.size(); ++i) {
        if (!(ell_(i) > 0.0) || !std::isfinite(ell_(i))) {
            throw ValidationError("load l" + std::to_string(i + 1) + " must be positive");
        }
    }
}

Matrix information_matrix(const ApproximateDesign& design) {
    return design.weights().asDiagonal();
}

AdjustedCovariance adjusted_covariance(const GenotypeCovariance& gc, const VarianceComponents& vc,
                                       const ProblemDims& dims) {
    vc.validate();
    dims.validate();
    if (gc.size() != dims.P) {
        throw ValidationError("genotype covariance is " + std::to_string(gc.size()) + "x" +
                              std::to_string(gc.size()) + " but P = " + std::to_string(dims.P));
    }
    const double denom = dims.r * vc.v2 + 1.0;
    if (!(denom > 0.0)) throw ValidationError("r*v2 + 1 must be positive");
    const double scale = dims.r * static_cast<double>(dims.J) / denom;
    Matrix delta = (scale / vc.sigma2) * gc.sigma2D();
    Matrix inv = linalg::spd_inverse(delta);
    return AdjustedCovariance(std::move(delta), std::move(inv), scale);
}

Matrix normalized_mse(const ApproximateDesign& design, const AdjustedCovariance& adj) {
    if (design.size() != adj.size()) {
        throw ValidationError("design has " + std::to_string(design.size()) + " weights but Delta is " +
                              std::to_string(adj.size()) + "x" + std::to_string(adj.size()));
    }
    Matrix precision = adj.delta_inv();
    precision.diagonal() += design.weights();
    return linalg::spd_inverse(precision);
}

Matrix mse_contrasts(const ApproximateDesign& design, const AdjustedCovariance& adj, double sigma2) {
    return (2.0 * sigma2 / adj.scale()) * normalized_mse(design, adj);
}

Matrix mse_genotype_effects(const ApproximateDesign& design, const AdjustedCovariance& adj,
                            const GenotypeCovariance& gc, double sigma2, int K) {
    if (K < 1) throw ValidationError("K must be >= 1");
    if (gc.size() != adj.size()) throw ValidationError("genotype covariance and Delta sizes differ");
    const Matrix mean_part = Matrix::Constant(K, K, 1.0 / K);
    const Matrix centering = Matrix::Identity(K, K) - mean_part;
    const Matrix inner = (sigma2 / adj.scale()) * normalized_mse(design, adj);
    Matrix out = linalg::kron(mean_part, gc.sigma2D()) + linalg::kron(centering, inner);
    linalg::symmetrize(out);
    return out;
}

}  // namespace mettrials
