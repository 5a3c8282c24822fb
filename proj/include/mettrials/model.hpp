#pragma once

// Domain types for allocating trial locations to sub-regions and the
// closed-form MSE algebra of the BLUP under the sub-region mixed model
//
//   Y_ijkl = mu_i + alpha_ik + lambda_ij + gamma_ijk + b_ijl + eps_ijkl
//
// with Cov(alpha_k) = sigma^2 D, var(gamma) = sigma^2 v2, var(lambda) =
// sigma^2 v1, var(b) = sigma^2 v3 and var(eps) = sigma^2.

#include <vector>

#include "mettrials/linalg.hpp"

namespace mettrials {

using linalg::Matrix;
using linalg::Vector;

struct ProblemDims {
    int P = 1;   // sub-regions
    int K = 2;   // genotypes
    int J = 1;   // total locations
    int r = 2;   // replicates per genotype and location

    void validate() const;
};

struct VarianceComponents {
    double sigma2 = 1.0;  // error variance
    double v1 = 0.0;      // location variance / sigma2
    double v2 = 0.0;      // genotype-by-location variance / sigma2
    double v3 = 0.0;      // replicate variance / sigma2

    void validate() const;
};

enum class CovarianceStructure { CompoundSymmetry, FactorAnalytic, General };

const char* to_string(CovarianceStructure s);

/// sigma^2 D, the covariance of one genotype's sub-region effects, in data
/// units. Symmetric positive definiteness is checked on construction.
class GenotypeCovariance {
public:
    GenotypeCovariance(Matrix sigma2D, CovarianceStructure structure = CovarianceStructure::General);

    /// a * 11^T + b * I (data units). Requires b > 0 and a + b / P > 0.
    static GenotypeCovariance compound_symmetry(int P, double a, double b);

    const Matrix& sigma2D() const noexcept { return sigma2D_; }
    CovarianceStructure structure() const noexcept { return structure_; }
    int size() const noexcept { return static_cast<int>(sigma2D_.rows()); }

    /// Only meaningful for CompoundSymmetry.
    double cs_a() const noexcept { return cs_a_; }
    double cs_b() const noexcept { return cs_b_; }

private:
    Matrix sigma2D_;
    CovarianceStructure structure_;
    double cs_a_ = 0.0;
    double cs_b_ = 0.0;
};

class ExactDesign;

/// Weights on the P sub-regions: w_i >= 0, sum w_i = 1 (to 1e-12).
class ApproximateDesign {
public:
    explicit ApproximateDesign(Vector weights);

    static ApproximateDesign balanced(int P);
    static ApproximateDesign from_exact(const ExactDesign& exact);

    const Vector& weights() const noexcept { return weights_; }
    int size() const noexcept { return static_cast<int>(weights_.size()); }
    double operator[](int i) const { return weights_(i); }

    /// Number of weights strictly above `tol`.
    int support_size(double tol = 0.0) const;

private:
    Vector weights_;
};

/// Non-negative location counts J_1..J_P.
class ExactDesign {
public:
    explicit ExactDesign(std::vector<int> counts);

    const std::vector<int>& counts() const noexcept { return counts_; }
    int size() const noexcept { return static_cast<int>(counts_.size()); }
    int total() const noexcept { return total_; }
    int operator[](int i) const { return counts_[static_cast<std::size_t>(i)]; }

    friend bool operator==(const ExactDesign&, const ExactDesign&) = default;

private:
    std::vector<int> counts_;
    int total_ = 0;
};

/// Delta = (rJ / (r v2 + 1)) * D together with its inverse. `scale` keeps
/// the factor rJ / (r v2 + 1) so MSE matrices can be reconstructed.
class AdjustedCovariance {
public:
    /// Wrap an arbitrary PD matrix with unit scale (useful for analytic
    /// instances such as Delta = I).
    static AdjustedCovariance from_matrix(Matrix delta, double scale = 1.0);

    const Matrix& delta() const noexcept { return delta_; }
    const Matrix& delta_inv() const noexcept { return delta_inv_; }
    double scale() const noexcept { return scale_; }
    int size() const noexcept { return static_cast<int>(delta_.rows()); }

private:
    AdjustedCovariance(Matrix delta, Matrix delta_inv, double scale);

    friend AdjustedCovariance adjusted_covariance(const GenotypeCovariance&, const VarianceComponents&,
                                                  const ProblemDims&);

    Matrix delta_;
    Matrix delta_inv_;
    double scale_ = 1.0;
};

/// Positive sub-region coefficients, e.g. areas.
class SubRegionLoads {
public:
    explicit SubRegionLoads(Vector ell);

    const Vector& values() const noexcept { return ell_; }
    int size() const noexcept { return static_cast<int>(ell_.size()); }

private:
    Vector ell_;
};

Matrix information_matrix(const ApproximateDesign& design);

AdjustedCovariance adjusted_covariance(const GenotypeCovariance& gc, const VarianceComponents& vc,
                                       const ProblemDims& dims);

/// (M(xi) + Delta^{-1})^{-1}; every criterion in the library is built on it.
Matrix normalized_mse(const ApproximateDesign& design, const AdjustedCovariance& adj);

/// MSE matrix of the BLUP of a pairwise genotype contrast:
/// 2 sigma^2 (c M + D^{-1})^{-1} = (2 sigma^2 / c) (M + Delta^{-1})^{-1}
/// with c = rJ / (r v2 + 1). Identical for every genotype pair.
Matrix mse_contrasts(const ApproximateDesign& design, const AdjustedCovariance& adj, double sigma2);

/// (PK)x(PK) MSE matrix of the BLUP of all genotype effects, ordered genotype
/// by genotype (alpha_1, ..., alpha_K), each block of length P.
Matrix mse_genotype_effects(const ApproximateDesign& design, const AdjustedCovariance& adj,
                            const GenotypeCovariance& gc, double sigma2, int K);

}  // namespace mettrials
