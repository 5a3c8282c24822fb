#include "mettrials/dataset.hpp"

#include <string>

#include "mettrials/error.hpp"

namespace mettrials::maize {

Matrix fa_matrix() {
    Matrix v(kSubRegions, kSubRegions);
    v << 567, 254, 239, 485, 328,
         254, 155, 118, 240, 162,
         239, 118, 155, 226, 153,
         485, 240, 226, 488, 310,
         328, 162, 153, 310, 215;
    return v;
}

Matrix cs_matrix() {
    return Matrix::Constant(kSubRegions, kSubRegions, 270.0) + 38.0 * Matrix::Identity(kSubRegions, kSubRegions);
}

Vector areas() {
    Vector ell(kSubRegions);
    ell << 813685, 432716, 477365, 995298, 1174818;
    return ell;
}

GenotypeCovariance genotype_covariance(Structure s) {
    const Matrix extra = kCommonCovariance * Matrix::Ones(kSubRegions, kSubRegions) +
                         kExtraVariance * Matrix::Identity(kSubRegions, kSubRegions);
    if (s == Structure::CompoundSymmetry) {
        return GenotypeCovariance::compound_symmetry(kSubRegions, 270.0 + kCommonCovariance, 38.0 + kExtraVariance);
    }
    return GenotypeCovariance(fa_matrix() + extra, CovarianceStructure::FactorAnalytic);
}

VarianceComponents variance_components(double sigma2) {
    if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
    if (sigma2 > kGammaPlusErrorTotal) {
        throw ValidationError("sigma2 = " + std::to_string(sigma2) + " exceeds sigma_gamma^2 + sigma^2 = 493; v2 would be negative");
    }
    VarianceComponents vc;
    vc.sigma2 = sigma2;
    vc.v2 = kGammaPlusErrorTotal / sigma2 - 1.0;
    vc.v1 = kLocationVariance / sigma2;
    vc.v3 = kReplicateVariance / sigma2;
    return vc;
}

namespace {

const std::vector<PublishedRow> kTable2{
    {20, 50, {0.33, 0.13, 0.18, 0.31, 0.04}, {7, 3, 3, 6, 1}},
    {20, 200, {0.31, 0.15, 0.19, 0.29, 0.06}, {6, 3, 4, 6, 1}},
    {20, 400, {0.29, 0.16, 0.20, 0.27, 0.09}, {6, 3, 4, 5, 2}},
    {40, 50, {0.27, 0.17, 0.20, 0.25, 0.10}, {11, 7, 8, 10, 4}},
    {40, 200, {0.26, 0.18, 0.20, 0.24, 0.12}, {10, 7, 8, 10, 5}},
    {40, 400, {0.25, 0.19, 0.21, 0.23, 0.13}, {10, 8, 8, 9, 5}},
    {100, 50, {0.23, 0.19, 0.21, 0.22, 0.15}, {23, 19, 21, 22, 15}},
    {100, 200, {0.23, 0.19, 0.21, 0.21, 0.16}, {23, 19, 21, 21, 16}},
    {100, 400, {0.22, 0.20, 0.21, 0.21, 0.17}, {22, 20, 20, 21, 17}},
};

const std::vector<PublishedRow> kTable3{
    {20, 50, {0.35, 0.03, 0.10, 0.37, 0.15}, {7, 1, 2, 7, 3}},
    {20, 200, {0.33, 0.05, 0.11, 0.35, 0.16}, {7, 1, 2, 7, 3}},
    {20, 400, {0.30, 0.08, 0.13, 0.32, 0.18}, {6, 2, 2, 6, 4}},
    {40, 50, {0.28, 0.09, 0.13, 0.30, 0.19}, {11, 4, 5, 12, 8}},
    {40, 200, {0.27, 0.10, 0.14, 0.29, 0.20}, {11, 4, 6, 11, 8}},
    {40, 400, {0.27, 0.10, 0.14, 0.29, 0.20}, {10, 5, 6, 11, 8}},
    {100, 50, {0.24, 0.13, 0.15, 0.26, 0.22}, {24, 13, 15, 26, 22}},
    {100, 200, {0.24, 0.13, 0.15, 0.25, 0.22}, {24, 13, 15, 25, 23}},
    {100, 400, {0.23, 0.14, 0.16, 0.25, 0.23}, {23, 14, 15, 25, 23}},
};

const std::vector<PublishedRow> kTable4{
    {20, 50, {0.22, 0.10, 0.12, 0.26, 0.30}, {4, 2, 3, 5, 6}},
    {20, 200, {0.21, 0.11, 0.12, 0.26, 0.30}, {4, 2, 3, 5, 6}},
    {20, 400, {0.21, 0.11, 0.13, 0.26, 0.29}, {4, 2, 3, 5, 6}},
    {40, 50, {0.21, 0.12, 0.13, 0.25, 0.29}, {9, 5, 5, 10, 11}},
    {40, 200, {0.21, 0.12, 0.13, 0.25, 0.28}, {9, 5, 5, 10, 11}},
    {40, 400, {0.21, 0.13, 0.14, 0.25, 0.28}, {9, 5, 5, 10, 11}},
    {100, 50, {0.21, 0.13, 0.14, 0.24, 0.27}, {21, 13, 15, 24, 27}},
    {100, 200, {0.21, 0.14, 0.15, 0.24, 0.27}, {21, 13, 15, 24, 27}},
    {100, 400, {0.21, 0.14, 0.15, 0.24, 0.26}, {21, 14, 15, 24, 26}},
};

const std::vector<PublishedRow> kTable5{
    {20, 50, {0.342, 0.148, 0.205, 0.302, 0.003}, {6, 3, 4, 6, 1}},
    {20, 200, {0.320, 0.158, 0.209, 0.284, 0.029}, {6, 3, 4, 6, 1}},
    {20, 400, {0.291, 0.172, 0.211, 0.260, 0.065}, {6, 3, 4, 5, 2}},
    {40, 50, {0.274, 0.179, 0.212, 0.247, 0.088}, {11, 7, 8, 10, 4}},
    {40, 200, {0.262, 0.183, 0.212, 0.239, 0.104}, {10, 7, 9, 10, 4}},
    {40, 400, {0.247, 0.189, 0.211, 0.228, 0.125}, {10, 8, 8, 9, 5}},
    {100, 50, {0.231, 0.194, 0.209, 0.217, 0.150}, {23, 19, 21, 22, 15}},
    {100, 200, {0.226, 0.195, 0.208, 0.214, 0.157}, {22, 20, 21, 21, 16}},
    {100, 400, {0.219, 0.197, 0.206, 0.210, 0.167}, {22, 20, 20, 21, 17}},
};

}  // namespace

const std::vector<PublishedRow>& published_table(int which) {
    switch (which) {
        case 2: return kTable2;
        case 3: return kTable3;
        case 4: return kTable4;
        case 5: return kTable5;
        default: throw ValidationError("published tables are numbered 2 to 5, got " + std::to_string(which));
    }
}

}  // namespace mettrials::maize
