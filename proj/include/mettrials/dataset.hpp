#pragma once

// Bundled variance components for the extra-early maize maturity group of
// the Indian national maize trials: five agro-ecological sub-regions.

#include <array>
#include <string_view>
#include <vector>

#include "mettrials/model.hpp"

namespace mettrials::maize {

inline constexpr int kSubRegions = 5;

/// Additive terms turning the published V into sigma^2 D:
/// sigma^2 D = V + 31 * 11' + 18 * I.
inline constexpr double kCommonCovariance = 31.0;
inline constexpr double kExtraVariance = 18.0;

/// sigma_gamma^2 + sigma^2 (160 + 333).
inline constexpr double kGammaPlusErrorTotal = 493.0;
/// sigma_lambda^2 + sigma_b^2 (1129 + 1000).
inline constexpr double kLocationVariance = 1129.0;
inline constexpr double kReplicateVariance = 1000.0;
inline constexpr double kLambdaPlusRepTotal = kLocationVariance + kReplicateVariance;

enum class Structure { FactorAnalytic, CompoundSymmetry };

/// Published V for the first-order factor-analytic fit.
Matrix fa_matrix();
/// Published V for the compound-symmetry fit (308 on, 270 off the diagonal).
Matrix cs_matrix();

/// Sub-region areas used as loads for the weighted criterion.
Vector areas();

/// sigma^2 D = V + 31 * 11' + 18 * I for the chosen structure.
GenotypeCovariance genotype_covariance(Structure s);

/// Variance ratios for a given error variance: v2 = 493 / sigma^2 - 1,
/// v1 = 1129 / sigma^2, v3 = 1000 / sigma^2. Throws ValidationError if
/// sigma^2 > 493 (v2 would be negative).
VarianceComponents variance_components(double sigma2);

/// One row of a published allocation table.
struct PublishedRow {
    int J;
    double sigma2;
    std::array<double, kSubRegions> weights;
    std::array<int, kSubRegions> counts;
};

/// Published tables 2-5 (2: FA standard A, 3: FA weighted A, 4: CS weighted
/// A, 5: FA equal efficiency). Throws ValidationError for other numbers.
const std::vector<PublishedRow>& published_table(int which);

inline constexpr std::array<int, 3> kTableJ{20, 40, 100};
inline constexpr std::array<double, 3> kTableSigma2{50.0, 200.0, 400.0};

}  // namespace mettrials::maize
