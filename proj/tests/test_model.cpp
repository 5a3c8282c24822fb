#include "catch_amalgamated.hpp"

#include <random>

#include "mettrials/dataset.hpp"
#include "mettrials/error.hpp"
#include "mettrials/model.hpp"
#include "oracles.hpp"

using namespace mettrials;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("information matrix of simple designs", "[model]") {
    const Matrix m = information_matrix(ApproximateDesign::balanced(5));
    CHECK(m.isApprox(0.2 * Matrix::Identity(5, 5)));

    const Matrix one = information_matrix(ApproximateDesign(Vector::Ones(1)));
    CHECK(one(0, 0) == 1.0);
}

TEST_CASE("information matrix equals F'F/(rJ) for exact designs", "[model]") {
    const std::vector<int> counts{7, 3, 3, 6, 1};
    const Matrix F = oracle::explicit_F(counts, 2);
    REQUIRE(F.rows() == 40);
    const Matrix ftf = F.transpose() * F / 40.0;
    Vector expected(5);
    expected << 0.35, 0.15, 0.15, 0.30, 0.05;
    CHECK(ftf.isApprox(Matrix(expected.asDiagonal()), 1e-15));
    const Matrix m = information_matrix(ApproximateDesign::from_exact(ExactDesign(counts)));
    CHECK((m - ftf).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> part(0, 6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> c(4);
        int total = 0;
        for (auto& x : c) total += (x = part(rng));
        if (total == 0) continue;
        for (int r : {1, 2, 3}) {
            const Matrix Fr = oracle::explicit_F(c, r);
            const Matrix lhs = information_matrix(ApproximateDesign::from_exact(ExactDesign(c)));
            CHECK((lhs - Fr.transpose() * Fr / (r * total)).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("design types validate their invariants", "[model]") {
    CHECK_THROWS_AS(ApproximateDesign(Vector::Constant(3, 0.3)), ValidationError);
    Vector neg(2);
    neg << 1.5, -0.5;
    CHECK_THROWS_AS(ApproximateDesign(neg), ValidationError);
    CHECK_THROWS_AS(ExactDesign({1, -1, 2}), ValidationError);
    CHECK_THROWS_AS(ExactDesign({0, 0}), ValidationError);
    Vector ell(2);
    ell << 1.0, 0.0;
    CHECK_THROWS_AS(SubRegionLoads(ell), ValidationError);
    CHECK_THROWS_AS((ProblemDims{2, 1, 10, 2}.validate()), ValidationError);
    CHECK_THROWS_AS((VarianceComponents{1.0, 0.0, -0.1, 0.0}.validate()), ValidationError);

    Matrix not_pd(2, 2);
    not_pd << 1, 2, 2, 1;
    CHECK_THROWS_AS(GenotypeCovariance(not_pd), ValidationError);
    Matrix asym(2, 2);
    asym << 1, 0.2, 0.1, 1;
    CHECK_THROWS_AS(GenotypeCovariance(asym), ValidationError);
}

TEST_CASE("FA matrix is accepted despite near-singularity", "[model]") {
    CHECK_NOTHROW(GenotypeCovariance(maize::fa_matrix(), CovarianceStructure::FactorAnalytic));
    CHECK_NOTHROW(maize::genotype_covariance(maize::Structure::FactorAnalytic));
}

TEST_CASE("adjusted covariance for the maize data", "[model]") {
    const auto gc = maize::genotype_covariance(maize::Structure::FactorAnalytic);
    const auto vc = maize::variance_components(50.0);
    const auto adj = adjusted_covariance(gc, vc, {5, 2, 20, 2});
    const Matrix expected = (20.0 / 468.0) * (maize::fa_matrix() + 31.0 * Matrix::Ones(5, 5) + 18.0 * Matrix::Identity(5, 5));
    CHECK(oracle::rel_frobenius(adj.delta(), expected) < 1e-14);
    CHECK(oracle::rel_frobenius(adj.delta_inv(), oracle::inverse(expected)) < 1e-10);
    CHECK_THAT(adj.scale(), WithinRel(40.0 / (2.0 * vc.v2 + 1.0), 1e-14));
}

TEST_CASE("adjusted covariance scalar case", "[model]") {
    Matrix d(1, 1);
    d << 3.0;
    const VarianceComponents vc{2.0, 0.0, 0.7, 0.0};
    const auto adj = adjusted_covariance(GenotypeCovariance(2.0 * d), vc, {1, 2, 9, 2});
    CHECK_THAT(adj.delta()(0, 0), WithinRel(2.0 * 9 * 3.0 / (2 * 0.7 + 1), 1e-14));
}

TEST_CASE("adjusted covariance for compound symmetry matches elementwise evaluation", "[model]") {
    const double sigma2 = 50.0;
    const auto gc = GenotypeCovariance::compound_symmetry(5, 270.0, 38.0);
    const auto vc = maize::variance_components(sigma2);
    const auto adj = adjusted_covariance(gc, vc, {5, 2, 20, 2});
    const double factor = 2.0 * 20 / (2.0 * vc.v2 + 1.0) / sigma2;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double entry = i == j ? 308.0 : 270.0;
            CHECK_THAT(adj.delta()(i, j), WithinRel(factor * entry, 1e-14));
        }
    }
    CHECK_THAT(factor, WithinRel(20.0 / 468.0, 1e-14));
}

TEST_CASE("replicate count generalises the factor 2", "[model]") {
    std::mt19937_64 rng(3);
    const Matrix s2d = oracle::random_pd(3, rng);
    const VarianceComponents vc{1.7, 0.4, 0.9, 0.2};
    for (int r : {1, 2, 4}) {
        const auto adj = adjusted_covariance(GenotypeCovariance(s2d), vc, {3, 2, 11, r});
        CHECK(oracle::rel_frobenius(adj.delta(), oracle::delta(s2d, vc.sigma2, vc.v2, 11, r)) < 1e-14);
    }
}

TEST_CASE("MSE matrices agree with the independent closed form", "[model]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int P = 1 + trial % 5;
        const int K = 2 + trial % 4;
        const int J = 5 + trial;
        const Matrix s2d = oracle::random_pd(P, rng);
        const VarianceComponents vc{0.5 + trial * 0.1, 0.3, 0.1 * trial, 0.7};
        const GenotypeCovariance gc(s2d);
        const auto adj = adjusted_covariance(gc, vc, {P, K, J, 2});
        const Vector w = oracle::random_simplex(P, rng);
        const ApproximateDesign xi(w);

        const Matrix alpha = mse_genotype_effects(xi, adj, gc, vc.sigma2, K);
        CHECK(oracle::rel_frobenius(alpha, oracle::mse_alpha(w, s2d, vc.sigma2, vc.v2, J, 2, K)) < 1e-10);

        const Matrix D = s2d / vc.sigma2;
        Matrix inner = oracle::inverse(D);
        inner.diagonal() += (2.0 * J / (2 * vc.v2 + 1)) * w;
        const Matrix theta = mse_contrasts(xi, adj, vc.sigma2);
        CHECK(oracle::rel_frobenius(theta, 2 * vc.sigma2 * oracle::inverse(inner)) < 1e-10);

        CHECK(oracle::rel_frobenius(normalized_mse(xi, adj), oracle::normalized_mse(w, adj.delta())) < 1e-10);
    }
}

TEST_CASE("scalar MSE formulas", "[model]") {
    const double d = 2.5, sigma2 = 1.3, v2 = 0.4;
    const int J = 6;
    Matrix D(1, 1);
    D << d;
    const GenotypeCovariance gc(sigma2 * D);
    const VarianceComponents vc{sigma2, 0.0, v2, 0.0};
    const auto adj = adjusted_covariance(gc, vc, {1, 2, J, 2});
    const ApproximateDesign xi(Vector::Ones(1));
    const double c = 2.0 * J / (2 * v2 + 1);

    CHECK_THAT(mse_contrasts(xi, adj, sigma2)(0, 0), WithinRel(2 * sigma2 / (c + 1 / d), 1e-13));

    const double s = 1.0 / (c + 1 / d);
    const Matrix alpha = mse_genotype_effects(xi, adj, gc, sigma2, 2);
    REQUIRE(alpha.rows() == 2);
    CHECK_THAT(alpha(0, 0), WithinRel(sigma2 / 2 * (d + s), 1e-13));
    CHECK_THAT(alpha(1, 1), WithinRel(sigma2 / 2 * (d + s), 1e-13));
    CHECK_THAT(alpha(0, 1), WithinRel(sigma2 / 2 * (d - s), 1e-13));
}

TEST_CASE("trace identity between alpha and contrast MSE", "[model]") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int P = 2 + trial % 4;
        const int K = 2 + trial % 5;
        const Matrix s2d = oracle::random_pd(P, rng);
        const VarianceComponents vc{1.0 + trial, 0.0, 0.25 * trial, 0.0};
        const GenotypeCovariance gc(s2d);
        const auto adj = adjusted_covariance(gc, vc, {P, K, 12, 2});
        const ApproximateDesign xi(oracle::random_simplex(P, rng));
        const double tr_alpha = mse_genotype_effects(xi, adj, gc, vc.sigma2, K).trace();
        const double tr_theta = mse_contrasts(xi, adj, vc.sigma2).trace();
        const double tr_d = s2d.trace();
        CHECK_THAT(tr_alpha - tr_d, WithinRel((K - 1) / 2.0 * tr_theta, 1e-10));
        const double tr_a = normalized_mse(xi, adj).trace();
        CHECK_THAT(tr_alpha, WithinRel(tr_d + (K - 1) * vc.sigma2 / adj.scale() * tr_a, 1e-10));
    }
}

TEST_CASE("MSE matrices are positive (semi-)definite", "[model]") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const int P = 1 + trial % 6;
        const Matrix s2d = oracle::random_pd(P, rng);
        const VarianceComponents vc{2.0, 0.0, 1.0, 0.0};
        const GenotypeCovariance gc(s2d);
        const auto adj = adjusted_covariance(gc, vc, {P, 3, 10, 2});
        Vector w = oracle::random_simplex(P, rng);
        if (P > 1) {
            w(0) += w(P - 1);
            w(P - 1) = 0.0;
        }
        const ApproximateDesign xi(w);
        const Matrix theta = mse_contrasts(xi, adj, vc.sigma2);
        CHECK((theta - theta.transpose()).norm() < 1e-12 * theta.norm());
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(theta).eigenvalues().minCoeff() > 0.0);
        const Matrix alpha = mse_genotype_effects(xi, adj, gc, vc.sigma2, 3);
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(alpha).eigenvalues().minCoeff() >= -1e-10 * alpha.norm());
    }
}

TEST_CASE("diagonal D: raising w_i never raises the i-th variance", "[model][property]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int P = 2 + trial % 5;
        Vector d(P);
        for (int i = 0; i < P; ++i) d(i) = u(rng);
        const auto adj = AdjustedCovariance::from_matrix(Matrix(d.asDiagonal()));
        const Vector w = oracle::random_simplex(P, rng);
        const int i = trial % P;
        Vector w2 = w;
        w2(i) += 0.1;
        w2 /= w2.sum();
        const double before = normalized_mse(ApproximateDesign(w), adj)(i, i);
        const double after = normalized_mse(ApproximateDesign(w2), adj)(i, i);
        CHECK(after <= before * (1 + 1e-14));
    }
}
