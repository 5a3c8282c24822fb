#include "catch_amalgamated.hpp"

#include <random>

#include "mettrials/approx_optimizer.hpp"
#include "mettrials/dataset.hpp"
#include "mettrials/error.hpp"
#include "oracles.hpp"

using namespace mettrials;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AdjustedCovariance maize_adj(maize::Structure s, int J, double sigma2) {
    return adjusted_covariance(maize::genotype_covariance(s), maize::variance_components(sigma2), {5, 2, J, 2});
}

void check_weights(const ApproximateDesign& d, std::initializer_list<double> expected, double tol) {
    int i = 0;
    for (double e : expected) {
        INFO("coordinate " << i);
        CHECK_THAT(d[i], WithinAbs(e, tol));
        ++i;
    }
}

}  // namespace

TEST_CASE("compound symmetry gives the balanced design", "[optimizer]") {
    for (int J : {20, 40, 100}) {
        for (double s2 : {50.0, 200.0, 400.0}) {
            const auto res = optimize(maize_adj(maize::Structure::CompoundSymmetry, J, s2), Criterion::standard_a());
            REQUIRE(res.certified);
            for (int i = 0; i < 5; ++i) CHECK_THAT(res.design[i], WithinAbs(0.2, 1e-10));
        }
    }
}

TEST_CASE("published FA optima", "[optimizer]") {
    SECTION("standard A, J=40, sigma^2=400") {
        const auto res = optimize(maize_adj(maize::Structure::FactorAnalytic, 40, 400.0), Criterion::standard_a());
        REQUIRE(res.certified);
        check_weights(res.design, {0.25, 0.19, 0.21, 0.23, 0.13}, 0.005);
    }
    SECTION("weighted A with areas, J=20, sigma^2=50") {
        const auto crit = Criterion::weighted_a(SubRegionLoads(maize::areas()));
        const auto res = optimize(maize_adj(maize::Structure::FactorAnalytic, 20, 50.0), crit);
        REQUIRE(res.certified);
        check_weights(res.design, {0.35, 0.03, 0.10, 0.37, 0.15}, 0.005);
    }
}

TEST_CASE("solver output is independently certified", "[optimizer]") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const int P = 2 + trial % 7;
        const auto adj = AdjustedCovariance::from_matrix(oracle::random_pd(P, rng, 0.05) * (1 + trial));
        Vector ell(P);
        for (int i = 0; i < P; ++i) ell(i) = 1.0 + ((i * 5 + trial) % 7);
        for (const auto& crit : {Criterion::standard_a(), Criterion::weighted_a(SubRegionLoads(ell))}) {
            const auto res = optimize(adj, crit);
            REQUIRE(res.certified);
            const auto cert = optimality_condition(res.design, adj, crit);
            CHECK(cert.relative_violation() <= 1e-7);
            CHECK(cert.relative_spread() <= 1e-7);
            CHECK(res.design.weights().minCoeff() >= 0.0);
            CHECK_THAT(res.design.weights().sum(), WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("boundary optimum has exact zeros", "[optimizer]") {
    Vector d(3);
    d << 5.0, 5.0, 0.01;
    const auto adj = AdjustedCovariance::from_matrix(Matrix(d.asDiagonal()));
    const auto res = optimize(adj, Criterion::standard_a());
    REQUIRE(res.certified);
    CHECK(res.design[2] == 0.0);
    CHECK(res.design.support_size() == 2);
}

TEST_CASE("restarts agree and beat reference designs", "[optimizer][property]") {
    const auto adj = maize_adj(maize::Structure::FactorAnalytic, 20, 50.0);
    const auto crit = Criterion::weighted_a(SubRegionLoads(maize::areas()));
    const auto res = optimize(adj, crit);
    REQUIRE(res.restart_values.size() == 8);
    for (double v : res.restart_values) CHECK_THAT(v, WithinRel(res.certificate.criterion_value, 1e-8));

    const double best = res.certificate.criterion_value;
    CHECK(best <= criterion_value(ApproximateDesign::balanced(5), adj, crit));
    CHECK(best < criterion_value(proportional_design(SubRegionLoads(maize::areas())), adj, crit));
    std::mt19937_64 rng(43);
    for (int i = 0; i < 10000; ++i) {
        CHECK(best <= criterion_value(ApproximateDesign(oracle::random_simplex(5, rng)), adj, crit) * (1 + 1e-12));
    }
}

TEST_CASE("both step rules reach the same optimum", "[optimizer]") {
    const auto adj = maize_adj(maize::Structure::FactorAnalytic, 100, 200.0);
    SolverConfig mult;
    SolverConfig vex;
    vex.step_rule = StepRule::VertexExchange;
    const auto a = optimize(adj, Criterion::standard_a(), mult);
    const auto b = optimize(adj, Criterion::standard_a(), vex);
    REQUIRE(a.certified);
    REQUIRE(b.certified);
    CHECK((a.design.weights() - b.design.weights()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("fixed seed gives bit-identical output", "[optimizer]") {
    const auto adj = maize_adj(maize::Structure::FactorAnalytic, 40, 50.0);
    const auto crit = Criterion::weighted_a(SubRegionLoads(maize::areas()));
    const auto a = optimize(adj, crit);
    const auto b = optimize(adj, crit);
    CHECK(a.design.weights() == b.design.weights());
    CHECK(a.restart_values == b.restart_values);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("iteration budget exhaustion is reported, not thrown", "[optimizer]") {
    SolverConfig cfg;
    cfg.max_iterations = 2;
    cfg.restarts = 1;
    cfg.convergence_tol = 1e-14;
    const auto res = optimize(maize_adj(maize::Structure::FactorAnalytic, 20, 50.0), Criterion::standard_a(), cfg);
    CHECK_FALSE(res.certified);
}

TEST_CASE("solver config is validated", "[optimizer]") {
    const auto adj = AdjustedCovariance::from_matrix(Matrix::Identity(2, 2));
    SolverConfig cfg;
    cfg.restarts = 0;
    CHECK_THROWS_AS(optimize(adj, Criterion::standard_a(), cfg), ValidationError);
    cfg = {};
    cfg.convergence_tol = 0.0;
    CHECK_THROWS_AS(optimize(adj, Criterion::standard_a(), cfg), ValidationError);
}

TEST_CASE("proportional design", "[optimizer]") {
    const auto flat = proportional_design(SubRegionLoads(Vector::Ones(5)));
    for (int i = 0; i < 5; ++i) CHECK_THAT(flat[i], WithinAbs(0.2, 1e-15));
    const auto xi = proportional_design(SubRegionLoads(maize::areas()));
    check_weights(xi, {0.2090, 0.1111, 0.1226, 0.2556, 0.3017}, 5e-5);
}
