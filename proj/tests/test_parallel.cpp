#include "catch_amalgamated.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mettrials/blup_oracle.hpp"
#include "mettrials/dataset.hpp"
#include "mettrials/exact_designs.hpp"
#include "mettrials/scenario.hpp"

using namespace mettrials;

namespace {

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

AdjustedCovariance maize_adj(int J, double sigma2) {
    return adjusted_covariance(maize::genotype_covariance(maize::Structure::FactorAnalytic),
                               maize::variance_components(sigma2), {5, 2, J, 2});
}

}  // namespace

TEST_CASE("parallel enumeration matches the serial reference", "[parallel]") {
    const auto crit = Criterion::weighted_a(SubRegionLoads(maize::areas()));
    for (int threads : {1, 3, 8}) {
        set_threads(threads);
        for (int J : {7, 20, 40}) {
            const auto adj = maize_adj(J, 200.0);
            const auto par = enumerate_optimal(adj, crit, J);
            const auto ser = enumerate_optimal_serial(adj, crit, J);
            CHECK(par.design == ser.design);
            CHECK(par.criterion_value == ser.criterion_value);
            CHECK(par.ties == ser.ties);
            CHECK(par.visited == ser.visited);
        }
    }
    set_threads(1);
    const auto adj = AdjustedCovariance::from_matrix(2.0 * Matrix::Identity(3, 3));
    const auto par = enumerate_optimal(adj, Criterion::standard_a(), 10);
    const auto ser = enumerate_optimal_serial(adj, Criterion::standard_a(), 10);
    CHECK(par.ties == ser.ties);
    CHECK(par.ties.size() == 3);
}

TEST_CASE("parallel simulation is bit-identical to the serial reference", "[parallel]") {
    const auto gc = maize::genotype_covariance(maize::Structure::FactorAnalytic);
    const auto vc = maize::variance_components(200.0);
    const auto mm = assemble(ExactDesign({2, 1, 1, 2, 1}), vc, gc, 2, 2);
    const SimulationConfig cfg{1000, 99, {}};
    const auto ser = simulate_empirical_mse_serial(mm, vc, gc, cfg);
    for (int threads : {1, 2, 5}) {
        set_threads(threads);
        const auto par = simulate_empirical_mse(mm, vc, gc, cfg);
        CHECK(par.empirical_mse == ser.empirical_mse);
        CHECK(par.standard_errors == ser.standard_errors);
        CHECK(par.alpha_covariance == ser.alpha_covariance);
    }
    set_threads(1);
}

TEST_CASE("optimizer and sweeps do not depend on the thread count", "[parallel]") {
    Scenario sc = bundled_table_scenario(3);
    sc.J_values = {20, 40};
    set_threads(1);
    const auto one = to_records(run_scenario(sc, {.record_timing = false})).dump();
    set_threads(6);
    const auto six = to_records(run_scenario(sc, {.record_timing = false})).dump();
    set_threads(1);
    CHECK(one == six);
}
