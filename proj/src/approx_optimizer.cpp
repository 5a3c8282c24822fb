#include "mettrials/approx_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mettrials/error.hpp"

namespace mettrials {

namespace {

constexpr double kTruncation = 1e-12;

Vector normalized(Vector w) {
    return w / w.sum();
}

// Diagonal of A H A with A = (diag(w) + Delta^{-1})^{-1}.
Vector directional_values(const Vector& w, const AdjustedCovariance& adj, const Vector& h) {
    Matrix precision = adj.delta_inv();
    precision.diagonal() += w;
    Eigen::LLT<Matrix> llt(precision);
    const Matrix a = llt.solve(Matrix::Identity(w.size(), w.size()));
    return (a * h.asDiagonal() * a).diagonal();
}

// Moves mass from the worst support point to the best direction along the
// edge of the simplex, using bisection on the directional derivative.
bool exchange_step(Vector& w, const Vector& rhs, const AdjustedCovariance& adj, const Vector& h) {
    Eigen::Index to = 0;
    rhs.maxCoeff(&to);
    Eigen::Index from = -1;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) > 0.0 && i != to && (from < 0 || rhs(i) < rhs(from))) from = i;
    }
    if (from < 0 || rhs(to) - rhs(from) <= 0.0) return false;

    auto slope = [&](double t) {
        Vector trial = w;
        trial(to) += t;
        trial(from) = std::max(0.0, trial(from) - t);
        const Vector d = directional_values(trial, adj, h);
        return d(from) - d(to);
    };

    double lo = 0.0;
    double hi = w(from);
    if (slope(hi) <= 0.0) {
        lo = hi;
    } else {
        for (int k = 0; k < 80 && hi - lo > 1e-17; ++k) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) <= 0.0 ? lo : hi) = mid;
        }
    }
    if (lo <= 0.0) return false;
    const double t = lo;
    w(to) += t;
    w(from) = (t >= w(from)) ? 0.0 : w(from) - t;
    w = normalized(w);
    return true;
}

ApproximateDesign truncate_small(const Vector& w) {
    Vector out = w;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out(i) < kTruncation) out(i) = 0.0;
    }
    return ApproximateDesign(normalized(out));
}

std::vector<Vector> starting_points(int P, const SolverConfig& cfg) {
    std::vector<Vector> starts;
    starts.reserve(static_cast<std::size_t>(cfg.restarts));
    starts.push_back(Vector::Constant(P, 1.0 / P));
    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> expo(1.0);
    for (int k = 1; k < cfg.restarts; ++k) {
        Vector w(P);
        for (int i = 0; i < P; ++i) w(i) = expo(rng);
        starts.push_back(normalized(w));
    }
    return starts;
}

}  // namespace

void SolverConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("solver max_iterations must be >= 1");
    if (!(convergence_tol > 0.0)) throw ValidationError("solver convergence_tol must be positive");
    if (restarts < 1) throw ValidationError("solver restarts must be >= 1");
}

OptimizationResult optimize_from(const ApproximateDesign& start, const AdjustedCovariance& adj,
                                 const Criterion& crit, const SolverConfig& cfg) {
    cfg.validate();
    if (start.size() != adj.size()) throw ValidationError("start design and Delta sizes differ");
    const int P = start.size();
    const Vector h = crit.load_diagonal(P);

    Vector w = start.weights();
    // Multiplicative updates for the first half of the budget, exchange
    // steps afterwards (or throughout for VertexExchange).
    const int multiplicative_budget = cfg.step_rule == StepRule::Multiplicative ? cfg.max_iterations / 2 : 0;

    int iter = 0;
    bool certified = false;
    for (; iter < cfg.max_iterations; ++iter) {
        const auto cert = optimality_condition(ApproximateDesign(w), adj, crit);
        if (cert.certifies(cfg.convergence_tol)) {
            certified = true;
            break;
        }
        if (iter < multiplicative_budget) {
            Vector next = w.cwiseProduct(cert.rhs) / cert.lhs;
            w = normalized(next);
        } else if (!exchange_step(w, cert.rhs, adj, h)) {
            break;
        }
    }

    ApproximateDesign design = truncate_small(w);
    DesignCertificate cert = optimality_condition(design, adj, crit);
    certified = cert.certifies(cfg.convergence_tol);
    return OptimizationResult{std::move(design), std::move(cert), certified, iter, {}};
}

constexpr double kRestartTieTol = 1e-12;

OptimizationResult optimize(const AdjustedCovariance& adj, const Criterion& crit, const SolverConfig& cfg) {
    cfg.validate();
    const auto starts = starting_points(adj.size(), cfg);
    std::vector<OptimizationResult> results(starts.size(), OptimizationResult{ApproximateDesign::balanced(adj.size()),
                                                                              {}, false, 0, {}});
    const int n = static_cast<int>(starts.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
        results[static_cast<std::size_t>(k)] = optimize_from(ApproximateDesign(starts[static_cast<std::size_t>(k)]),
                                                             adj, crit, cfg);
    }

    // Values within kRestartTieTol are ties; the tighter certificate wins,
    // then the lower restart index.
    const auto residual = [](const DesignCertificate& c) {
        return std::max(c.relative_violation(), c.relative_spread());
    };
    std::size_t best = 0;
    std::vector<double> values;
    values.reserve(results.size());
    for (std::size_t k = 0; k < results.size(); ++k) {
        values.push_back(results[k].certificate.criterion_value);
        if (results[k].certified != results[best].certified) {
            if (results[k].certified) best = k;
            continue;
        }
        const double scale = std::abs(values[best]);
        if (values[k] < values[best] - kRestartTieTol * scale) {
            best = k;
        } else if (values[k] <= values[best] + kRestartTieTol * scale &&
                   residual(results[k].certificate) < residual(results[best].certificate)) {
            best = k;
        }
    }
    OptimizationResult out = std::move(results[best]);
    out.restart_values = std::move(values);
    return out;
}

ApproximateDesign proportional_design(const SubRegionLoads& loads) {
    return ApproximateDesign(loads.values() / loads.values().sum());
}

}  // namespace mettrials
