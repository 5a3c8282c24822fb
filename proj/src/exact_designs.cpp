#include "mettrials/exact_designs.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mettrials/error.hpp"

namespace mettrials {

namespace {

constexpr double kTieTol = 1e-12;

// Criterion kernel for the enumeration loop: tr H (diag(c)/J + Delta^{-1})^{-1}
// through a hand-rolled Cholesky factorization and triangular inverse. All
// scratch space is owned by the evaluator so the hot path never allocates.
class CompositionEvaluator {
public:
    CompositionEvaluator(const AdjustedCovariance& adj, const Criterion& crit, int J)
        : P_(adj.size()), inv_J_(1.0 / J), h_(crit.load_diagonal(adj.size())),
          base_(adj.delta_inv()), a_(P_ * P_), x_(P_ * P_) {}

    double operator()(const int* counts) {
        const int P = P_;
        double* a = a_.data();
        for (int i = 0; i < P; ++i) {
            for (int j = 0; j <= i; ++j) a[i * P + j] = base_(i, j);
            a[i * P + i] += counts[i] * inv_J_;
        }
        // In-place Cholesky, lower triangle.
        for (int j = 0; j < P; ++j) {
            double d = a[j * P + j];
            for (int k = 0; k < j; ++k) d -= a[j * P + k] * a[j * P + k];
            if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
            const double l = std::sqrt(d);
            a[j * P + j] = l;
            for (int i = j + 1; i < P; ++i) {
                double s = a[i * P + j];
                for (int k = 0; k < j; ++k) s -= a[i * P + k] * a[j * P + k];
                a[i * P + j] = s / l;
            }
        }
        // X = L^{-1}; (A^{-1})_ii = sum_k X_ki^2.
        double* x = x_.data();
        double value = 0.0;
        for (int i = 0; i < P; ++i) {
            x[i * P + i] = 1.0 / a[i * P + i];
            double col = x[i * P + i] * x[i * P + i];
            for (int k = i + 1; k < P; ++k) {
                double s = 0.0;
                for (int m = i; m < k; ++m) s += a[k * P + m] * x[m * P + i];
                x[k * P + i] = -s / a[k * P + k];
                col += x[k * P + i] * x[k * P + i];
            }
            value += h_(i) * col;
        }
        return value;
    }

private:
    int P_;
    double inv_J_;
    Vector h_;
    Matrix base_;
    std::vector<double> a_;
    std::vector<double> x_;
};

// Lexicographic successor among compositions with a fixed sum.
bool next_composition(std::vector<int>& c, std::size_t first) {
    const std::size_t n = c.size();
    if (n - first < 2) return false;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(n) - 2;
    int tail = c[n - 1];
    while (i >= static_cast<std::ptrdiff_t>(first) && tail == 0) {
        tail += c[static_cast<std::size_t>(i)];
        --i;
    }
    if (i < static_cast<std::ptrdiff_t>(first)) return false;
    ++c[static_cast<std::size_t>(i)];
    for (std::size_t k = static_cast<std::size_t>(i) + 1; k + 1 < n; ++k) c[k] = 0;
    c[n - 1] = tail - 1;
    return true;
}

struct Candidates {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::vector<int>, double>> near;
    std::uint64_t visited = 0;

    void offer(const std::vector<int>& c, double v) {
        ++visited;
        if (v < best * (1.0 - kTieTol)) {
            best = v;
            near.clear();
            near.emplace_back(c, v);
        } else if (v <= best * (1.0 + kTieTol)) {
            best = std::min(best, v);
            near.emplace_back(c, v);
        }
    }

    // Partitions are merged in lexicographic order.
    void absorb(const Candidates& other) {
        visited += other.visited;
        for (const auto& [c, v] : other.near) {
            if (v < best * (1.0 - kTieTol)) {
                best = v;
                near.clear();
                near.emplace_back(c, v);
            } else if (v <= best * (1.0 + kTieTol)) {
                best = std::min(best, v);
                near.emplace_back(c, v);
            }
        }
    }

    EnumerationResult finish() const {
        std::vector<ExactDesign> ties;
        for (const auto& [c, v] : near) {
            if (v <= best * (1.0 + kTieTol)) ties.emplace_back(c);
        }
        ExactDesign first = ties.front();
        return EnumerationResult{std::move(first), best, std::move(ties), visited};
    }
};

void check_budget(int J, int P, const EnumerationBudget& budget) {
    budget.validate();
    if (J < 1) throw ValidationError("J must be >= 1 for enumeration");
    const std::uint64_t n = composition_count(J, P);
    if (n > budget.max_compositions) {
        throw BudgetExceededError("enumeration of " + std::to_string(n) + " compositions (J=" + std::to_string(J) +
                                  ", P=" + std::to_string(P) + ") exceeds the budget of " +
                                  std::to_string(budget.max_compositions) +
                                  "; use efficient rounding of the approximate design instead");
    }
}

// All compositions whose first coordinate equals `head`.
Candidates enumerate_partition(CompositionEvaluator& eval, int P, int J, int head) {
    Candidates out;
    std::vector<int> c(static_cast<std::size_t>(P), 0);
    c[0] = head;
    c[static_cast<std::size_t>(P - 1)] += J - head;
    do {
        out.offer(c, eval(c.data()));
    } while (next_composition(c, 1));
    return out;
}

}  // namespace

void EnumerationBudget::validate() const {
    if (max_compositions < 1) throw ValidationError("enumeration budget must be >= 1");
}

std::uint64_t composition_count(int J, int P) {
    if (J < 0 || P < 1) return 0;
    // res * (J + k) / k stays integral: C(J + k, k). Cancel the gcd first so
    // the product only overflows when the result does.
    std::uint64_t res = 1;
    for (int k = 1; k < P; ++k) {
        const auto kk = static_cast<std::uint64_t>(k);
        const std::uint64_t g = std::gcd(res, kk);
        const std::uint64_t factor = static_cast<std::uint64_t>(J + k) / (kk / g);
        if (__builtin_mul_overflow(res / g, factor, &res)) return std::numeric_limits<std::uint64_t>::max();
    }
    return res;
}

ExactDesign efficient_rounding(const ApproximateDesign& design, int J) {
    const int P = design.size();
    const int s = design.support_size();
    if (J < s) {
        throw ValidationError("efficient rounding needs J >= support size (J=" + std::to_string(J) +
                              ", support=" + std::to_string(s) + ")");
    }
    std::vector<int> n(static_cast<std::size_t>(P), 0);
    const double multiplier = J - 0.5 * s;
    int total = 0;
    for (int i = 0; i < P; ++i) {
        if (design[i] > 0.0) {
            const double x = multiplier * design[i];
            // Guard against x landing a few ulps above an integer.
            n[static_cast<std::size_t>(i)] = static_cast<int>(std::ceil(x - 1e-12 * std::max(1.0, x)));
            total += n[static_cast<std::size_t>(i)];
        }
    }
    while (total < J) {
        int pick = -1;
        double pick_q = std::numeric_limits<double>::infinity();
        for (int i = 0; i < P; ++i) {
            if (design[i] > 0.0) {
                const double q = n[static_cast<std::size_t>(i)] / design[i];
                if (q < pick_q) {
                    pick_q = q;
                    pick = i;
                }
            }
        }
        ++n[static_cast<std::size_t>(pick)];
        ++total;
    }
    while (total > J) {
        int pick = -1;
        double pick_q = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < P; ++i) {
            if (design[i] > 0.0 && n[static_cast<std::size_t>(i)] > 0) {
                const double q = (n[static_cast<std::size_t>(i)] - 1) / design[i];
                if (q > pick_q) {
                    pick_q = q;
                    pick = i;
                }
            }
        }
        --n[static_cast<std::size_t>(pick)];
        --total;
    }
    return ExactDesign(std::move(n));
}

double exact_criterion_value(const ExactDesign& design, const AdjustedCovariance& adj, const Criterion& crit) {
    return criterion_value(ApproximateDesign::from_exact(design), adj, crit);
}

EnumerationResult enumerate_optimal_serial(const AdjustedCovariance& adj, const Criterion& crit, int J,
                                           const EnumerationBudget& budget) {
    const int P = adj.size();
    check_budget(J, P, budget);
    CompositionEvaluator eval(adj, crit, J);
    Candidates all;
    std::vector<int> c(static_cast<std::size_t>(P), 0);
    c[static_cast<std::size_t>(P - 1)] = J;
    do {
        all.offer(c, eval(c.data()));
    } while (next_composition(c, 0));
    return all.finish();
}

EnumerationResult enumerate_optimal(const AdjustedCovariance& adj, const Criterion& crit, int J,
                                    const EnumerationBudget& budget) {
    const int P = adj.size();
    check_budget(J, P, budget);
    if (P == 1) return enumerate_optimal_serial(adj, crit, J, budget);

    std::vector<Candidates> parts(static_cast<std::size_t>(J + 1));
#pragma omp parallel
    {
        CompositionEvaluator eval(adj, crit, J);
#pragma omp for schedule(dynamic)
        for (int head = 0; head <= J; ++head) {
            parts[static_cast<std::size_t>(head)] = enumerate_partition(eval, P, J, head);
        }
    }
    Candidates all;
    for (const auto& part : parts) all.absorb(part);
    return all.finish();
}

}  // namespace mettrials
