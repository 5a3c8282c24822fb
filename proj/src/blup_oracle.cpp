#include "mettrials/blup_oracle.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mettrials/error.hpp"

namespace mettrials {

namespace {

constexpr std::uint64_t kChunk = 256;

std::vector<int> location_subregions(const std::vector<int>& counts) {
    std::vector<int> sub;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        sub.insert(sub.end(), static_cast<std::size_t>(counts[i]), static_cast<int>(i));
    }
    return sub;
}

// Henderson's formula given the three cross-products.
Matrix henderson_from_products(const Matrix& ztwz, const Matrix& ztwx, const Matrix& xtwx, const Matrix& g_inv) {
    const Matrix q_pinv = linalg::symmetric_pinv(xtwx);
    Matrix c = ztwz + g_inv - ztwx * q_pinv * ztwx.transpose();
    linalg::symmetrize(c);
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Henderson coefficient matrix is not positive definite");
    }
    Matrix out = llt.solve(Matrix::Identity(c.rows(), c.cols()));
    linalg::symmetrize(out);
    return out;
}

Matrix location_block(const VarianceComponents& vc, int K, int r) {
    const Matrix ones_k = Matrix::Ones(K, K);
    const Matrix ones_r = Matrix::Ones(r, r);
    Matrix block = linalg::kron(vc.v1 * ones_k + vc.v2 * Matrix::Identity(K, K), ones_r) +
                   vc.v3 * linalg::kron(ones_k, Matrix::Identity(r, r)) + Matrix::Identity(K * r, K * r);
    return vc.sigma2 * block;
}

// alpha^ = T Y.
Matrix blup_operator(const ModelMatrices& mm) {
    Eigen::LLT<Matrix> r_llt(mm.R);
    if (r_llt.info() != Eigen::Success) throw NumericalError("residual covariance R is not positive definite");
    const Matrix wx = r_llt.solve(mm.X);
    const Matrix wz = r_llt.solve(mm.Z);
    const Matrix xtwx = mm.X.transpose() * wx;
    const Matrix ztwx = mm.Z.transpose() * wx;
    const Matrix ztwz = mm.Z.transpose() * wz;
    const Matrix g_inv = linalg::spd_inverse(mm.G);
    const Matrix q_pinv = linalg::symmetric_pinv(xtwx);
    Matrix c = ztwz + g_inv - ztwx * q_pinv * ztwx.transpose();
    linalg::symmetrize(c);
    const Matrix rhs = wz.transpose() - ztwx * q_pinv * wx.transpose();
    return c.llt().solve(rhs);
}

struct ChunkSums {
    Matrix s1;
    Matrix s2;
    Matrix sa;
};

struct Sampler {
    const ModelMatrices& mm;
    const Matrix& operator_t;
    Matrix chol_d;  // lower Cholesky factor of sigma^2 D
    Vector mu;
    std::vector<int> sub;
    double sd_lambda, sd_gamma, sd_b, sd_eps;
    int P, K, r, J;

    ChunkSums run_chunk(std::uint64_t seed, std::uint64_t begin, std::uint64_t end) const {
        const int pk = P * K;
        ChunkSums out{Matrix::Zero(pk, pk), Matrix::Zero(pk, pk), Matrix::Zero(pk, pk)};
        const int n = r * J * K;
        Vector y(n);
        Vector alpha(pk);
        Vector z(P);
        Vector lambda(J);
        Vector gamma(J * K);
        Vector b(r * J);
        for (std::uint64_t rep = begin; rep < end; ++rep) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (int k = 0; k < K; ++k) {
                for (int i = 0; i < P; ++i) z(i) = normal(rng);
                alpha.segment(k * P, P) = chol_d * z;
            }
            for (int j = 0; j < J; ++j) lambda(j) = sd_lambda * normal(rng);
            for (int q = 0; q < J * K; ++q) gamma(q) = sd_gamma * normal(rng);
            for (int q = 0; q < r * J; ++q) b(q) = sd_b * normal(rng);
            for (int k = 0; k < K; ++k) {
                for (int j = 0; j < J; ++j) {
                    const int i = sub[static_cast<std::size_t>(j)];
                    for (int l = 0; l < r; ++l) {
                        const int idx = k * r * J + j * r + l;
                        y(idx) = mu(i) + alpha(k * P + i) + lambda(j) + gamma(k * J + j) + b(j * r + l) +
                                 sd_eps * normal(rng);
                    }
                }
            }
            const Vector err = operator_t * y - alpha;
            const Matrix outer = err * err.transpose();
            out.s1 += outer;
            out.s2 += outer.cwiseProduct(outer);
            out.sa += alpha * alpha.transpose();
        }
        return out;
    }
};

SimulationResult simulate(const ModelMatrices& mm, const VarianceComponents& vc, const GenotypeCovariance& gc,
                          const SimulationConfig& cfg, bool parallel) {
    const int P = static_cast<int>(mm.counts.size());
    cfg.validate(P);
    vc.validate();
    const Matrix t = blup_operator(mm);
    Eigen::LLT<Matrix> d_llt(gc.sigma2D());
    const int J = static_cast<int>(mm.H.cols());
    Sampler sampler{mm,
                    t,
                    d_llt.matrixL(),
                    cfg.fixed_means.size() == 0 ? Vector::Zero(P) : cfg.fixed_means,
                    location_subregions(mm.counts),
                    std::sqrt(vc.sigma2 * vc.v1),
                    std::sqrt(vc.sigma2 * vc.v2),
                    std::sqrt(vc.sigma2 * vc.v3),
                    std::sqrt(vc.sigma2),
                    P,
                    mm.K,
                    mm.r,
                    J};

    const std::uint64_t n = cfg.replications;
    const auto chunks = static_cast<long long>((n + kChunk - 1) / kChunk);
    std::vector<ChunkSums> parts(static_cast<std::size_t>(chunks));
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long c = 0; c < chunks; ++c) {
            const auto begin = static_cast<std::uint64_t>(c) * kChunk;
            parts[static_cast<std::size_t>(c)] = sampler.run_chunk(cfg.seed, begin, std::min(n, begin + kChunk));
        }
    } else {
        for (long long c = 0; c < chunks; ++c) {
            const auto begin = static_cast<std::uint64_t>(c) * kChunk;
            parts[static_cast<std::size_t>(c)] = sampler.run_chunk(cfg.seed, begin, std::min(n, begin + kChunk));
        }
    }

    const int pk = P * mm.K;
    Matrix s1 = Matrix::Zero(pk, pk);
    Matrix s2 = Matrix::Zero(pk, pk);
    Matrix sa = Matrix::Zero(pk, pk);
    for (const auto& part : parts) {
        s1 += part.s1;
        s2 += part.s2;
        sa += part.sa;
    }
    const auto nd = static_cast<double>(n);
    SimulationResult res;
    res.replications = n;
    res.empirical_mse = s1 / nd;
    res.alpha_covariance = sa / nd;
    const Matrix var = (s2 / nd - res.empirical_mse.cwiseProduct(res.empirical_mse)).cwiseMax(0.0);
    const double bessel = n > 1 ? nd / (nd - 1.0) : 1.0;
    res.standard_errors = (var * bessel / nd).cwiseSqrt();
    return res;
}

}  // namespace

ModelMatrices assemble(const ExactDesign& exact, const VarianceComponents& vc, const GenotypeCovariance& gc, int K,
                       int r) {
    vc.validate();
    if (K < 1) throw ValidationError("K must be >= 1");
    if (r < 1) throw ValidationError("r must be >= 1");
    const int P = exact.size();
    if (gc.size() != P) throw ValidationError("genotype covariance size does not match the design");
    const int J = exact.total();
    const long rows = static_cast<long>(r) * J * K;
    if (rows > kMaxOracleRows) {
        throw ValidationError("oracle model would have " + std::to_string(rows) + " rows (limit " +
                              std::to_string(kMaxOracleRows) + ")");
    }

    ModelMatrices mm;
    mm.counts = exact.counts();
    mm.K = K;
    mm.r = r;
    const auto sub = location_subregions(exact.counts());
    mm.F = Matrix::Zero(r * J, P);
    for (int j = 0; j < J; ++j) {
        for (int l = 0; l < r; ++l) mm.F(j * r + l, sub[static_cast<std::size_t>(j)]) = 1.0;
    }
    mm.H = linalg::kron(Matrix::Identity(J, J), Matrix::Ones(r, 1));
    mm.X = linalg::kron(Matrix::Ones(K, 1), mm.F);
    mm.Z = linalg::kron(Matrix::Identity(K, K), mm.F);
    mm.G = linalg::kron(Matrix::Identity(K, K), gc.sigma2D());

    const Matrix ones_k = Matrix::Ones(K, K);
    mm.R = vc.sigma2 *
           (linalg::kron(linalg::kron(vc.v1 * ones_k + vc.v2 * Matrix::Identity(K, K), Matrix::Identity(J, J)),
                         Matrix::Ones(r, r)) +
            vc.v3 * linalg::kron(ones_k, Matrix::Identity(r * J, r * J)) + Matrix::Identity(rows, rows));
    return mm;
}

Matrix henderson_mse(const ModelMatrices& mm) {
    Eigen::LLT<Matrix> r_llt(mm.R);
    if (r_llt.info() != Eigen::Success) throw NumericalError("residual covariance R is not positive definite");
    const Matrix wx = r_llt.solve(mm.X);
    const Matrix wz = r_llt.solve(mm.Z);
    return henderson_from_products(mm.Z.transpose() * wz, mm.Z.transpose() * wx, mm.X.transpose() * wx,
                                   linalg::spd_inverse(mm.G));
}

Matrix henderson_mse_structured(const ExactDesign& exact, const VarianceComponents& vc, const GenotypeCovariance& gc,
                                int K, int r) {
    vc.validate();
    const int P = exact.size();
    if (gc.size() != P) throw ValidationError("genotype covariance size does not match the design");
    const Matrix w = linalg::spd_inverse(location_block(vc, K, r));
    const Matrix e = linalg::kron(Matrix::Identity(K, K), Matrix::Ones(r, 1));
    const Vector u = Vector::Ones(K * r);
    const Matrix s = e.transpose() * w * e;
    const Vector t = e.transpose() * w * u;
    const double q = u.dot(w * u);

    const int pk = P * K;
    Matrix ztwz = Matrix::Zero(pk, pk);
    Matrix ztwx = Matrix::Zero(pk, P);
    Matrix xtwx = Matrix::Zero(P, P);
    for (int i = 0; i < P; ++i) {
        const double ji = exact[i];
        for (int k = 0; k < K; ++k) {
            for (int kk = 0; kk < K; ++kk) ztwz(k * P + i, kk * P + i) = ji * s(k, kk);
            ztwx(k * P + i, i) = ji * t(k);
        }
        xtwx(i, i) = ji * q;
    }
    const Matrix g_inv = linalg::kron(Matrix::Identity(K, K), linalg::spd_inverse(gc.sigma2D()));
    return henderson_from_products(ztwz, ztwx, xtwx, g_inv);
}

Matrix contrast_mse(const Matrix& mse_alpha, int P, int k, int k_prime) {
    const auto K = static_cast<int>(mse_alpha.rows() / P);
    if (k < 0 || k >= K || k_prime < 0 || k_prime >= K || k == k_prime) {
        throw ValidationError("invalid genotype pair for contrast");
    }
    Vector diff = Vector::Zero(K);
    diff(k) = 1.0;
    diff(k_prime) = -1.0;
    const Matrix l = linalg::kron(diff.transpose(), Matrix::Identity(P, P));
    return l * mse_alpha * l.transpose();
}

void SimulationConfig::validate(int P) const {
    if (replications < 1) throw ValidationError("replications must be >= 1");
    if (fixed_means.size() != 0 && fixed_means.size() != P) {
        throw ValidationError("fixed_means must have length P");
    }
}

SimulationResult simulate_empirical_mse(const ModelMatrices& mm, const VarianceComponents& vc,
                                        const GenotypeCovariance& gc, const SimulationConfig& cfg) {
    return simulate(mm, vc, gc, cfg, true);
}

SimulationResult simulate_empirical_mse_serial(const ModelMatrices& mm, const VarianceComponents& vc,
                                               const GenotypeCovariance& gc, const SimulationConfig& cfg) {
    return simulate(mm, vc, gc, cfg, false);
}

double fraction_within(const SimulationResult& sim, const Matrix& analytic, double z) {
    const Eigen::Index n = analytic.size();
    Eigen::Index ok = 0;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            const double diff = std::abs(sim.empirical_mse(i, j) - analytic(i, j));
            const double se = sim.standard_errors(i, j);
            if (se > 0.0 ? diff <= z * se : diff <= 1e-12 * std::abs(analytic(i, j))) ++ok;
        }
    }
    return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace mettrials
