#include "mettrials/scenario.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mettrials/dataset.hpp"
#include "mettrials/error.hpp"

namespace mettrials {

using nlohmann::json;

namespace {

constexpr double kOracleTol = 1e-8;
constexpr double kMonteCarloZ = 4.0;
constexpr double kMonteCarloFraction = 0.99;

std::string join(const std::string& path, const std::string& key) {
    return path + "/" + key;
}

std::string join(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

void expect_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
    }
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

long long get_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<long long>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_number_array(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], join(path, i)));
    return out;
}

Matrix read_csv_matrix(const std::filesystem::path& file, const std::string& path) {
    std::ifstream in(file);
    if (!in) throw ConfigError(path, "cannot open CSV file " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ConfigError(path, "non-numeric CSV cell '" + cell + "' in " + file.string());
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path, "empty CSV file " + file.string());
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ConfigError(path, "ragged CSV rows in " + file.string());
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Matrix parse_matrix(const json& v, const std::string& path, const std::filesystem::path& base_dir) {
    if (v.is_object()) {
        expect_keys(v, path, {"csv"});
        if (!v.contains("csv")) throw ConfigError(path, "expected an inline matrix or {\"csv\": path}");
        return read_csv_matrix(base_dir / get_string(v["csv"], join(path, "csv")), join(path, "csv"));
    }
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of rows");
    const std::size_t n = v.size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = get_number_array(v[i], join(path, i));
        if (row.size() != n) throw ConfigError(join(path, i), "matrix must be square");
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return m;
}

CovarianceStructure parse_structure(const std::string& s, const std::string& path) {
    if (s == "general") return CovarianceStructure::General;
    if (s == "factor-analytic") return CovarianceStructure::FactorAnalytic;
    if (s == "compound-symmetry") return CovarianceStructure::CompoundSymmetry;
    throw ConfigError(path, "unknown structure '" + s + "'");
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

CertificateRecord to_record(const DesignCertificate& cert) {
    return CertificateRecord{cert.lhs, to_std(cert.rhs), cert.max_violation};
}

std::string certificate_status(bool certified) {
    return certified ? "ok" : "not-certified";
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / b.norm();
}

ReportRow run_cell(const Scenario& sc, int J, double sigma2) {
    ReportRow row;
    row.J = J;
    row.sigma2 = sigma2;
    row.mode = sc.mode;
    const int P = sc.subregions();
    const GenotypeCovariance gc = sc.genotype_covariance();
    const VarianceComponents vc = sc.variance_components(sigma2);
    const ProblemDims dims{P, sc.K, J, sc.r};
    const AdjustedCovariance adj = adjusted_covariance(gc, vc, dims);
    auto& details = row.details;
    details["status"] = "ok";

    if (sc.mode == Mode::Validate) {
        const ExactDesign counts =
            sc.validate_counts ? *sc.validate_counts
                               : efficient_rounding(optimize(adj, sc.criterion, sc.solver).design, J);
        const auto design = ApproximateDesign::from_exact(counts);
        const auto cert = optimality_condition(design, adj, sc.criterion);
        row.weights = to_std(design.weights());
        row.counts = counts.counts();
        row.criterion_value = cert.criterion_value;
        row.certificate = to_record(cert);

        const Matrix closed = mse_genotype_effects(design, adj, gc, sigma2, sc.K);
        const ModelMatrices mm = assemble(counts, vc, gc, sc.K, sc.r);
        const Matrix dense = henderson_mse(mm);
        const Matrix structured = henderson_mse_structured(counts, vc, gc, sc.K, sc.r);
        const double dense_err = relative_frobenius(dense, closed);
        const double structured_err = relative_frobenius(structured, closed);
        const double contrast_err =
            relative_frobenius(contrast_mse(dense, P, 0, 1), mse_contrasts(design, adj, sigma2));
        const bool oracle_ok = dense_err <= kOracleTol && structured_err <= kOracleTol && contrast_err <= kOracleTol;
        details["hendersonRelError"] = dense_err;
        details["structuredRelError"] = structured_err;
        details["contrastRelError"] = contrast_err;
        details["oraclePassed"] = oracle_ok;
        bool passed = oracle_ok;
        if (sc.simulation.replications > 0) {
            const auto sim = simulate_empirical_mse(mm, vc, gc, sc.simulation);
            const double frac = fraction_within(sim, closed, kMonteCarloZ);
            details["mcReplications"] = sim.replications;
            details["mcSeed"] = sc.simulation.seed;
            details["mcFractionWithin4SE"] = frac;
            details["mcPassed"] = frac >= kMonteCarloFraction;
            passed = passed && frac >= kMonteCarloFraction;
        }
        details["validationPassed"] = passed;
        if (!passed) details["status"] = "validation-failed";
        return row;
    }

    if (sc.mode == Mode::EqualEfficiency) {
        EqualEfficiencyConfig cfg = sc.equal_efficiency;
        cfg.start_solver = sc.solver;
        const auto sol = solve_equal_efficiency(adj, cfg);
        const auto cert = optimality_condition(sol.design, adj, Criterion::standard_a());
        row.weights = to_std(sol.design.weights());
        row.criterion_value = cert.criterion_value;
        row.certificate = to_record(cert);
        row.solver_iterations = sol.iterations;
        details["residualNorm"] = sol.residual_norm;
        details["relativeResidual"] = sol.residual_norm / sol.g1;
        details["converged"] = sol.converged;
        if (sol.converged) {
            row.counts = exact_equal_efficiency(sol, J).counts();
        } else {
            details["status"] = "not-converged";
        }
        return row;
    }

    const auto opt = optimize(adj, sc.criterion, sc.solver);
    row.weights = to_std(opt.design.weights());
    row.criterion_value = opt.certificate.criterion_value;
    row.certificate = to_record(opt.certificate);
    row.solver_iterations = opt.iterations;
    details["certified"] = opt.certified;
    details["status"] = certificate_status(opt.certified);
    const ExactDesign rounded = efficient_rounding(opt.design, J);

    if (sc.mode == Mode::Approximate) {
        row.counts = rounded.counts();
        details["exactMethod"] = "rounding";
        return row;
    }

    // Exact mode.
    details["approximateCriterionValue"] = opt.certificate.criterion_value;
    details["roundedCounts"] = rounded.counts();
    details["roundedCriterionValue"] = exact_criterion_value(rounded, adj, sc.criterion);
    const std::uint64_t n = composition_count(J, P);
    details["compositions"] = n;
    if (n <= sc.budget.max_compositions) {
        const auto exact = enumerate_optimal(adj, sc.criterion, J, sc.budget);
        row.counts = exact.design.counts();
        row.criterion_value = exact.criterion_value;
        details["exactMethod"] = "enumeration";
        if (exact.ties.size() > 1) {
            json ties = json::array();
            for (const auto& t : exact.ties) ties.push_back(t.counts());
            details["ties"] = ties;
        }
    } else if (sc.fallback == BudgetFallback::Rounding) {
        row.counts = rounded.counts();
        row.criterion_value = details["roundedCriterionValue"].get<double>();
        details["exactMethod"] = "rounding";
        details["optimalityGapBound"] =
            (row.criterion_value - opt.certificate.criterion_value) / opt.certificate.criterion_value;
    } else {
        row.counts = rounded.counts();
        details["exactMethod"] = "none";
        details["status"] = "budget-exceeded";
        details["message"] = "composition count " + std::to_string(n) + " exceeds budget " +
                             std::to_string(sc.budget.max_compositions);
    }
    return row;
}

}  // namespace

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Approximate: return "approx";
        case Mode::Exact: return "exact";
        case Mode::EqualEfficiency: return "equal-eff";
        case Mode::Validate: return "validate";
    }
    return "approx";
}

Mode parse_mode(const std::string& s) {
    if (s == "approx") return Mode::Approximate;
    if (s == "exact") return Mode::Exact;
    if (s == "equal-eff") return Mode::EqualEfficiency;
    if (s == "validate") return Mode::Validate;
    throw ConfigError("/mode", "unknown mode '" + s + "' (approx, exact, equal-eff, validate)");
}

int Scenario::subregions() const {
    if (dataset != Dataset::Generic) return maize::kSubRegions;
    return covariance ? covariance->size() : 0;
}

GenotypeCovariance Scenario::genotype_covariance() const {
    switch (dataset) {
        case Dataset::MaizeFA: return maize::genotype_covariance(maize::Structure::FactorAnalytic);
        case Dataset::MaizeCS: return maize::genotype_covariance(maize::Structure::CompoundSymmetry);
        case Dataset::Generic: break;
    }
    if (!covariance) throw ConfigError("/genotype_covariance", "missing genotype covariance");
    return *covariance;
}

VarianceComponents Scenario::variance_components(double sigma2) const {
    if (dataset != Dataset::Generic) return maize::variance_components(sigma2);
    VarianceComponents vc{sigma2, v1, v2, v3};
    vc.validate();
    return vc;
}

void Scenario::validate() const {
    if (J_values.empty()) throw ConfigError("/sweep/J", "at least one J value is required");
    if (sigma2_values.empty()) throw ConfigError("/sweep/sigma2", "at least one sigma2 value is required");
    if (K < 2) throw ConfigError("/genotypes", "K must be >= 2");
    if (r < 1) throw ConfigError("/replicates", "r must be >= 1");
    const int P = subregions();
    if (P < 1) throw ConfigError("/genotype_covariance", "missing genotype covariance");
    if (criterion.is_weighted() && criterion.loads().size() != P) {
        throw ConfigError("/loads", "expected " + std::to_string(P) + " loads");
    }
    for (std::size_t i = 0; i < J_values.size(); ++i) {
        if (J_values[i] < 1) throw ConfigError(join("/sweep/J", i), "J must be >= 1");
    }
    for (std::size_t i = 0; i < sigma2_values.size(); ++i) {
        try {
            (void)variance_components(sigma2_values[i]);
        } catch (const ValidationError& e) {
            throw ConfigError(join("/sweep/sigma2", i), e.what());
        }
    }
    if (mode == Mode::EqualEfficiency && P < 2) {
        throw ConfigError("/mode", "equal-efficiency designs need at least two sub-regions");
    }
    if (validate_counts) {
        if (validate_counts->size() != P) throw ConfigError("/validate/counts", "expected P counts");
        for (std::size_t i = 0; i < J_values.size(); ++i) {
            if (J_values[i] != validate_counts->total()) {
                throw ConfigError(join("/sweep/J", i), "J must equal the sum of /validate/counts");
            }
        }
    }
    try {
        solver.validate();
        budget.validate();
    } catch (const ValidationError& e) {
        throw ConfigError("/solver", e.what());
    }
}

Scenario bundled_table_scenario(int which) {
    Scenario sc;
    sc.J_values.assign(maize::kTableJ.begin(), maize::kTableJ.end());
    sc.sigma2_values.assign(maize::kTableSigma2.begin(), maize::kTableSigma2.end());
    sc.mode = Mode::Exact;
    switch (which) {
        case 2:
            sc.dataset = Dataset::MaizeFA;
            break;
        case 3:
            sc.dataset = Dataset::MaizeFA;
            sc.criterion = Criterion::weighted_a(SubRegionLoads(maize::areas()));
            break;
        case 4:
            sc.dataset = Dataset::MaizeCS;
            sc.criterion = Criterion::weighted_a(SubRegionLoads(maize::areas()));
            break;
        case 5:
            sc.dataset = Dataset::MaizeFA;
            sc.mode = Mode::EqualEfficiency;
            break;
        default:
            throw ConfigError("--which", "bundled tables are 2, 3, 4 and 5");
    }
    return sc;
}

Scenario parse_config(const json& doc, const std::filesystem::path& base_dir) {
    expect_keys(doc, "",
                {"dataset", "genotype_covariance", "structure", "variance", "genotypes", "replicates", "criterion",
                 "loads", "mode", "sweep", "solver", "enumeration", "equal_efficiency", "validate"});
    Scenario sc;

    if (doc.contains("dataset")) {
        const auto name = get_string(doc["dataset"], "/dataset");
        if (name == "maize-fa") {
            sc.dataset = Dataset::MaizeFA;
        } else if (name == "maize-cs") {
            sc.dataset = Dataset::MaizeCS;
        } else {
            throw ConfigError("/dataset", "unknown dataset '" + name + "' (maize-fa, maize-cs)");
        }
        for (const char* key : {"genotype_covariance", "structure", "variance"}) {
            if (doc.contains(key)) throw ConfigError(std::string("/") + key, "not allowed with a bundled dataset");
        }
    } else {
        if (!doc.contains("genotype_covariance")) throw ConfigError("/genotype_covariance", "required field missing");
        const json& gcj = doc["genotype_covariance"];
        try {
            if (gcj.is_object() && gcj.contains("compound_symmetry")) {
                expect_keys(gcj, "/genotype_covariance", {"compound_symmetry"});
                const json& cs = gcj["compound_symmetry"];
                const std::string p = "/genotype_covariance/compound_symmetry";
                expect_keys(cs, p, {"P", "a", "b"});
                for (const char* key : {"P", "a", "b"}) {
                    if (!cs.contains(key)) throw ConfigError(join(p, key), "required field missing");
                }
                sc.covariance = GenotypeCovariance::compound_symmetry(
                    static_cast<int>(get_integer(cs["P"], join(p, "P"))), get_number(cs["a"], join(p, "a")),
                    get_number(cs["b"], join(p, "b")));
            } else {
                const auto structure = doc.contains("structure")
                                           ? parse_structure(get_string(doc["structure"], "/structure"), "/structure")
                                           : CovarianceStructure::General;
                sc.covariance = GenotypeCovariance(parse_matrix(gcj, "/genotype_covariance", base_dir), structure);
            }
        } catch (const ValidationError& e) {
            throw ConfigError("/genotype_covariance", e.what());
        }
        if (!doc.contains("variance")) throw ConfigError("/variance", "required field missing");
        const json& var = doc["variance"];
        expect_keys(var, "/variance", {"v1", "v2", "v3"});
        if (!var.contains("v2")) throw ConfigError("/variance/v2", "required field missing");
        sc.v2 = get_number(var["v2"], "/variance/v2");
        if (var.contains("v1")) sc.v1 = get_number(var["v1"], "/variance/v1");
        if (var.contains("v3")) sc.v3 = get_number(var["v3"], "/variance/v3");
        for (const auto& [name, value] : {std::pair{"v1", sc.v1}, {"v2", sc.v2}, {"v3", sc.v3}}) {
            if (!(value >= 0.0)) throw ConfigError(std::string("/variance/") + name, "must be non-negative");
        }
    }

    if (doc.contains("genotypes")) sc.K = static_cast<int>(get_integer(doc["genotypes"], "/genotypes"));
    if (doc.contains("replicates")) sc.r = static_cast<int>(get_integer(doc["replicates"], "/replicates"));

    const std::string crit = doc.contains("criterion") ? get_string(doc["criterion"], "/criterion") : "a";
    if (crit == "weighted-a") {
        if (!doc.contains("loads")) throw ConfigError("/loads", "weighted-a criterion needs loads");
        const json& lj = doc["loads"];
        Vector loads;
        if (lj.is_string()) {
            if (lj.get<std::string>() != "areas" || sc.dataset == Dataset::Generic) {
                throw ConfigError("/loads", "only \"areas\" of a bundled dataset can be named");
            }
            loads = maize::areas();
        } else if (lj.is_object()) {
            const Matrix m = parse_matrix(lj, "/loads", base_dir);
            loads = Eigen::Map<const Vector>(m.data(), m.size());
        } else {
            loads = to_vector(get_number_array(lj, "/loads"));
        }
        try {
            sc.criterion = Criterion::weighted_a(SubRegionLoads(loads));
        } catch (const ValidationError& e) {
            throw ConfigError("/loads", e.what());
        }
    } else if (crit == "a") {
        if (doc.contains("loads")) throw ConfigError("/loads", "loads are only used by the weighted-a criterion");
    } else {
        throw ConfigError("/criterion", "unknown criterion '" + crit + "' (a, weighted-a)");
    }

    if (doc.contains("mode")) sc.mode = parse_mode(get_string(doc["mode"], "/mode"));

    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        expect_keys(sw, "/sweep", {"J", "sigma2"});
        if (sw.contains("J")) {
            if (!sw["J"].is_array() || sw["J"].empty()) throw ConfigError("/sweep/J", "expected a non-empty array");
            for (std::size_t i = 0; i < sw["J"].size(); ++i) {
                sc.J_values.push_back(static_cast<int>(get_integer(sw["J"][i], join("/sweep/J", i))));
            }
        }
        if (sw.contains("sigma2")) sc.sigma2_values = get_number_array(sw["sigma2"], "/sweep/sigma2");
    }

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        expect_keys(s, "/solver", {"max_iterations", "convergence_tol", "restarts", "step_rule", "seed"});
        if (s.contains("max_iterations")) {
            sc.solver.max_iterations = static_cast<int>(get_integer(s["max_iterations"], "/solver/max_iterations"));
        }
        if (s.contains("convergence_tol")) {
            sc.solver.convergence_tol = get_number(s["convergence_tol"], "/solver/convergence_tol");
        }
        if (s.contains("restarts")) sc.solver.restarts = static_cast<int>(get_integer(s["restarts"], "/solver/restarts"));
        if (s.contains("seed")) sc.solver.seed = static_cast<std::uint64_t>(get_integer(s["seed"], "/solver/seed"));
        if (s.contains("step_rule")) {
            const auto rule = get_string(s["step_rule"], "/solver/step_rule");
            if (rule == "multiplicative") {
                sc.solver.step_rule = StepRule::Multiplicative;
            } else if (rule == "vertex-exchange") {
                sc.solver.step_rule = StepRule::VertexExchange;
            } else {
                throw ConfigError("/solver/step_rule", "unknown step rule '" + rule + "'");
            }
        }
    }

    if (doc.contains("enumeration")) {
        const json& e = doc["enumeration"];
        expect_keys(e, "/enumeration", {"max_compositions", "fallback"});
        if (e.contains("max_compositions")) {
            const auto n = get_integer(e["max_compositions"], "/enumeration/max_compositions");
            if (n < 1) throw ConfigError("/enumeration/max_compositions", "must be >= 1");
            sc.budget.max_compositions = static_cast<std::uint64_t>(n);
        }
        if (e.contains("fallback")) {
            const auto f = get_string(e["fallback"], "/enumeration/fallback");
            if (f == "rounding") {
                sc.fallback = BudgetFallback::Rounding;
            } else if (f == "error") {
                sc.fallback = BudgetFallback::Error;
            } else {
                throw ConfigError("/enumeration/fallback", "expected \"rounding\" or \"error\"");
            }
        }
    }

    if (doc.contains("equal_efficiency")) {
        const json& e = doc["equal_efficiency"];
        expect_keys(e, "/equal_efficiency", {"max_iterations", "tol", "fd_step"});
        if (e.contains("max_iterations")) {
            sc.equal_efficiency.max_iterations =
                static_cast<int>(get_integer(e["max_iterations"], "/equal_efficiency/max_iterations"));
        }
        if (e.contains("tol")) sc.equal_efficiency.tol = get_number(e["tol"], "/equal_efficiency/tol");
        if (e.contains("fd_step")) sc.equal_efficiency.fd_step = get_number(e["fd_step"], "/equal_efficiency/fd_step");
    }

    if (doc.contains("validate")) {
        const json& v = doc["validate"];
        expect_keys(v, "/validate", {"counts", "replications", "seed", "fixed_means"});
        if (v.contains("counts")) {
            const json& c = v["counts"];
            if (!c.is_array() || c.empty()) throw ConfigError("/validate/counts", "expected a non-empty array");
            std::vector<int> counts;
            for (std::size_t i = 0; i < c.size(); ++i) {
                counts.push_back(static_cast<int>(get_integer(c[i], join("/validate/counts", i))));
            }
            try {
                sc.validate_counts = ExactDesign(counts);
            } catch (const ValidationError& e) {
                throw ConfigError("/validate/counts", e.what());
            }
            if (sc.J_values.empty()) sc.J_values.push_back(sc.validate_counts->total());
        }
        if (v.contains("replications")) {
            const auto n = get_integer(v["replications"], "/validate/replications");
            if (n < 0) throw ConfigError("/validate/replications", "must be >= 0");
            sc.simulation.replications = static_cast<std::uint64_t>(n);
        }
        if (v.contains("seed")) sc.simulation.seed = static_cast<std::uint64_t>(get_integer(v["seed"], "/validate/seed"));
        if (v.contains("fixed_means")) sc.simulation.fixed_means = to_vector(get_number_array(v["fixed_means"], "/validate/fixed_means"));
    }

    sc.validate();
    return sc;
}

Scenario load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON in ") + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

Report run_scenario(const Scenario& sc, const RunOptions& opts) {
    sc.validate();
    struct Cell {
        int J;
        double sigma2;
    };
    std::vector<Cell> cells;
    for (int J : sc.J_values) {
        for (double s2 : sc.sigma2_values) cells.push_back({J, s2});
    }
    Report report;
    report.rows.resize(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    const int n = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n; ++c) {
        const auto idx = static_cast<std::size_t>(c);
        const auto start = std::chrono::steady_clock::now();
        try {
            report.rows[idx] = run_cell(sc, cells[idx].J, cells[idx].sigma2);
        } catch (const NumericalError& e) {
            ReportRow row;
            row.J = cells[idx].J;
            row.sigma2 = cells[idx].sigma2;
            row.mode = sc.mode;
            row.details["status"] = "numerical-error";
            row.details["message"] = e.what();
            report.rows[idx] = std::move(row);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        report.rows[idx].wall_time_ms = opts.record_timing ? elapsed.count() : 0.0;
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return report;
}

json to_records(const Report& report) {
    json out = json::array();
    for (const auto& row : report.rows) {
        json rec;
        rec["J"] = row.J;
        rec["sigma2"] = row.sigma2;
        rec["mode"] = to_string(row.mode);
        rec["weights"] = row.weights;
        rec["counts"] = row.counts;
        rec["criterionValue"] = row.criterion_value;
        rec["certificate"] = {{"lhs", row.certificate.lhs},
                              {"rhs", row.certificate.rhs},
                              {"maxViolation", row.certificate.max_violation}};
        rec["solverIterations"] = row.solver_iterations;
        rec["wallTimeMs"] = row.wall_time_ms;
        rec["details"] = row.details;
        out.push_back(std::move(rec));
    }
    return out;
}

Report parse_records(const json& records) {
    if (!records.is_array()) throw ConfigError("", "report records must be an array");
    Report report;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const json& rec = records[i];
        const std::string path = join("", i);
        try {
            ReportRow row;
            row.J = rec.at("J").get<int>();
            row.sigma2 = rec.at("sigma2").get<double>();
            row.mode = parse_mode(rec.at("mode").get<std::string>());
            row.weights = rec.at("weights").get<std::vector<double>>();
            row.counts = rec.at("counts").get<std::vector<int>>();
            row.criterion_value = rec.at("criterionValue").get<double>();
            const json& cert = rec.at("certificate");
            row.certificate.lhs = cert.at("lhs").get<double>();
            row.certificate.rhs = cert.at("rhs").get<std::vector<double>>();
            row.certificate.max_violation = cert.at("maxViolation").get<double>();
            row.solver_iterations = rec.at("solverIterations").get<int>();
            row.wall_time_ms = rec.at("wallTimeMs").get<double>();
            if (rec.contains("details")) row.details = rec["details"];
            report.rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw ConfigError(path, e.what());
        }
    }
    return report;
}

std::string format_table(const Report& report, int decimals) {
    std::ostringstream out;
    std::size_t P = 0;
    for (const auto& row : report.rows) P = std::max({P, row.weights.size(), row.counts.size()});
    const int wcol = decimals + 4;

    out << std::setw(5) << "J" << std::setw(9) << "sigma2" << " |";
    for (std::size_t i = 0; i < P; ++i) out << std::setw(wcol) << ("w" + std::to_string(i + 1));
    out << " |";
    for (std::size_t i = 0; i < P; ++i) out << std::setw(5) << ("J" + std::to_string(i + 1));
    out << " | " << std::setw(13) << "criterion" << "  status\n";
    const std::size_t width = 16 + P * static_cast<std::size_t>(wcol) + 2 + P * 5 + 26;
    out << std::string(width, '-') << '\n';

    out << std::fixed;
    for (const auto& row : report.rows) {
        out << std::setw(5) << row.J << std::setw(9) << std::setprecision(0) << row.sigma2 << " |";
        for (std::size_t i = 0; i < P; ++i) {
            if (i < row.weights.size()) {
                out << std::setw(wcol) << std::setprecision(decimals) << row.weights[i];
            } else {
                out << std::setw(wcol) << "-";
            }
        }
        out << " |";
        for (std::size_t i = 0; i < P; ++i) {
            if (i < row.counts.size()) {
                out << std::setw(5) << row.counts[i];
            } else {
                out << std::setw(5) << "-";
            }
        }
        out << " | " << std::setw(13) << std::setprecision(8) << row.criterion_value << "  "
            << row.details.value("status", "ok");
        if (row.details.contains("ties")) out << " (" << row.details["ties"].size() << " tied optima)";
        out << '\n';
    }
    return out.str();
}

int report_status(const Report& report) {
    int code = 0;
    for (const auto& row : report.rows) {
        const std::string status = row.details.value("status", "ok");
        if (status == "budget-exceeded") {
            code = 4;
        } else if (status != "ok" && code == 0) {
            code = 3;
        }
    }
    return code;
}

}  // namespace mettrials
