#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mettrials/approx_optimizer.hpp"
#include "mettrials/blup_oracle.hpp"
#include "mettrials/equal_efficiency.hpp"
#include "mettrials/exact_designs.hpp"

namespace mettrials {

enum class Mode { Approximate, Exact, EqualEfficiency, Validate };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

enum class Dataset { Generic, MaizeFA, MaizeCS };

enum class BudgetFallback { Rounding, Error };

/// A J x sigma^2 sweep over one covariance model and criterion.
///
/// Generic scenarios carry sigma^2 D (data units) and v1..v3 directly, so
/// D = sigma2D / sigma^2 shifts as sigma^2 is swept. Maize scenarios derive
/// v1..v3 from sigma^2 through the bundled totals.
struct Scenario {
    Dataset dataset = Dataset::Generic;
    int K = 2;
    int r = 2;
    std::optional<GenotypeCovariance> covariance;  // generic only
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;          // generic only
    Criterion criterion = Criterion::standard_a();
    Mode mode = Mode::Approximate;
    std::vector<int> J_values;
    std::vector<double> sigma2_values;

    SolverConfig solver;
    EnumerationBudget budget;
    BudgetFallback fallback = BudgetFallback::Rounding;
    EqualEfficiencyConfig equal_efficiency;
    SimulationConfig simulation{0, 1, {}};  // replications 0: skip Monte Carlo
    std::optional<ExactDesign> validate_counts;

    int subregions() const;
    GenotypeCovariance genotype_covariance() const;
    VarianceComponents variance_components(double sigma2) const;

    /// Checks every grid cell can be built; throws ConfigError.
    void validate() const;
};

/// Bundled scenario reproducing published table 2, 3, 4 or 5.
Scenario bundled_table_scenario(int which);

/// Parses a JSON scenario. `base_dir` resolves relative CSV references.
Scenario parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
Scenario load_config(const std::filesystem::path& path);

struct CertificateRecord {
    double lhs = 0.0;
    std::vector<double> rhs;
    double max_violation = 0.0;
};

/// One grid cell. In exact mode `criterion_value` belongs to the exact design
/// and the certificate to the approximate optimum.
struct ReportRow {
    int J = 0;
    double sigma2 = 0.0;
    Mode mode = Mode::Approximate;
    std::vector<double> weights;
    std::vector<int> counts;
    double criterion_value = 0.0;
    CertificateRecord certificate;
    int solver_iterations = 0;
    double wall_time_ms = 0.0;
    nlohmann::json details = nlohmann::json::object();
};

struct Report {
    std::vector<ReportRow> rows;
};

struct RunOptions {
    bool record_timing = true;
};

/// Runs every (J, sigma^2) cell; cells run concurrently and are reported in
/// sweep order (J outer, sigma^2 inner).
Report run_scenario(const Scenario& sc, const RunOptions& opts = {});

nlohmann::json to_records(const Report& report);
Report parse_records(const nlohmann::json& records);

/// Aligned plain-text table; weights printed with `decimals` digits.
std::string format_table(const Report& report, int decimals = 2);

/// Worst per-cell status for exit-code purposes: 0 ok, 3 numerical,
/// 4 budget exceeded.
int report_status(const Report& report);

}  // namespace mettrials
