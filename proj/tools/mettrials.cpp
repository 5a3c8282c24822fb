// mettrials: allocate trial locations to sub-regions.
//
//   mettrials optimize --config scenario.json [--criterion a|weighted-a]
//                      [--mode approx|exact|equal-eff] [--out PATH] [--format table|records]
//   mettrials validate --config scenario.json [--reps N] [--seed S]
//   mettrials tables --which 2|3|4|5 [--format table|records]
//
// Exit codes: 0 success, 2 config error, 3 numerical failure or
// non-convergence, 4 enumeration budget exceeded.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "mettrials/dataset.hpp"
#include "mettrials/error.hpp"
#include "mettrials/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitBudget = 4;

struct OutputOptions {
    std::string format = "table";
    std::string out;
    bool no_timing = false;
};

int emit(const mettrials::Report& report, const OutputOptions& opts, int decimals) {
    std::string text = opts.format == "records" ? mettrials::to_records(report).dump(2) + "\n"
                                                : mettrials::format_table(report, decimals);
    if (opts.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(opts.out);
        if (!file) {
            std::cerr << "error: cannot write " << opts.out << '\n';
            return kExitConfig;
        }
        file << text;
    }
    return mettrials::report_status(report);
}

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"table", "records"}));
    cmd->add_option("--out", opts.out, "Write the report to PATH instead of stdout");
    cmd->add_flag("--no-timing", opts.no_timing, "Report wallTimeMs as 0 (byte-stable output)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal allocation of multi-environment trial locations to sub-regions"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> criterion;
    std::optional<std::string> mode;
    OutputOptions out_opts;
    auto* optimize = app.add_subcommand("optimize", "Compute optimal designs for a scenario");
    optimize->add_option("--config", config, "Scenario JSON file")->required();
    optimize->add_option("--criterion", criterion, "Override the criterion")->check(CLI::IsMember({"a", "weighted-a"}));
    optimize->add_option("--mode", mode, "Override the mode")->check(CLI::IsMember({"approx", "exact", "equal-eff"}));
    add_output_flags(optimize, out_opts);

    std::optional<long long> reps;
    std::optional<long long> seed;
    auto* validate = app.add_subcommand("validate", "Check closed-form MSE against the BLUP oracle");
    validate->add_option("--config", config, "Scenario JSON file")->required();
    validate->add_option("--reps", reps, "Monte Carlo replications (0 skips simulation)")->check(CLI::NonNegativeNumber);
    validate->add_option("--seed", seed, "Monte Carlo seed");
    add_output_flags(validate, out_opts);

    int which = 2;
    auto* tables = app.add_subcommand("tables", "Reproduce the published maize allocation tables");
    tables->add_option("--which", which, "Table number")->required()->check(CLI::IsMember({2, 3, 4, 5}));
    add_output_flags(tables, out_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        mettrials::Scenario sc;
        int decimals = 2;
        if (*tables) {
            sc = mettrials::bundled_table_scenario(which);
            if (which == 5) decimals = 3;
        } else {
            auto doc = [&] {
                std::ifstream in(config);
                if (!in) throw mettrials::ConfigError("", "cannot open config file " + config);
                try {
                    return nlohmann::json::parse(in, nullptr, true, true);
                } catch (const nlohmann::json::parse_error& e) {
                    throw mettrials::ConfigError("", std::string("malformed JSON: ") + e.what());
                }
            }();
            if (*optimize) {
                if (criterion) doc["criterion"] = *criterion;
                if (criterion && *criterion == "a") doc.erase("loads");
                if (mode) doc["mode"] = *mode;
                if (doc.value("mode", "approx") == "validate") doc["mode"] = "approx";
            } else {
                doc["mode"] = "validate";
                if (reps) doc["validate"]["replications"] = *reps;
                if (seed) doc["validate"]["seed"] = *seed;
            }
            sc = mettrials::parse_config(doc, std::filesystem::path(config).parent_path());
            if (sc.mode == mettrials::Mode::EqualEfficiency) decimals = 3;
        }
        const auto report = mettrials::run_scenario(sc, {.record_timing = !out_opts.no_timing});
        return emit(report, out_opts, decimals);
    } catch (const mettrials::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mettrials::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mettrials::BudgetExceededError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const mettrials::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}
