// Command-line front end: run one configuration, analyze a run table,
// sweep a grid of configurations, or regenerate the aligned-text tables
// from a sweep summary.
//
// Exit codes: 0 success, 2 validation error, 3 data error, 4 internal error.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "casc/experiment.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool paper_grid = false;
    long long grid_solutions = 1000;
    casc::AnalysisOptions analysis;
};

void add_analysis_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--alpha-screen", opt.analysis.alpha_screen,
                    "screening keep threshold (AD p < alpha)")
        ->capture_default_str();
    cmd->add_option("--alpha-model", opt.analysis.alpha_model,
                    "backward-elimination retention threshold")
        ->capture_default_str();
    cmd->add_option("--bootstrap", opt.analysis.n_bootstrap,
                    "bootstrap resamples of the preferred model")
        ->capture_default_str();
    cmd->add_option("--span", opt.analysis.loess_span, "LOESS window fraction")
        ->capture_default_str();
    cmd->add_flag("--drop-missing", opt.analysis.drop_missing,
                  "exclude rows whose features carry imputation flags");
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_run(const CommonOptions& opt) {
    casc::ExperimentConfig cfg = casc::load_config(opt.config_path);
    if (opt.seed) cfg.master_seed = *opt.seed;
    const casc::RunTable table = casc::run_experiment(cfg, opt.threads);
    casc::write_table_csv(table, opt.out_path);
    const std::vector<double> pis = table.pis();
    const double max_pi = *std::max_element(pis.begin(), pis.end());
    std::printf("rows=%lld median_pi=%.6g max_pi=%.6g\n", table.n_rows(), median_of(pis),
                max_pi);
    return 0;
}

int cmd_analyze(const CommonOptions& opt) {
    const casc::RunTable table = casc::read_table_csv(opt.config_path);
    const std::uint64_t seed = opt.seed.value_or(42);
    const casc::AnalysisReport rep = casc::analyze_table(table, opt.analysis, seed);
    {
        std::ofstream out(opt.out_path);
        if (!out) throw casc::DataError("cannot open for writing: " + opt.out_path);
        out << casc::report_to_json(rep).dump(2) << '\n';
        if (!out) throw casc::DataError("write failed: " + opt.out_path);
    }
    std::string vars;
    for (const auto& v : rep.full.elimination.model.variables) {
        if (!vars.empty()) vars += ',';
        vars += v;
    }
    if (vars.empty()) vars = "(intercept only)";
    std::printf("preferred=%s r2_full=%.6g r2_reduced=%.6g\n", vars.c_str(),
                rep.full.model.r2, rep.reduced.model.r2);
    return 0;
}

int cmd_sweep(const CommonOptions& opt) {
    std::vector<casc::ExperimentConfig> grid;
    if (opt.paper_grid) {
        grid = casc::default_grid(opt.seed.value_or(42), opt.grid_solutions);
        for (auto& cfg : grid) {
            casc::AnalysisOptions merged = opt.analysis;
            merged.n_agents = cfg.network.n_agents;
            cfg.analysis = merged;
        }
    } else {
        if (opt.config_path.empty())
            throw casc::ValidationError("sweep needs --config <grid.json> or --paper-grid");
        grid = casc::load_grid(opt.config_path);
        if (opt.seed)
            for (std::size_t i = 0; i < grid.size(); ++i)
                grid[i].master_seed = casc::derive_seed(*opt.seed, i);
    }

    const casc::SweepResult sweep = casc::run_sweep(grid, opt.out_path, opt.threads);
    int n_ok = 0;
    for (const auto& o : sweep.outcomes) {
        if (o.ok) {
            ++n_ok;
        } else {
            std::fprintf(stderr, "config %s failed: %s\n", o.config.label.c_str(),
                         o.error.c_str());
        }
    }
    std::printf("configs=%zu succeeded=%d out=%s\n", sweep.outcomes.size(), n_ok,
                opt.out_path.c_str());
    return 0;
}

int cmd_report(const CommonOptions& opt) {
    std::ifstream in(opt.config_path);
    if (!in) throw casc::DataError("cannot open sweep summary: " + opt.config_path);
    nlohmann::json summary;
    try {
        in >> summary;
    } catch (const nlohmann::json::exception& e) {
        throw casc::DataError("summary parse error in " + opt.config_path + ": " + e.what());
    }
    if (!summary.contains("significance_counts") || !summary.contains("r2"))
        throw casc::DataError(opt.config_path + ": not a sweep summary document");
    std::filesystem::create_directories(opt.out_path);
    const std::string t1 = casc::table1_analog_text(summary);
    const std::string t2 = casc::table2_analog_text(summary);
    {
        std::ofstream f1(std::filesystem::path(opt.out_path) / "table1_analog.txt");
        f1 << t1;
        std::ofstream f2(std::filesystem::path(opt.out_path) / "table2_analog.txt");
        f2 << t2;
        if (!f1 || !f2) throw casc::DataError("write failed in " + opt.out_path);
    }
    std::fputs(t1.c_str(), stdout);
    std::fputs("\n", stdout);
    std::fputs(t2.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold-cascade simulation and ex-ante prediction toolkit"};
    app.require_subcommand(1);

    CommonOptions run_opt, analyze_opt, sweep_opt, report_opt;

    CLI::App* run = app.add_subcommand("run", "run one configuration, write the run table CSV");
    run->add_option("--config", run_opt.config_path, "experiment config JSON")->required();
    run->add_option("--out", run_opt.out_path, "output CSV path")->required();
    run->add_option("--seed", run_opt.seed, "master seed override");
    run->add_option("--threads", run_opt.threads, "worker threads")->capture_default_str();

    CLI::App* analyze =
        app.add_subcommand("analyze", "analyze a run table CSV, write the report JSON");
    analyze->add_option("--config", analyze_opt.config_path, "run table CSV")->required();
    analyze->add_option("--out", analyze_opt.out_path, "output report JSON path")->required();
    analyze->add_option("--seed", analyze_opt.seed, "bootstrap master seed (default 42)");
    analyze->add_option("--threads", analyze_opt.threads, "worker threads")
        ->capture_default_str();
    analyze
        ->add_option("--n-agents", analyze_opt.analysis.n_agents,
                     "population size behind the pi column")
        ->capture_default_str();
    add_analysis_flags(analyze, analyze_opt);

    CLI::App* sweep = app.add_subcommand("sweep", "run a grid of configurations");
    sweep->add_option("--config", sweep_opt.config_path, "grid JSON with a 'configs' array");
    sweep->add_flag("--paper-grid", sweep_opt.paper_grid,
                    "use the built-in 42-configuration default grid");
    sweep->add_option("--grid-solutions", sweep_opt.grid_solutions,
                      "solutions per configuration for --paper-grid")
        ->capture_default_str();
    sweep->add_option("--out", sweep_opt.out_path, "output directory")->required();
    sweep->add_option("--seed", sweep_opt.seed, "master seed for per-config seed derivation");
    sweep->add_option("--threads", sweep_opt.threads, "worker threads")->capture_default_str();
    add_analysis_flags(sweep, sweep_opt);

    CLI::App* report = app.add_subcommand(
        "report", "regenerate the aligned-text tables from a sweep summary JSON");
    report->add_option("--config", report_opt.config_path, "sweep_summary.json path")
        ->required();
    report->add_option("--out", report_opt.out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (analyze->parsed()) return cmd_analyze(analyze_opt);
        if (sweep->parsed()) return cmd_sweep(sweep_opt);
        return cmd_report(report_opt);
    } catch (const casc::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const casc::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
