// Experiment orchestration: configuration files, run tables on disk, the
// end-to-end analysis pipeline, and multi-configuration sweeps with their
// aggregate significance-count and R-squared tables.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "casc/cascade.hpp"
#include "casc/errors.hpp"
#include "casc/features.hpp"
#include "casc/graph.hpp"
#include "casc/rng.hpp"
#include "casc/stats.hpp"

namespace casc {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct AnalysisOptions {
    double alpha_screen = 0.10;   // screening keep threshold (AD p < alpha)
    double alpha_model = 0.05;    // backward-elimination retention threshold
    int n_bootstrap = 1000;       // bootstrap resamples of the preferred model
    double loess_span = 0.75;     // LOESS window fraction
    double loess_threshold = 0.05; // SSR-improvement score that flags nonlinearity
    bool drop_missing = false;    // exclude rows with imputation flags
    int n_agents = 1000;          // population size behind the pi column

    void validate() const {
        if (!(alpha_screen > 0.0 && alpha_screen < 1.0))
            throw ValidationError("analysis.alpha_screen must be in (0, 1)");
        if (!(alpha_model > 0.0 && alpha_model < 1.0))
            throw ValidationError("analysis.alpha_model must be in (0, 1)");
        if (n_bootstrap < 1) throw ValidationError("analysis.bootstrap must be >= 1");
        if (!(loess_span > 0.0 && loess_span <= 1.0))
            throw ValidationError("analysis.span must be in (0, 1]");
        if (!(loess_threshold > 0.0))
            throw ValidationError("analysis.loess_threshold must be > 0");
        if (n_agents < 1) throw ValidationError("analysis.n_agents must be >= 1");
    }
};

struct ExperimentConfig {
    std::string label;
    NetworkSpec network;
    int n_seeds = 5;
    long long n_solutions = 1000;
    std::optional<double> critical_override; // scale-free critical value
    std::uint64_t master_seed = 42;
    AnalysisOptions analysis;

    void validate() const {
        if (label.empty()) throw ValidationError("label must be non-empty");
        for (const char c : label) {
            const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                            (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
            if (!ok)
                throw ValidationError("label may only contain [A-Za-z0-9_.-], got '" +
                                      label + "'");
        }
        network.validate();
        if (n_solutions < 40) throw ValidationError("n_solutions must be >= 40");
        if (n_seeds < 1) throw ValidationError("n_seeds must be >= 1");
        if (n_seeds >= network.n_agents)
            throw ValidationError("n_seeds must be < network.n_agents");
        analysis.validate();
    }
};

namespace detail {

inline NetworkKind network_kind_from_string(const std::string& s) {
    if (s == "random") return NetworkKind::Random;
    if (s == "small_world") return NetworkKind::SmallWorld;
    if (s == "scale_free") return NetworkKind::ScaleFree;
    throw ValidationError("network.kind must be one of random|small_world|scale_free, got '" +
                          s + "'");
}

template <typename T>
T require_field(const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key))
        throw ValidationError(std::string(where) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string(where) + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* key, T fallback, const char* where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string(where) + ": field '" + key + "' has the wrong type");
    }
}

} // namespace detail

inline nlohmann::json to_json(const NetworkSpec& s) {
    nlohmann::json j;
    j["kind"] = to_string(s.kind);
    j["n_agents"] = s.n_agents;
    switch (s.kind) {
        case NetworkKind::Random: j["p"] = s.p; break;
        case NetworkKind::SmallWorld:
            j["n_neighbors"] = s.n_neighbors;
            j["rewire_prob"] = s.rewire_prob;
            break;
        case NetworkKind::ScaleFree:
            j["m0"] = s.m0;
            j["m"] = s.m;
            break;
    }
    return j;
}

inline NetworkSpec network_spec_from_json(const nlohmann::json& j) {
    NetworkSpec s;
    s.kind = detail::network_kind_from_string(
        detail::require_field<std::string>(j, "kind", "network"));
    s.n_agents = detail::optional_field<int>(j, "n_agents", 1000, "network");
    switch (s.kind) {
        case NetworkKind::Random:
            s.p = detail::require_field<double>(j, "p", "network");
            break;
        case NetworkKind::SmallWorld:
            s.n_neighbors = detail::require_field<int>(j, "n_neighbors", "network");
            s.rewire_prob = detail::require_field<double>(j, "rewire_prob", "network");
            break;
        case NetworkKind::ScaleFree:
            s.m0 = detail::require_field<int>(j, "m0", "network");
            s.m = detail::require_field<double>(j, "m", "network");
            break;
    }
    return s;
}

inline nlohmann::json to_json(const AnalysisOptions& o) {
    return {{"alpha_screen", o.alpha_screen}, {"alpha_model", o.alpha_model},
            {"bootstrap", o.n_bootstrap},     {"span", o.loess_span},
            {"loess_threshold", o.loess_threshold},
            {"drop_missing", o.drop_missing}, {"n_agents", o.n_agents}};
}

inline AnalysisOptions analysis_options_from_json(const nlohmann::json& j) {
    AnalysisOptions o;
    o.alpha_screen = detail::optional_field<double>(j, "alpha_screen", o.alpha_screen, "analysis");
    o.alpha_model = detail::optional_field<double>(j, "alpha_model", o.alpha_model, "analysis");
    o.n_bootstrap = detail::optional_field<int>(j, "bootstrap", o.n_bootstrap, "analysis");
    o.loess_span = detail::optional_field<double>(j, "span", o.loess_span, "analysis");
    o.loess_threshold =
        detail::optional_field<double>(j, "loess_threshold", o.loess_threshold, "analysis");
    o.drop_missing = detail::optional_field<bool>(j, "drop_missing", o.drop_missing, "analysis");
    o.n_agents = detail::optional_field<int>(j, "n_agents", o.n_agents, "analysis");
    return o;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["label"] = c.label;
    j["network"] = to_json(c.network);
    j["n_seeds"] = c.n_seeds;
    j["n_solutions"] = c.n_solutions;
    j["master_seed"] = c.master_seed;
    j["analysis"] = to_json(c.analysis);
    if (c.critical_override) j["critical_override"] = *c.critical_override;
    return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.label = detail::require_field<std::string>(j, "label", "config");
    if (!j.contains("network")) throw ValidationError("config: missing field 'network'");
    c.network = network_spec_from_json(j.at("network"));
    c.n_seeds = detail::require_field<int>(j, "n_seeds", "config");
    c.n_solutions = detail::optional_field<long long>(j, "n_solutions", 1000, "config");
    c.master_seed = detail::optional_field<std::uint64_t>(j, "master_seed", 42, "config");
    if (j.contains("critical_override") && !j.at("critical_override").is_null())
        c.critical_override =
            detail::require_field<double>(j, "critical_override", "config");
    if (j.contains("analysis")) c.analysis = analysis_options_from_json(j.at("analysis"));
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error in " + path + ": " + e.what());
    }
    ExperimentConfig c = experiment_config_from_json(j);
    c.validate();
    return c;
}

inline std::vector<ExperimentConfig> load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open grid file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("grid parse error in " + path + ": " + e.what());
    }
    const nlohmann::json* arr = &j;
    if (j.is_object()) {
        if (!j.contains("configs")) throw ValidationError("grid: missing field 'configs'");
        arr = &j.at("configs");
    }
    if (!arr->is_array() || arr->empty())
        throw ValidationError("grid: 'configs' must be a non-empty array");
    std::vector<ExperimentConfig> grid;
    for (const auto& cj : *arr) {
        grid.push_back(experiment_config_from_json(cj));
        grid.back().validate();
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Running one configuration
// ---------------------------------------------------------------------------

inline RunTable run_experiment(const ExperimentConfig& cfg, int n_threads = 1) {
    cfg.validate();
    // Config-level parameter problems (e.g. a degenerate critical value)
    // surface before any solution runs.
    const CriticalValue crit = critical_value(cfg.network, cfg.critical_override);

    const long long n = cfg.n_solutions;
    std::vector<RunRow> rows(static_cast<std::size_t>(n));
    const int workers = static_cast<int>(
        std::clamp<long long>(n_threads, 1, std::min<long long>(n, 64)));

    std::vector<std::pair<long long, std::exception_ptr>> failures(
        static_cast<std::size_t>(workers), {-1, nullptr});
    auto body = [&](int w) {
        const long long lo = n * w / workers, hi = n * (w + 1) / workers;
        for (long long i = lo; i < hi; ++i) {
            try {
                Rng rng = substream(cfg.master_seed, static_cast<std::uint64_t>(i));
                const Graph g = cfg.network.generate(rng);
                const ThresholdAssignment thr = draw_thresholds(g.n_agents(), rng);
                const SeedSet seeds = select_seeds(g.n_agents(), cfg.n_seeds, rng);
                const CascadeResult result = run_cascade(g, thr, seeds);
                RunRow& row = rows[static_cast<std::size_t>(i)];
                row.features = extract_features(g, thr, seeds, result, crit);
                row.pi = result.percolation;
                row.config_label = cfg.label;
                row.solution_index = i;
            } catch (...) {
                failures[static_cast<std::size_t>(w)] = {i, std::current_exception()};
                return;
            }
        }
    };

    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }

    const auto hit = std::min_element(
        failures.begin(), failures.end(), [](const auto& a, const auto& b) {
            if (!a.second) return false;
            if (!b.second) return true;
            return a.first < b.first;
        });
    if (hit != failures.end() && hit->second) {
        const std::string at = "solution " + std::to_string(hit->first) + ": ";
        try {
            std::rethrow_exception(hit->second);
        } catch (const ValidationError& e) {
            throw ValidationError(at + e.what());
        } catch (const DataError& e) {
            throw DataError(at + e.what());
        } catch (const std::exception& e) {
            throw DataError(at + e.what());
        }
    }
    return RunTable(std::move(rows));
}

// ---------------------------------------------------------------------------
// CSV persistence (17 significant digits, exact feature column names)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_header() {
    std::string h;
    for (const char* name : FeatureVector::names()) {
        h += name;
        h += ',';
    }
    h += "nbr_missing,step1_missing,pi,config_label,solution_index";
    return h;
}

inline void append_g17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace detail

inline void write_table_csv(const RunTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    std::string line = detail::csv_header();
    line += '\n';
    out << line;
    for (const auto& row : table.rows()) {
        line.clear();
        for (const double v : row.features.values()) {
            detail::append_g17(line, v);
            line += ',';
        }
        line += row.features.nbr_missing ? "1," : "0,";
        line += row.features.step1_missing ? "1," : "0,";
        detail::append_g17(line, row.pi);
        line += ',';
        line += row.config_label;
        line += ',';
        line += std::to_string(row.solution_index);
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("write failed: " + path);
}

inline RunTable read_table_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != detail::csv_header())
        throw DataError(path + ": line 1: header mismatch; expected '" +
                        detail::csv_header() + "'");

    constexpr std::size_t kFields = 17; // 12 predictors + 2 flags + pi + label + index
    std::vector<RunRow> rows;
    long long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue; // tolerate a trailing blank line
        std::array<std::string, kFields> fields;
        std::size_t start = 0, fi = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (fi >= kFields)
                    throw DataError(path + ": line " + std::to_string(line_no) +
                                    ": too many fields");
                fields[fi++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (fi != kFields)
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(kFields) + " fields, got " + std::to_string(fi));

        auto parse_double = [&](const std::string& s, const char* what) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size())
                throw DataError(path + ": line " + std::to_string(line_no) + ": bad " +
                                what + " value '" + s + "'");
            return v;
        };
        auto parse_flag = [&](const std::string& s, const char* what) {
            if (s == "0") return false;
            if (s == "1") return true;
            throw DataError(path + ": line " + std::to_string(line_no) + ": bad " + what +
                            " flag '" + s + "'");
        };

        RunRow row;
        const auto& names = FeatureVector::names();
        std::array<double, 12> vals{};
        for (std::size_t j = 0; j < 12; ++j) vals[j] = parse_double(fields[j], names[j]);
        row.features.seed_mean_deg = vals[0];
        row.features.seed_max_deg = vals[1];
        row.features.nbr_min_deg = vals[2];
        row.features.nbr_mean_deg = vals[3];
        row.features.nbr_max_deg = vals[4];
        row.features.nbr_min_thr = vals[5];
        row.features.nbr_mean_thr = vals[6];
        row.features.nbr_max_thr = vals[7];
        row.features.below = vals[8];
        row.features.step1_min_thr = vals[9];
        row.features.step1_mean_thr = vals[10];
        row.features.step1_max_thr = vals[11];
        row.features.nbr_missing = parse_flag(fields[12], "nbr_missing");
        row.features.step1_missing = parse_flag(fields[13], "step1_missing");
        row.pi = parse_double(fields[14], "pi");
        row.config_label = fields[15];
        try {
            row.solution_index = std::stoll(fields[16]);
        } catch (const std::exception&) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": bad solution_index '" + fields[16] + "'");
        }
        rows.push_back(std::move(row));
    }
    return RunTable(std::move(rows));
}

// ---------------------------------------------------------------------------
// End-to-end analysis of one run table
// ---------------------------------------------------------------------------

struct LoessEntry {
    std::string variable;
    double score = 0.0;
    bool flagged = false;
};

// One pipeline pass over a candidate variable set.
struct ArmReport {
    std::vector<std::string> kept;  // candidates that entered the regression
    RegressionModel model;          // OLS on the kept set (pre-elimination)
    EliminationResult elimination;  // preferred model + drop trace
    BootstrapReport bootstrap;      // of the preferred model
    std::vector<LoessEntry> loess;  // per preferred-model variable
};

struct AnalysisReport {
    AnalysisOptions options;
    long long n_rows_total = 0;
    long long n_rows_used = 0;
    ScreeningReport screening;
    ArmReport full;     // all twelve candidate variables
    ArmReport reduced;  // kept set minus the three step1_* variables
};

inline bool is_step1_variable(const std::string& name) {
    return name.rfind("step1_", 0) == 0;
}

namespace detail {

inline ArmReport analyze_arm(const RunTable& table, std::vector<std::string> kept,
                             const std::vector<double>& y, const AnalysisOptions& o,
                             std::uint64_t bootstrap_seed) {
    ArmReport arm;
    arm.kept = std::move(kept);
    arm.model = ols_fit(table, arm.kept, y);
    arm.elimination = backward_eliminate(table, arm.kept, y, o.alpha_model);
    arm.bootstrap =
        bootstrap_model(table, arm.elimination.model, y, o.n_bootstrap, bootstrap_seed);
    for (const std::string& var : arm.elimination.model.variables) {
        const LoessResult lr =
            loess_screen(table.column(var), y, o.loess_span, o.loess_threshold);
        arm.loess.push_back({var, lr.score, lr.flagged});
    }
    return arm;
}

} // namespace detail

inline AnalysisReport analyze_table(const RunTable& table, const AnalysisOptions& options,
                                    std::uint64_t seed) {
    options.validate();
    AnalysisReport rep;
    rep.options = options;
    rep.n_rows_total = table.n_rows();
    const RunTable used = options.drop_missing ? table.without_missing() : table;
    rep.n_rows_used = used.n_rows();
    if (rep.n_rows_used < 40)
        throw DataError("fewer than 40 usable rows (" + std::to_string(rep.n_rows_used) +
                        " of " + std::to_string(rep.n_rows_total) + ")");

    std::vector<double> y;
    y.reserve(used.rows().size());
    for (const auto& row : used.rows()) y.push_back(empirical_logit(row.pi, options.n_agents));

    rep.screening = screen_variables(used, options.alpha_screen);
    const std::vector<std::string> kept12 = rep.screening.kept();
    std::vector<std::string> kept9;
    for (const auto& name : kept12)
        if (!is_step1_variable(name)) kept9.push_back(name);

    // distinct bootstrap streams, disjoint from the per-solution streams
    rep.full = detail::analyze_arm(used, kept12, y, options, derive_seed(seed, 1ULL << 62));
    rep.reduced =
        detail::analyze_arm(used, kept9, y, options, derive_seed(seed, (1ULL << 62) + 1));
    return rep;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json to_json(const RegressionModel& m) {
    nlohmann::json j;
    j["variables"] = m.variables;
    j["coef"] = m.coef;
    j["se"] = m.se;
    j["tstat"] = m.tstat;
    j["pval"] = m.pval;
    j["r2"] = m.r2;
    j["dof"] = m.dof;
    j["n_obs"] = m.n_obs;
    j["intercept_only"] = m.intercept_only;
    return j;
}

inline nlohmann::json to_json(const ArmReport& arm) {
    nlohmann::json j;
    j["kept"] = arm.kept;
    j["model"] = to_json(arm.model);
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& step : arm.elimination.trace)
        trace.push_back({{"variable", step.variable}, {"p", step.p_value}});
    j["elimination"] = {{"trace", trace},
                        {"reduced_to_intercept", arm.elimination.reduced_to_intercept},
                        {"preferred", to_json(arm.elimination.model)}};
    nlohmann::json boot = nlohmann::json::array();
    for (const auto& row : arm.bootstrap.rows)
        boot.push_back({{"name", row.name},
                        {"point", row.point},
                        {"boot_mean", row.boot_mean},
                        {"boot_sd", row.boot_sd},
                        {"rel_bias", row.rel_bias}});
    j["bootstrap"] = {{"rows", boot},
                      {"n_resamples", arm.bootstrap.n_resamples},
                      {"n_redraws", arm.bootstrap.n_redraws}};
    nlohmann::json loess = nlohmann::json::array();
    for (const auto& e : arm.loess)
        loess.push_back({{"variable", e.variable}, {"score", e.score}, {"flagged", e.flagged}});
    j["loess"] = loess;
    return j;
}

} // namespace detail

inline nlohmann::json report_to_json(const AnalysisReport& rep) {
    nlohmann::json j;
    j["options"] = to_json(rep.options);
    j["rows"] = {{"total", rep.n_rows_total}, {"used", rep.n_rows_used}};
    nlohmann::json screen = nlohmann::json::array();
    for (const auto& e : rep.screening.entries)
        screen.push_back({{"variable", e.variable},
                          {"a2", e.ad.a2},
                          {"t", e.ad.t},
                          {"p", e.ad.p},
                          {"kept", e.kept},
                          {"degenerate", e.degenerate},
                          {"permutation", e.ad.permutation}});
    j["screening"] = {{"alpha", rep.screening.alpha}, {"entries", screen}};
    j["full"] = detail::to_json(rep.full);
    j["reduced"] = detail::to_json(rep.reduced);
    return j;
}

// ---------------------------------------------------------------------------
// Default sweep grid (12 random + 12 small world + 18 scale free)
// ---------------------------------------------------------------------------

inline std::vector<ExperimentConfig> default_grid(std::uint64_t master_seed = 42,
                                                  long long n_solutions = 1000) {
    std::vector<ExperimentConfig> grid;
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    auto push = [&](ExperimentConfig c) {
        c.n_solutions = n_solutions;
        c.master_seed = derive_seed(master_seed, grid.size());
        grid.push_back(std::move(c));
    };

    for (const double p : {0.005, 0.01, 0.02, 0.04})
        for (const int s : {5, 10, 20}) {
            ExperimentConfig c;
            c.network.kind = NetworkKind::Random;
            c.network.p = p;
            c.n_seeds = s;
            c.label = "random_p" + fmt(p) + "_s" + std::to_string(s);
            push(std::move(c));
        }

    for (const int k : {5, 10, 20})
        for (const double beta : {0.01, 0.11})
            for (const int s : {5, 20}) {
                ExperimentConfig c;
                c.network.kind = NetworkKind::SmallWorld;
                c.network.n_neighbors = k;
                c.network.rewire_prob = beta;
                c.n_seeds = s;
                c.label = "sw_k" + std::to_string(k) + "_b" + fmt(beta) + "_s" +
                          std::to_string(s);
                push(std::move(c));
            }

    const std::array<std::pair<int, double>, 3> sf = {{{2, 1.0}, {4, 2.0}, {8, 5.0}}};
    for (const auto& [m0, m] : sf)
        for (const int s : {5, 10, 20})
            for (const int rep : {1, 2}) {
                ExperimentConfig c;
                c.network.kind = NetworkKind::ScaleFree;
                c.network.m0 = m0;
                c.network.m = m;
                c.n_seeds = s;
                c.label = "sf_m0" + std::to_string(m0) + "_m" + fmt(m) + "_s" +
                          std::to_string(s) + "_r" + std::to_string(rep);
                push(std::move(c));
            }

    return grid;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct ConfigOutcome {
    ExperimentConfig config;
    bool ok = false;
    std::string error;
    double r2_full = 0.0;
    double r2_reduced = 0.0;
    std::vector<std::string> preferred_full;
    std::vector<std::string> preferred_reduced;
    double pi_mean = 0.0;
    double pi_median = 0.0;
    double pi_skewness = 0.0;
};

struct FamilyR2 {
    int n = 0;
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct SweepResult {
    std::vector<ConfigOutcome> outcomes; // grid order
};

namespace detail {

inline void pi_shape_stats(std::vector<double> pis, ConfigOutcome& out) {
    const std::size_t n = pis.size();
    std::sort(pis.begin(), pis.end());
    out.pi_median = n % 2 == 1 ? pis[n / 2] : 0.5 * (pis[n / 2 - 1] + pis[n / 2]);
    double mean = 0.0;
    for (const double v : pis) mean += v;
    mean /= static_cast<double>(n);
    out.pi_mean = mean;
    double m2 = 0.0, m3 = 0.0;
    for (const double v : pis) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    out.pi_skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

inline FamilyR2 family_r2(const std::vector<double>& values) {
    FamilyR2 f;
    f.n = static_cast<int>(values.size());
    if (values.empty()) return f;
    f.min = values.front();
    f.max = values.front();
    for (const double v : values) {
        f.avg += v;
        f.min = std::min(f.min, v);
        f.max = std::max(f.max, v);
    }
    f.avg /= static_cast<double>(values.size());
    return f;
}

} // namespace detail

inline nlohmann::json sweep_summary_json(const SweepResult& sweep) {
    nlohmann::json configs = nlohmann::json::array();
    for (const auto& o : sweep.outcomes) {
        nlohmann::json c;
        c["label"] = o.config.label;
        c["kind"] = to_string(o.config.network.kind);
        c["ok"] = o.ok;
        if (!o.ok) {
            c["error"] = o.error;
        } else {
            c["r2_full"] = o.r2_full;
            c["r2_reduced"] = o.r2_reduced;
            c["preferred_full"] = o.preferred_full;
            c["preferred_reduced"] = o.preferred_reduced;
            c["pi_mean"] = o.pi_mean;
            c["pi_median"] = o.pi_median;
            c["pi_skewness"] = o.pi_skewness;
        }
        configs.push_back(std::move(c));
    }

    nlohmann::json counts, r2;
    for (const NetworkKind kind :
         {NetworkKind::Random, NetworkKind::SmallWorld, NetworkKind::ScaleFree}) {
        int n_ok = 0;
        std::vector<double> full_r2, reduced_r2;
        nlohmann::json per_var;
        for (const char* name : FeatureVector::names()) per_var[name] = 0;
        for (const auto& o : sweep.outcomes) {
            if (o.config.network.kind != kind || !o.ok) continue;
            ++n_ok;
            full_r2.push_back(o.r2_full);
            reduced_r2.push_back(o.r2_reduced);
            for (const auto& v : o.preferred_full)
                per_var[v] = per_var[v].get<int>() + 1;
        }
        const std::string family = to_string(kind);
        counts[family] = {{"n_configs", n_ok}, {"significant", per_var}};
        const FamilyR2 f = detail::family_r2(full_r2);
        const FamilyR2 r = detail::family_r2(reduced_r2);
        r2[family] = {{"full", {{"avg", f.avg}, {"min", f.min}, {"max", f.max}}},
                      {"reduced", {{"avg", r.avg}, {"min", r.min}, {"max", r.max}}},
                      {"n_configs", n_ok}};
    }

    return {{"configs", configs}, {"significance_counts", counts}, {"r2", r2}};
}

inline std::string table1_analog_text(const nlohmann::json& summary) {
    const auto& counts = summary.at("significance_counts");
    std::ostringstream out;
    out << "Preferred-model significance counts by network family\n";
    out << "(configurations in which the variable is significant / configurations run)\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %12s %12s %12s\n", "variable", "random",
                  "small_world", "scale_free");
    out << line;
    for (const char* name : FeatureVector::names()) {
        std::string cells[3];
        int ci = 0;
        for (const char* family : {"random", "small_world", "scale_free"}) {
            const auto& fam = counts.at(family);
            const int k = fam.at("significant").at(name).get<int>();
            const int n = fam.at("n_configs").get<int>();
            cells[ci++] = std::to_string(k) + "/" + std::to_string(n);
        }
        std::snprintf(line, sizeof line, "%-16s %12s %12s %12s\n", name, cells[0].c_str(),
                      cells[1].c_str(), cells[2].c_str());
        out << line;
    }
    return out.str();
}

inline std::string table2_analog_text(const nlohmann::json& summary) {
    const auto& r2 = summary.at("r2");
    std::ostringstream out;
    out << "R-squared of the screened regressions by network family\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-13s %-10s %9s %9s %9s\n", "family", "variables",
                  "average", "min", "max");
    out << line;
    for (const char* family : {"random", "small_world", "scale_free"}) {
        for (const char* set : {"full", "reduced"}) {
            const auto& cell = r2.at(family).at(set);
            std::snprintf(line, sizeof line, "%-13s %-10s %9.4f %9.4f %9.4f\n", family, set,
                          cell.at("avg").get<double>(), cell.at("min").get<double>(),
                          cell.at("max").get<double>());
            out << line;
        }
    }
    return out.str();
}

inline SweepResult run_sweep(const std::vector<ExperimentConfig>& grid,
                             const std::string& out_dir, int n_threads = 1) {
    if (grid.empty()) throw ValidationError("sweep grid must be non-empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i].validate();
        for (std::size_t k = i + 1; k < grid.size(); ++k)
            if (grid[i].label == grid[k].label)
                throw ValidationError("duplicate config label: " + grid[i].label);
    }
    std::filesystem::create_directories(out_dir);

    SweepResult sweep;
    sweep.outcomes.resize(grid.size());
    std::atomic<std::size_t> next{0};

    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            ConfigOutcome& out = sweep.outcomes[i];
            out.config = grid[i];
            try {
                const RunTable table = run_experiment(grid[i], 1);
                write_table_csv(
                    table, (std::filesystem::path(out_dir) / (grid[i].label + ".csv")).string());
                const AnalysisReport rep =
                    analyze_table(table, grid[i].analysis, grid[i].master_seed);
                std::ofstream rf(std::filesystem::path(out_dir) /
                                 (grid[i].label + "_report.json"));
                rf << report_to_json(rep).dump(2) << '\n';
                if (!rf) throw DataError("write failed: " + grid[i].label + "_report.json");
                out.ok = true;
                out.r2_full = rep.full.model.r2;
                out.r2_reduced = rep.reduced.model.r2;
                out.preferred_full = rep.full.elimination.model.variables;
                out.preferred_reduced = rep.reduced.elimination.model.variables;
                detail::pi_shape_stats(table.pis(), out);
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
        }
    };

    const int workers = static_cast<int>(
        std::clamp<std::size_t>(static_cast<std::size_t>(n_threads), 1,
                                std::min<std::size_t>(grid.size(), 64)));
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }

    if (std::none_of(sweep.outcomes.begin(), sweep.outcomes.end(),
                     [](const ConfigOutcome& o) { return o.ok; })) {
        std::string detail = sweep.outcomes.front().error;
        throw DataError("all configurations failed; first error: " + detail);
    }

    const nlohmann::json summary = sweep_summary_json(sweep);
    {
        std::ofstream sf(std::filesystem::path(out_dir) / "sweep_summary.json");
        sf << summary.dump(2) << '\n';
        if (!sf) throw DataError("write failed: sweep_summary.json");
    }
    {
        std::ofstream t1(std::filesystem::path(out_dir) / "table1_analog.txt");
        t1 << table1_analog_text(summary);
        std::ofstream t2(std::filesystem::path(out_dir) / "table2_analog.txt");
        t2 << table2_analog_text(summary);
        if (!t1 || !t2) throw DataError("write failed: analog tables");
    }
    return sweep;
}

} // namespace casc
