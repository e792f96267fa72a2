// Experiment orchestration: config serialization, run tables on disk, the
// end-to-end analysis pipeline, the default grid, and sweep aggregation.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "casc/experiment.hpp"

namespace fs = std::filesystem;
using casc::AnalysisOptions;
using casc::ExperimentConfig;
using casc::NetworkKind;
using casc::RunRow;
using casc::RunTable;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("casc_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
    REQUIRE(out.good());
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_random_config(const std::string& label, std::uint64_t seed,
                                     long long n_solutions = 60) {
    ExperimentConfig cfg;
    cfg.label = label;
    cfg.network.kind = NetworkKind::Random;
    cfg.network.n_agents = 1000;
    cfg.network.p = 0.01;
    cfg.n_seeds = 5;
    cfg.n_solutions = n_solutions;
    cfg.master_seed = seed;
    cfg.analysis.n_bootstrap = 50;
    return cfg;
}

bool tables_identical(const RunTable& a, const RunTable& b) {
    if (a.n_rows() != b.n_rows()) return false;
    for (std::size_t i = 0; i < a.rows().size(); ++i) {
        const RunRow& x = a.rows()[i];
        const RunRow& y = b.rows()[i];
        if (x.pi != y.pi || x.config_label != y.config_label ||
            x.solution_index != y.solution_index)
            return false;
        if (x.features.values() != y.features.values()) return false;
        if (x.features.nbr_missing != y.features.nbr_missing ||
            x.features.step1_missing != y.features.step1_missing)
            return false;
    }
    return true;
}

} // namespace

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

TEST_CASE("config: JSON round-trip preserves every field", "[experiment][config]") {
    ExperimentConfig cfg;
    cfg.label = "round_trip";
    cfg.network.kind = NetworkKind::ScaleFree;
    cfg.network.n_agents = 500;
    cfg.network.m0 = 4;
    cfg.network.m = 2.5;
    cfg.n_seeds = 7;
    cfg.n_solutions = 123;
    cfg.critical_override = 0.25;
    cfg.master_seed = 99;
    cfg.analysis.alpha_screen = 0.2;
    cfg.analysis.n_bootstrap = 17;
    cfg.analysis.drop_missing = true;

    const ExperimentConfig back = casc::experiment_config_from_json(casc::to_json(cfg));
    CHECK(back.label == cfg.label);
    CHECK(back.network.kind == cfg.network.kind);
    CHECK(back.network.n_agents == cfg.network.n_agents);
    CHECK(back.network.m0 == cfg.network.m0);
    CHECK(back.network.m == cfg.network.m);
    CHECK(back.n_seeds == cfg.n_seeds);
    CHECK(back.n_solutions == cfg.n_solutions);
    REQUIRE(back.critical_override.has_value());
    CHECK(*back.critical_override == 0.25);
    CHECK(back.master_seed == cfg.master_seed);
    CHECK(back.analysis.alpha_screen == cfg.analysis.alpha_screen);
    CHECK(back.analysis.n_bootstrap == cfg.analysis.n_bootstrap);
    CHECK(back.analysis.drop_missing == cfg.analysis.drop_missing);
}

TEST_CASE("config: missing and mistyped fields are named", "[experiment][config]") {
    using nlohmann::json;
    json j = {{"label", "x"},
              {"network", {{"kind", "random"}, {"p", 0.01}}},
              {"n_seeds", 5}};
    CHECK_NOTHROW(casc::experiment_config_from_json(j));

    json no_label = j;
    no_label.erase("label");
    CHECK_THROWS_WITH(casc::experiment_config_from_json(no_label),
                      Catch::Matchers::ContainsSubstring("label"));

    json no_p = j;
    no_p["network"].erase("p");
    CHECK_THROWS_WITH(casc::experiment_config_from_json(no_p),
                      Catch::Matchers::ContainsSubstring("'p'"));

    json bad_kind = j;
    bad_kind["network"]["kind"] = "ring";
    CHECK_THROWS_WITH(casc::experiment_config_from_json(bad_kind),
                      Catch::Matchers::ContainsSubstring("kind"));

    json bad_type = j;
    bad_type["n_seeds"] = "five";
    CHECK_THROWS_WITH(casc::experiment_config_from_json(bad_type),
                      Catch::Matchers::ContainsSubstring("n_seeds"));
}

TEST_CASE("config: validation rejects bad labels and row counts", "[experiment][config]") {
    ExperimentConfig cfg = small_random_config("ok-label_1.2", 1);
    CHECK_NOTHROW(cfg.validate());

    ExperimentConfig bad = cfg;
    bad.label = "has space";
    CHECK_THROWS_AS(bad.validate(), casc::ValidationError);
    bad.label = "";
    CHECK_THROWS_AS(bad.validate(), casc::ValidationError);

    ExperimentConfig few = cfg;
    few.n_solutions = 39;
    CHECK_THROWS_AS(few.validate(), casc::ValidationError);

    ExperimentConfig seeds = cfg;
    seeds.n_seeds = 1000;
    CHECK_THROWS_AS(seeds.validate(), casc::ValidationError);
}

TEST_CASE("config: file loading reports parse errors", "[experiment][config]") {
    const fs::path dir = temp_dir("cfgload");
    write_file(dir / "good.json",
               R"({"label":"f","network":{"kind":"random","p":0.01},"n_seeds":5})");
    const ExperimentConfig cfg = casc::load_config((dir / "good.json").string());
    CHECK(cfg.label == "f");
    CHECK(cfg.n_solutions == 1000); // default
    CHECK(cfg.master_seed == 42);   // default

    write_file(dir / "broken.json", "{not json");
    CHECK_THROWS_AS(casc::load_config((dir / "broken.json").string()),
                    casc::ValidationError);
    CHECK_THROWS_AS(casc::load_config((dir / "absent.json").string()),
                    casc::ValidationError);
}

TEST_CASE("grid: loading accepts object and array forms, rejects empty",
          "[experiment][config]") {
    const fs::path dir = temp_dir("gridload");
    const std::string one =
        R"({"label":"a","network":{"kind":"random","p":0.01},"n_seeds":5})";
    write_file(dir / "obj.json", "{\"configs\":[" + one + "]}");
    write_file(dir / "arr.json", "[" + one + "]");
    write_file(dir / "empty.json", R"({"configs":[]})");

    CHECK(casc::load_grid((dir / "obj.json").string()).size() == 1);
    CHECK(casc::load_grid((dir / "arr.json").string()).size() == 1);
    CHECK_THROWS_AS(casc::load_grid((dir / "empty.json").string()), casc::ValidationError);
}

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

TEST_CASE("run: produces exactly n_solutions rows with labels and indices",
          "[experiment][run]") {
    const ExperimentConfig cfg = small_random_config("rowcheck", 11, 50);
    const RunTable t = casc::run_experiment(cfg);
    REQUIRE(t.n_rows() == 50);
    for (long long i = 0; i < 50; ++i) {
        CHECK(t.rows()[static_cast<std::size_t>(i)].solution_index == i);
        CHECK(t.rows()[static_cast<std::size_t>(i)].config_label == "rowcheck");
        const double pi = t.rows()[static_cast<std::size_t>(i)].pi;
        CHECK(pi >= 5.0 / 1000.0); // seeds are always on
        CHECK(pi <= 1.0);
    }
}

TEST_CASE("run: identical config gives identical tables, any thread count",
          "[experiment][run]") {
    const ExperimentConfig cfg = small_random_config("det", 1234, 80);
    const RunTable a = casc::run_experiment(cfg, 1);
    const RunTable b = casc::run_experiment(cfg, 1);
    const RunTable c = casc::run_experiment(cfg, 7);
    CHECK(tables_identical(a, b));
    CHECK(tables_identical(a, c));

    ExperimentConfig other = cfg;
    other.master_seed = 1235;
    CHECK_FALSE(tables_identical(a, casc::run_experiment(other)));
}

TEST_CASE("run: degenerate critical value fails before any solution",
          "[experiment][run]") {
    ExperimentConfig cfg = small_random_config("degen", 1);
    cfg.network.p = 0.0005; // p*N = 0.5 <= 1
    CHECK_THROWS_AS(casc::run_experiment(cfg), casc::ValidationError);
}

TEST_CASE("run: random-family pi sample is right-skewed", "[experiment][run]") {
    const ExperimentConfig cfg = small_random_config("skew", 2024, 300);
    const RunTable t = casc::run_experiment(cfg, 4);
    std::vector<double> pis = t.pis();
    std::sort(pis.begin(), pis.end());
    double mean = 0.0;
    for (const double v : pis) mean += v;
    mean /= static_cast<double>(pis.size());
    const double median = 0.5 * (pis[149] + pis[150]);
    CHECK(mean > median);
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

TEST_CASE("csv: write-read round trip is exact", "[experiment][csv]") {
    const fs::path dir = temp_dir("csvrt");
    const ExperimentConfig cfg = small_random_config("csv_rt", 5, 60);
    const RunTable t = casc::run_experiment(cfg);
    const std::string path = (dir / "t.csv").string();
    casc::write_table_csv(t, path);
    const RunTable back = casc::read_table_csv(path);
    CHECK(tables_identical(t, back));

    // header is the documented column list
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "seed_mean_deg,seed_max_deg,nbr_min_deg,nbr_mean_deg,nbr_max_deg,"
          "nbr_min_thr,nbr_mean_thr,nbr_max_thr,below,step1_min_thr,"
          "step1_mean_thr,step1_max_thr,nbr_missing,step1_missing,pi,"
          "config_label,solution_index");
}

TEST_CASE("csv: malformed input reports the line number", "[experiment][csv]") {
    const fs::path dir = temp_dir("csvbad");
    const std::string header =
        "seed_mean_deg,seed_max_deg,nbr_min_deg,nbr_mean_deg,nbr_max_deg,"
        "nbr_min_thr,nbr_mean_thr,nbr_max_thr,below,step1_min_thr,"
        "step1_mean_thr,step1_max_thr,nbr_missing,step1_missing,pi,"
        "config_label,solution_index";
    const std::string good_row = "1,2,3,4,5,0.1,0.2,0.3,2,0.4,0.5,0.6,0,0,0.01,lab,0";

    write_file(dir / "bad_header.csv", "a,b,c\n");
    CHECK_THROWS_WITH(casc::read_table_csv((dir / "bad_header.csv").string()),
                      Catch::Matchers::ContainsSubstring("header"));

    write_file(dir / "short_row.csv", header + "\n1,2,3\n");
    CHECK_THROWS_WITH(casc::read_table_csv((dir / "short_row.csv").string()),
                      Catch::Matchers::ContainsSubstring("line 2"));

    write_file(dir / "bad_value.csv",
               header + "\n" + good_row + "\n" +
                   "x,2,3,4,5,0.1,0.2,0.3,2,0.4,0.5,0.6,0,0,0.01,lab,1\n");
    CHECK_THROWS_WITH(casc::read_table_csv((dir / "bad_value.csv").string()),
                      Catch::Matchers::ContainsSubstring("line 3"));

    write_file(dir / "bad_flag.csv",
               header + "\n1,2,3,4,5,0.1,0.2,0.3,2,0.4,0.5,0.6,2,0,0.01,lab,0\n");
    CHECK_THROWS_WITH(casc::read_table_csv((dir / "bad_flag.csv").string()),
                      Catch::Matchers::ContainsSubstring("nbr_missing"));

    // a trailing blank line is tolerated
    write_file(dir / "trailing.csv", header + "\n" + good_row + "\n\n");
    CHECK(casc::read_table_csv((dir / "trailing.csv").string()).n_rows() == 1);

    // CRLF endings are tolerated
    write_file(dir / "crlf.csv", header + "\r\n" + good_row + "\r\n");
    const RunTable crlf = casc::read_table_csv((dir / "crlf.csv").string());
    REQUIRE(crlf.n_rows() == 1);
    CHECK(crlf.rows()[0].config_label == "lab");
}

// ---------------------------------------------------------------------------
// analyze_table
// ---------------------------------------------------------------------------

TEST_CASE("analyze: fewer than 40 usable rows is a data error", "[experiment][analyze]") {
    std::vector<RunRow> rows(39);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].pi = 0.01;
    const RunTable t{std::move(rows)};
    AnalysisOptions opt;
    CHECK_THROWS_WITH(casc::analyze_table(t, opt, 1),
                      Catch::Matchers::ContainsSubstring("fewer than 40 usable rows"));
}

TEST_CASE("analyze: drop-missing changes the usable row count", "[experiment][analyze]") {
    std::vector<RunRow> rows(60);
    casc::Rng rng(0xD12ULL);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].pi = 0.005 + 0.9 * rng.next_double();
        rows[i].features.below = rng.next_double() * 4.0;
        if (i < 10) rows[i].features.step1_missing = true;
    }
    const RunTable t{std::move(rows)};

    AnalysisOptions keep;
    keep.n_bootstrap = 10;
    const casc::AnalysisReport all = casc::analyze_table(t, keep, 1);
    CHECK(all.n_rows_total == 60);
    CHECK(all.n_rows_used == 60);

    AnalysisOptions drop = keep;
    drop.drop_missing = true;
    const casc::AnalysisReport rest = casc::analyze_table(t, drop, 1);
    CHECK(rest.n_rows_total == 60);
    CHECK(rest.n_rows_used == 50);
}

TEST_CASE("analyze: exact linear logit in one variable is recovered",
          "[experiment][analyze]") {
    // below_i equals the empirical logit of pi_i, so logit(pi) = 0 + 1*below
    // exactly: screening keeps `below`, elimination retains it, R2 ~ 1.
    const std::size_t n = 60;
    std::vector<RunRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long long k = 5 + static_cast<long long>(i) * 15; // 5..890
        rows[i].pi = static_cast<double>(k) / 1000.0;
        rows[i].features.below = casc::empirical_logit(rows[i].pi, 1000);
    }
    const RunTable t{std::move(rows)};
    AnalysisOptions opt;
    opt.n_bootstrap = 50;
    const casc::AnalysisReport rep = casc::analyze_table(t, opt, 7);

    CHECK(rep.full.kept == std::vector<std::string>{"below"});
    CHECK(rep.full.elimination.model.variables == std::vector<std::string>{"below"});
    CHECK(rep.full.model.r2 > 0.999);
    REQUIRE(rep.full.elimination.model.coef.size() == 2);
    CHECK(rep.full.elimination.model.coef[1] == Catch::Approx(1.0).margin(1e-6));
    CHECK(rep.full.elimination.model.coef[0] == Catch::Approx(0.0).margin(1e-6));
    // the reduced arm keeps the same set (below is not a step1 variable)
    CHECK(rep.reduced.model.r2 == Catch::Approx(rep.full.model.r2).margin(1e-12));
}

TEST_CASE("analyze: real table has nested R2 and a coherent report",
          "[experiment][analyze]") {
    const ExperimentConfig cfg = small_random_config("nested", 77, 150);
    const RunTable t = casc::run_experiment(cfg, 4);
    AnalysisOptions opt;
    opt.n_bootstrap = 50;
    const casc::AnalysisReport rep = casc::analyze_table(t, opt, cfg.master_seed);

    CHECK(rep.reduced.model.r2 <= rep.full.model.r2 + 1e-12);
    CHECK(rep.screening.entries.size() == 12);
    // kept9 is kept12 minus the step1 variables
    std::vector<std::string> expect9;
    for (const auto& v : rep.full.kept)
        if (!casc::is_step1_variable(v)) expect9.push_back(v);
    CHECK(rep.reduced.kept == expect9);
    // every preferred-model variable has a loess entry
    CHECK(rep.full.loess.size() == rep.full.elimination.model.variables.size());
    // bootstrap covers intercept + preferred variables
    CHECK(rep.full.bootstrap.rows.size() ==
          rep.full.elimination.model.variables.size() + 1);
}

TEST_CASE("analyze: identical inputs give bit-identical reports", "[experiment][analyze]") {
    const ExperimentConfig cfg = small_random_config("repdet", 31, 60);
    const RunTable t = casc::run_experiment(cfg);
    AnalysisOptions opt;
    opt.n_bootstrap = 40;
    const std::string a = casc::report_to_json(casc::analyze_table(t, opt, 9)).dump(2);
    const std::string b = casc::report_to_json(casc::analyze_table(t, opt, 9)).dump(2);
    CHECK(a == b);
    // a different bootstrap seed changes the bootstrap block only
    const std::string c = casc::report_to_json(casc::analyze_table(t, opt, 10)).dump(2);
    CHECK(a != c);
}

// ---------------------------------------------------------------------------
// Default grid
// ---------------------------------------------------------------------------

TEST_CASE("default grid: 12 + 12 + 18 configurations, unique labels and seeds",
          "[experiment][grid]") {
    const std::vector<ExperimentConfig> grid = casc::default_grid(42, 1000);
    REQUIRE(grid.size() == 42);
    int n_random = 0, n_sw = 0, n_sf = 0;
    std::vector<std::string> labels;
    std::vector<std::uint64_t> seeds;
    for (const auto& cfg : grid) {
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.n_solutions == 1000);
        switch (cfg.network.kind) {
            case NetworkKind::Random: ++n_random; break;
            case NetworkKind::SmallWorld: ++n_sw; break;
            case NetworkKind::ScaleFree: ++n_sf; break;
        }
        labels.push_back(cfg.label);
        seeds.push_back(cfg.master_seed);
    }
    CHECK(n_random == 12);
    CHECK(n_sw == 12);
    CHECK(n_sf == 18);
    std::sort(labels.begin(), labels.end());
    CHECK(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    // replicate labels differ only in the trailing tag, with different seeds
    CHECK(grid[24].label == "sf_m02_m1_s5_r1");
    CHECK(grid[25].label == "sf_m02_m1_s5_r2");
    CHECK(grid[24].master_seed != grid[25].master_seed);
}

TEST_CASE("default grid: solution-count override and master-seed dependence",
          "[experiment][grid]") {
    const auto g60 = casc::default_grid(7, 60);
    CHECK(g60.size() == 42);
    CHECK(g60.front().n_solutions == 60);
    const auto g_other = casc::default_grid(8, 60);
    CHECK(g60.front().master_seed != g_other.front().master_seed);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

TEST_CASE("sweep: outputs per-config files, summary, and analog tables",
          "[experiment][sweep]") {
    const fs::path dir = temp_dir("sweep_ok");
    std::vector<ExperimentConfig> grid = {small_random_config("s_one", 21, 60),
                                          small_random_config("s_two", 22, 60)};
    grid[1].network.kind = NetworkKind::SmallWorld;
    grid[1].network.n_neighbors = 10;
    grid[1].network.rewire_prob = 0.11;

    const casc::SweepResult sweep = casc::run_sweep(grid, dir.string(), 2);
    REQUIRE(sweep.outcomes.size() == 2);
    CHECK(sweep.outcomes[0].ok);
    CHECK(sweep.outcomes[1].ok);
    for (const char* f : {"s_one.csv", "s_two.csv", "s_one_report.json",
                          "s_two_report.json", "sweep_summary.json", "table1_analog.txt",
                          "table2_analog.txt"})
        CHECK(fs::exists(dir / f));

    const nlohmann::json summary =
        nlohmann::json::parse(read_file(dir / "sweep_summary.json"));
    CHECK(summary.at("configs").size() == 2);
    CHECK(summary.at("significance_counts").at("random").at("n_configs") == 1);
    CHECK(summary.at("significance_counts").at("small_world").at("n_configs") == 1);
    CHECK(summary.at("significance_counts").at("scale_free").at("n_configs") == 0);
    for (const char* family : {"random", "small_world"}) {
        const auto& r2 = summary.at("r2").at(family).at("full");
        CHECK(r2.at("min").get<double>() <= r2.at("avg").get<double>());
        CHECK(r2.at("avg").get<double>() <= r2.at("max").get<double>());
    }

    const std::string t1 = read_file(dir / "table1_analog.txt");
    CHECK(t1.find("below") != std::string::npos);
    CHECK(t1.find("/1") != std::string::npos);
    const std::string t2 = read_file(dir / "table2_analog.txt");
    CHECK(t2.find("reduced") != std::string::npos);
}

TEST_CASE("sweep: per-config failures are recorded, not fatal", "[experiment][sweep]") {
    const fs::path dir = temp_dir("sweep_partial");
    std::vector<ExperimentConfig> grid = {small_random_config("good", 31, 60),
                                          small_random_config("bad", 32, 60)};
    grid[1].network.p = 0.0005; // degenerate critical value at run time

    const casc::SweepResult sweep = casc::run_sweep(grid, dir.string(), 1);
    CHECK(sweep.outcomes[0].ok);
    CHECK_FALSE(sweep.outcomes[1].ok);
    CHECK(sweep.outcomes[1].error.find("degenerate") != std::string::npos);

    const nlohmann::json summary =
        nlohmann::json::parse(read_file(dir / "sweep_summary.json"));
    CHECK(summary.at("configs").at(1).at("ok") == false);
    CHECK(summary.at("configs").at(1).contains("error"));
    CHECK(summary.at("significance_counts").at("random").at("n_configs") == 1);
}

TEST_CASE("sweep: all configurations failing is an error", "[experiment][sweep]") {
    const fs::path dir = temp_dir("sweep_allfail");
    std::vector<ExperimentConfig> grid = {small_random_config("bad1", 41, 60)};
    grid[0].network.p = 0.0005;
    CHECK_THROWS_AS(casc::run_sweep(grid, dir.string(), 1), casc::DataError);
}

TEST_CASE("sweep: duplicate labels are rejected", "[experiment][sweep]") {
    const fs::path dir = temp_dir("sweep_dup");
    const std::vector<ExperimentConfig> grid = {small_random_config("same", 51, 60),
                                                small_random_config("same", 52, 60)};
    CHECK_THROWS_AS(casc::run_sweep(grid, dir.string(), 1), casc::ValidationError);
    CHECK_THROWS_AS(casc::run_sweep({}, dir.string(), 1), casc::ValidationError);
}

TEST_CASE("sweep: outputs are byte-identical across runs and thread counts",
          "[experiment][sweep]") {
    std::vector<ExperimentConfig> grid = {small_random_config("d_one", 61, 60),
                                          small_random_config("d_two", 62, 60)};
    const fs::path a = temp_dir("sweep_det_a");
    const fs::path b = temp_dir("sweep_det_b");
    casc::run_sweep(grid, a.string(), 1);
    casc::run_sweep(grid, b.string(), 2);
    for (const char* f : {"d_one.csv", "d_two.csv", "d_one_report.json",
                          "d_two_report.json", "sweep_summary.json", "table1_analog.txt",
                          "table2_analog.txt"}) {
        INFO(f);
        CHECK(read_file(a / f) == read_file(b / f));
    }
}
