#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "stochrc/config_io.hpp"
#include "stochrc/experiment.hpp"
#include "stochrc/report.hpp"

using namespace stochrc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.task = TaskKind::SineSquare;
    cfg.family = Family::Qubit;
    cfg.mode = RunMode::StochasticShots;
    cfg.detectors = {2, 3};
    cfg.n_runs = 400;
    cfg.n_samples = 3;
    cfg.master_seed = 321;
    cfg.splits = SplitSpec{16, 160, 64}; // 240 steps = 30 periods
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("stochrc_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(ExperimentConfig, ValidationMessagesNameFields) {
    ExperimentConfig cfg = tiny_config();
    cfg.detectors = {0};
    try {
        cfg.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("experiment.detectors"), std::string::npos);
    }

    cfg = tiny_config();
    cfg.n_samples = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);

    cfg = tiny_config();
    cfg.splits = SplitSpec{10, 100, 7}; // not a multiple of 8 for sine_square
    EXPECT_THROW(cfg.validate(), ConfigError);

    // Wide detector counts are a deterministic-mode-only feature.
    cfg = tiny_config();
    cfg.detector_cap = 50;
    cfg.detectors = {12};
    EXPECT_THROW(cfg.validate(), ConfigError); // stochastic_shots
    cfg.mode = RunMode::Deterministic;
    EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentRunner, DeterministicModeSupportsWideNetworks) {
    ExperimentConfig cfg = tiny_config();
    cfg.mode = RunMode::Deterministic;
    cfg.detector_cap = 50;
    cfg.detectors = {20};
    cfg.n_samples = 2;
    const auto record = run_experiment(cfg, 2);
    for (const auto& r : record.rows) EXPECT_TRUE(std::isfinite(r.metric));
}

TEST(ExperimentRunner, DeterministicAcrossRepeatAndThreads) {
    const ExperimentConfig cfg = tiny_config();
    const auto r1 = run_experiment(cfg, 1);
    const auto r2 = run_experiment(cfg, 1);
    const auto r8 = run_experiment(cfg, 8);
    EXPECT_TRUE(records_equal(r1, r2));
    EXPECT_TRUE(records_equal(r1, r8));
    EXPECT_EQ(to_json(r1).dump(), to_json(r8).dump());
}

TEST(ExperimentRunner, ModesShareWeightDrawsPerCell) {
    ExperimentConfig cfg = tiny_config();
    cfg.mode = RunMode::StochasticExact;
    const auto exact = run_experiment(cfg, 1);
    cfg.mode = RunMode::Deterministic;
    const auto det = run_experiment(cfg, 1);
    ASSERT_EQ(exact.rows.size(), det.rows.size());
    for (std::size_t i = 0; i < exact.rows.size(); ++i)
        EXPECT_EQ(exact.rows[i].seed, det.rows[i].seed);
}

TEST(ExperimentRunner, AggregatesRecomputableFromRows) {
    const auto record = run_experiment(tiny_config(), 2);
    for (const auto& agg : record.aggregates) {
        double mean = 0.0;
        std::size_t n = 0;
        for (const auto& r : record.rows)
            if (r.detectors == agg.detectors) {
                mean += r.metric;
                ++n;
            }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : record.rows)
            if (r.detectors == agg.detectors) var += (r.metric - mean) * (r.metric - mean);
        EXPECT_NEAR(agg.metric_mean, mean, 1e-12);
        EXPECT_NEAR(agg.metric_std, std::sqrt(var / static_cast<double>(n)), 1e-12);
    }
}

TEST(ExperimentRecord, JsonRoundTripsToEqualRecord) {
    const auto record = run_experiment(tiny_config(), 2);
    const auto j = to_json(record);
    const auto back = experiment_record_from_json(j);
    EXPECT_TRUE(records_equal(record, back));
}

TEST(ExperimentRecord, CsvRowCountAndNullRunsColumn) {
    const auto record = run_experiment(tiny_config(), 2);
    std::ostringstream os;
    write_csv(os, record);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line); // header
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    // per-sample rows + mean and std rows per detector count
    EXPECT_EQ(rows, record.rows.size() + 2 * record.aggregates.size());
    EXPECT_NE(os.str().find(",400,"), std::string::npos); // n_runs recorded in shots mode

    ExperimentConfig cfg = tiny_config();
    cfg.mode = RunMode::StochasticExact;
    const auto exact = run_experiment(cfg, 1);
    std::ostringstream os2;
    write_csv(os2, exact);
    EXPECT_EQ(os2.str().find(",400,"), std::string::npos);
    EXPECT_NE(os2.str().find("stochastic_exact,,"), std::string::npos); // empty n_runs field
    EXPECT_TRUE(to_json(exact)["config"]["experiment"]["n_runs"].is_null());
}

TEST(ExperimentReport, SvgIsWellFormedXml) {
    const auto record = run_experiment(tiny_config(), 2);
    const auto dir = temp_dir("svg");
    const auto paths = emit_report(record, dir, {ReportFormat::Svg});
    ASSERT_EQ(paths.size(), 1u);
    const std::string svg = slurp(paths[0]);
    EXPECT_NE(svg.find("<?xml version=\"1.0\""), std::string::npos);
    EXPECT_NE(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\""), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    // crude balance check: every <line/circle/rect/text is self-closed or closed
    EXPECT_EQ(std::count(svg.begin(), svg.end(), '<'), std::count(svg.begin(), svg.end(), '>'));
    fs::remove_all(dir);
}

TEST(ConfigIo, TomlAndJsonParseToSameConfig) {
    const auto dir = temp_dir("cfg");
    const std::string toml =
        "schema_version = 1\n"
        "# experiment block\n"
        "[experiment]\n"
        "task = \"sine_square\"\n"
        "family = \"optical\"\n"
        "mode = \"stochastic_shots\"\n"
        "detectors = [2, 3]\n"
        "n_runs = 500\n"
        "n_samples = 4\n"
        "master_seed = 77\n"
        "lambda = 1e-10\n"
        "[splits]\n"
        "washout = 16\n"
        "train = 160\n"
        "test = 64\n"
        "[task_params]\n"
        "label_seed = 5\n";
    const fs::path toml_path = dir / "cfg.toml";
    detail::write_file(toml_path, toml);

    const nlohmann::json j = {
        {"schema_version", 1},
        {"experiment",
         {{"task", "sine_square"},
          {"family", "optical"},
          {"mode", "stochastic_shots"},
          {"detectors", {2, 3}},
          {"n_runs", 500},
          {"n_samples", 4},
          {"master_seed", 77},
          {"lambda", 1e-10}}},
        {"splits", {{"washout", 16}, {"train", 160}, {"test", 64}}},
        {"task_params", {{"label_seed", 5}}}};
    const fs::path json_path = dir / "cfg.json";
    detail::write_file(json_path, j.dump(2));

    const auto from_toml = load_experiment_config(toml_path);
    const auto from_json = load_experiment_config(json_path);
    EXPECT_EQ(to_json(from_toml).dump(), to_json(from_json).dump());
    EXPECT_EQ(config_hash(from_toml), config_hash(from_json));
    EXPECT_EQ(from_toml.family, Family::Optical);
    EXPECT_EQ(from_toml.n_runs, 500);
    fs::remove_all(dir);
}

TEST(ConfigIo, MalformedTomlReportsLine) {
    const auto dir = temp_dir("badtoml");
    const fs::path p = dir / "bad.toml";
    detail::write_file(p, "schema_version = 1\nkey_without_value\n");
    try {
        load_experiment_config(p);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    fs::remove_all(dir);
}

TEST(Cli, EndToEndRunValidateAndExitCodes) {
    const fs::path cli = STOCHRC_CLI_PATH;
    ASSERT_TRUE(fs::exists(cli));
    const auto dir = temp_dir("cli");

    const std::string toml =
        "schema_version = 1\n"
        "[experiment]\n"
        "task = \"sine_square\"\n"
        "family = \"qubit\"\n"
        "mode = \"stochastic_exact\"\n"
        "detectors = [2]\n"
        "n_samples = 2\n"
        "master_seed = 9\n"
        "runs_grid = [50, 200]\n"
        "[splits]\n"
        "washout = 16\n"
        "train = 160\n"
        "test = 64\n";
    const fs::path cfg = dir / "exp.toml";
    detail::write_file(cfg, toml);

    const auto run = [&](const std::string& args) {
        const std::string cmd = cli.string() + " " + args + " >" + (dir / "out.txt").string() +
                                " 2>" + (dir / "err.txt").string();
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    EXPECT_EQ(run("run --config " + cfg.string() + " --out " + (dir / "r1").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "r1" / "experiment.csv"));
    EXPECT_TRUE(fs::exists(dir / "r1" / "experiment.json"));
    EXPECT_TRUE(fs::exists(dir / "r1" / "experiment.svg"));

    // Threads must not change bytes.
    EXPECT_EQ(run("run --config " + cfg.string() + " --out " + (dir / "r2").string() +
                  " --threads 8"),
              0);
    EXPECT_EQ(slurp(dir / "r1" / "experiment.csv"), slurp(dir / "r2" / "experiment.csv"));
    EXPECT_EQ(slurp(dir / "r1" / "experiment.json"), slurp(dir / "r2" / "experiment.json"));

    // report re-renders from saved json
    EXPECT_EQ(run("report --in " + (dir / "r1" / "experiment.json").string() + " --out " +
                  (dir / "r3").string()),
              0);
    EXPECT_EQ(slurp(dir / "r1" / "experiment.csv"), slurp(dir / "r3" / "experiment.csv"));

    // validate verb
    EXPECT_EQ(run("validate --family qubit --shift 0.7853981633974483 --r-zeta 0.777"), 0);

    // sweep-runs verb
    EXPECT_EQ(run("sweep-runs --config " + cfg.string() + " --out " + (dir / "sw").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "sw" / "sweep_runs.csv"));

    // config error -> exit 2
    detail::write_file(dir / "bad.toml", "schema_version = 2\n");
    EXPECT_EQ(run("run --config " + (dir / "bad.toml").string()), 2);

    // divergence -> exit 3 (literal unit-step integration blows up)
    const std::string bad_lorenz =
        "schema_version = 1\n"
        "[experiment]\n"
        "task = \"lorenz_x\"\n"
        "family = \"qubit\"\n"
        "mode = \"deterministic\"\n"
        "detectors = [2]\n"
        "n_samples = 1\n"
        "master_seed = 9\n"
        "[splits]\n"
        "washout = 16\n"
        "train = 160\n"
        "test = 64\n"
        "[task_params]\n"
        "dt = 1.0\n"
        "substeps = 1\n";
    detail::write_file(dir / "div.toml", bad_lorenz);
    EXPECT_EQ(run("run --config " + (dir / "div.toml").string()), 3);

    fs::remove_all(dir);
}
