// Command-line front end: config-driven experiment runs, shot-budget
// sweeps, activation-family validation, and report re-rendering.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical divergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochrc/analysis.hpp"
#include "stochrc/config_io.hpp"
#include "stochrc/experiment.hpp"
#include "stochrc/io.hpp"
#include "stochrc/report.hpp"

namespace fs = std::filesystem;
using namespace stochrc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "results";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> mode_override;
    std::vector<int> detectors_override;
    int threads = 1;
};

ExperimentConfig load_with_overrides(const CommonOpts& opts) {
    ExperimentConfig cfg = load_experiment_config(opts.config_path);
    if (opts.seed_override) cfg.master_seed = *opts.seed_override;
    if (opts.mode_override) cfg.mode = run_mode_from_string(*opts.mode_override);
    if (!opts.detectors_override.empty()) cfg.detectors = opts.detectors_override;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config (.toml or .json)");
    if (need_config) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed_override, "override master_seed");
    cmd->add_option("--mode", opts.mode_override,
                    "override mode (deterministic|stochastic_exact|stochastic_shots)");
    cmd->add_option("--detectors", opts.detectors_override, "override detector counts");
    cmd->add_option("--threads", opts.threads, "worker threads (never changes results)");
}

int cmd_run(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const ExperimentRecord record = run_experiment(cfg, opts.threads);
    const auto paths = emit_report(record, opts.out_dir,
                                   {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg});
    for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
    for (const auto& a : record.aggregates)
        std::cout << "detectors=" << a.detectors << " metric=" << format_double(a.metric_mean)
                  << " +/- " << format_double(a.metric_std) << '\n';
    return 0;
}

int cmd_sweep_runs(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const TaskData task = make_task(cfg);
    const int detectors = cfg.detectors.front();
    const EsnConfig esn =
        sample_weights(cell_seed(cfg.master_seed, detectors, 0), detectors, task.inputs.dim(),
                       family_activation(cfg.family), family_window(cfg.family), 1.0, cfg.safety);
    const NoiseSweepResult sweep =
        noise_sweep(esn, task, cfg.runs_grid, derive_seed(cfg.master_seed, 0xA11CE),
                    cfg.lambda, opts.threads);

    fs::create_directories(opts.out_dir);
    const fs::path csv = fs::path(opts.out_dir) / "sweep_runs.csv";
    std::ostringstream body;
    write_csv(body, sweep);
    detail::write_file(csv, body.str());
    std::cout << "wrote " << csv.string() << '\n';
    std::cout << "exact_metric=" << format_double(sweep.exact_metric)
              << " lambda_min=" << format_double(sweep.lambda_min)
              << " suggested_runs=" << runs_heuristic(sweep.lambda_min) << '\n';
    return 0;
}

int cmd_validate(const std::string& family, double shift, double r_zeta, int grid_points) {
    ActivationDistribution rho(activation_kind_from_string(family), shift);
    const UniversalityReport rep = check_universality_criteria(rho, r_zeta, grid_points);
    std::cout << "family=" << family << " shift=" << format_double(shift)
              << " r_zeta=" << format_double(r_zeta) << " grid=" << grid_points << '\n';
    std::cout << "continuous:    " << (rep.continuous_ok ? "pass" : "FAIL") << '\n';
    std::cout << "bounded_away:  " << (rep.bounded_away_ok ? "pass" : "FAIL") << '\n';
    std::cout << "monotonic:     " << (rep.monotonic_ok ? "pass" : "FAIL") << '\n';
    std::cout << "overall:       " << (rep.overall ? "pass" : "FAIL") << '\n';
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_dir) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open record file " + in_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(in_path + ": " + e.what());
    }
    const ExperimentRecord record = experiment_record_from_json(j);
    const auto paths = emit_report(record, out_dir,
                                   {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg});
    for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochrc: stochastic reservoir computing experiments"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    add_common(run, run_opts, true);

    auto* sweep = app.add_subcommand("sweep-runs", "test metric vs shot budget for one config");
    add_common(sweep, sweep_opts, true);

    std::string val_family = "qubit";
    double val_shift = ActivationDistribution::kDefaultQubitShift;
    double val_r_zeta = 0.99 * ActivationDistribution::kDefaultQubitShift;
    int val_grid = 1001;
    auto* validate = app.add_subcommand("validate", "universality criteria for an activation family");
    validate->add_option("--family", val_family, "qubit|optical|constant");
    validate->add_option("--shift", val_shift, "delta (qubit) / d (optical) / value (constant)");
    validate->add_option("--r-zeta", val_r_zeta, "drive window half-width");
    validate->add_option("--grid", val_grid, "grid points");

    std::string report_in, report_out = "results";
    auto* report = app.add_subcommand("report", "re-render csv/svg from a saved record json");
    report->add_option("--in", report_in, "record json")->required();
    report->add_option("--out", report_out, "output directory");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_opts);
        if (sweep->parsed()) return cmd_sweep_runs(sweep_opts);
        if (validate->parsed()) return cmd_validate(val_family, val_shift, val_r_zeta, val_grid);
        if (report->parsed()) return cmd_report(report_in, report_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
