#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochrc/activation.hpp"
#include "stochrc/analysis.hpp"
#include "stochrc/deterministic.hpp"
#include "stochrc/error.hpp"
#include "stochrc/esn.hpp"
#include "stochrc/parallel.hpp"
#include "stochrc/pipeline.hpp"
#include "stochrc/rng.hpp"
#include "stochrc/sampler.hpp"
#include "stochrc/tasks.hpp"
#include "stochrc/training.hpp"

namespace stochrc {

enum class TaskKind { SineSquare, LorenzX };
enum class Family { Qubit, Optical };
enum class RunMode { Deterministic, StochasticExact, StochasticShots };

inline const char* to_string(TaskKind t) {
    return t == TaskKind::SineSquare ? "sine_square" : "lorenz_x";
}
inline const char* to_string(Family f) { return f == Family::Qubit ? "qubit" : "optical"; }
inline const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::Deterministic: return "deterministic";
        case RunMode::StochasticExact: return "stochastic_exact";
        case RunMode::StochasticShots: return "stochastic_shots";
    }
    return "?";
}

// Everything a run needs; a record's results are a pure function of this
// struct (thread count never changes bytes).
struct ExperimentConfig {
    int schema_version = 1;
    TaskKind task = TaskKind::LorenzX;
    Family family = Family::Qubit;
    RunMode mode = RunMode::StochasticExact;
    std::vector<int> detectors{2};
    std::int64_t n_runs = 100000;       // shots mode only
    int n_samples = 20;                 // weight draws per detector count
    std::uint64_t master_seed = 1;
    double lambda = 1e-10;
    std::optional<SplitSpec> splits;    // task defaults when absent
    double dt = 1.0;                    // lorenz_x
    int substeps = 100;                 // lorenz_x
    std::uint64_t label_seed = 2024;    // sine_square
    std::vector<std::int64_t> runs_grid{100, 1000, 10000, 100000}; // sweep-runs verb
    int detector_cap = kMaxDetectors;
    double safety = 0.99;

    SplitSpec effective_splits() const {
        if (splits) return *splits;
        return task == TaskKind::SineSquare ? SplitSpec{96, 3000, 504} : SplitSpec{100, 3000, 500};
    }

    void validate() const {
        if (schema_version != 1)
            throw ConfigError("schema_version: unsupported value " + std::to_string(schema_version));
        if (detectors.empty()) throw ConfigError("experiment.detectors: must be non-empty");
        if (detector_cap < 1 || detector_cap > kMaxDetectorsDeterministic)
            throw ConfigError("experiment.detector_cap: must be in [1, " +
                              std::to_string(kMaxDetectorsDeterministic) + "]");
        for (int d : detectors) {
            if (d < 1 || d > detector_cap)
                throw ConfigError("experiment.detectors: entry " + std::to_string(d) +
                                  " outside [1, " + std::to_string(detector_cap) + "]");
            if (mode != RunMode::Deterministic && d > kMaxDetectors)
                throw ConfigError("experiment.detectors: entry " + std::to_string(d) +
                                  " exceeds the stochastic-mode cap " +
                                  std::to_string(kMaxDetectors) +
                                  " (probability space is 2^detectors)");
        }
        if (n_samples < 1) throw ConfigError("experiment.n_samples: must be >= 1");
        if (mode == RunMode::StochasticShots && n_runs < 1)
            throw ConfigError("experiment.n_runs: must be >= 1 in stochastic_shots mode");
        if (lambda < 0.0) throw ConfigError("experiment.lambda: must be >= 0");
        if (!(dt > 0.0)) throw ConfigError("task_params.dt: must be > 0");
        if (substeps < 1) throw ConfigError("task_params.substeps: must be >= 1");
        if (!(safety > 0.0) || safety > 1.0)
            throw ConfigError("experiment.safety: must be in (0, 1]");
        const SplitSpec sp = effective_splits();
        if (sp.train < 2 || sp.test < 2)
            throw ConfigError("splits: train and test windows must each have >= 2 steps");
        if (task == TaskKind::SineSquare && sp.total() % 8 != 0)
            throw ConfigError("splits: sine_square total must be a multiple of the 8-step period");
    }
};

inline ActivationDistribution family_activation(Family f) {
    return f == Family::Qubit ? ActivationDistribution::qubit() : ActivationDistribution::optical();
}

// Widest certified drive window per family.
inline double family_window(Family f) {
    return f == Family::Qubit ? ActivationDistribution::kDefaultQubitShift : 1.0;
}

inline TaskData make_task(const ExperimentConfig& cfg) {
    const SplitSpec sp = cfg.effective_splits();
    if (cfg.task == TaskKind::SineSquare)
        return gen_sine_square(sp.total() / 8, cfg.label_seed, sp);
    return gen_lorenz_x(sp.total(), cfg.dt, cfg.substeps, sp);
}

struct SampleRow {
    int detectors = 0;
    int sample = 0;
    std::uint64_t seed = 0;
    double metric = 0.0;
    double lambda_min = 0.0;

    bool operator==(const SampleRow&) const = default;
};

struct Aggregate {
    int detectors = 0;
    double metric_mean = 0.0;
    double metric_std = 0.0;     // population std over samples
    double lambda_min_mean = 0.0;

    bool operator==(const Aggregate&) const = default;
};

struct ExperimentRecord {
    ExperimentConfig config;
    std::string config_hash;
    std::vector<SampleRow> rows;
    std::vector<Aggregate> aggregates;

    const Aggregate& aggregate_for(int detectors) const {
        for (const auto& a : aggregates)
            if (a.detectors == detectors) return a;
        throw std::invalid_argument("ExperimentRecord: no aggregate for detector count " +
                                    std::to_string(detectors));
    }
};

namespace detail {

inline std::vector<Aggregate> compute_aggregates(const std::vector<int>& detectors,
                                                 const std::vector<SampleRow>& rows) {
    std::vector<Aggregate> out;
    for (int d : detectors) {
        Aggregate agg;
        agg.detectors = d;
        std::size_t n = 0;
        for (const auto& r : rows)
            if (r.detectors == d) {
                agg.metric_mean += r.metric;
                agg.lambda_min_mean += r.lambda_min;
                ++n;
            }
        agg.metric_mean /= static_cast<double>(n);
        agg.lambda_min_mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : rows)
            if (r.detectors == d)
                var += (r.metric - agg.metric_mean) * (r.metric - agg.metric_mean);
        agg.metric_std = std::sqrt(var / static_cast<double>(n));
        out.push_back(agg);
    }
    return out;
}

} // namespace detail

// Weight seed for one (detector count, sample) cell. Depends only on the
// master seed, so the three modes draw identical (A, B) per cell and can be
// compared pairwise.
inline std::uint64_t cell_seed(std::uint64_t master_seed, int detectors, int sample) {
    return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(detectors)),
                       static_cast<std::uint64_t>(sample));
}

// One cell of the experiment grid: draw weights, run the configured mode,
// fit the training window, return the test metric and the training Gram's
// smallest eigenvalue.
inline SampleRow run_cell(const ExperimentConfig& exp, const TaskData& task, int detectors,
                          int sample) {
    SampleRow row;
    row.detectors = detectors;
    row.sample = sample;
    row.seed = cell_seed(exp.master_seed, detectors, sample);

    const EsnConfig esn = sample_weights(row.seed, detectors, task.inputs.dim(),
                                         family_activation(exp.family), family_window(exp.family),
                                         1.0, exp.safety);

    AlignedReadouts aligned;
    switch (exp.mode) {
        case RunMode::Deterministic: {
            const auto states = run_deterministic_esn(esn, task.inputs);
            aligned = align_state_readouts(states, task);
            break;
        }
        case RunMode::StochasticExact: {
            const auto traj = simulate_exact(esn, task.inputs);
            aligned = align_probability_readouts(traj, task);
            break;
        }
        case RunMode::StochasticShots: {
            const CountTable counts =
                accumulate_counts(esn, task.inputs, exp.n_runs, derive_seed(row.seed, 1));
            const auto est = estimate_probabilities(counts);
            aligned = align_probability_readouts(est, task);
            break;
        }
    }

    const FitResult fit = fit_ridge(aligned.train, aligned.train_targets, exp.lambda);
    row.metric = task_metric(task.metric, predict(fit.weights, aligned.test), aligned.test_targets);
    row.lambda_min = min_eigenvalue(fit.gram, fit.dim);
    return row;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = cfg.schema_version;
    j["experiment"] = {{"task", to_string(cfg.task)},
                       {"family", to_string(cfg.family)},
                       {"mode", to_string(cfg.mode)},
                       {"detectors", cfg.detectors},
                       {"n_runs", cfg.n_runs},
                       {"n_samples", cfg.n_samples},
                       {"master_seed", cfg.master_seed},
                       {"lambda", cfg.lambda},
                       {"runs_grid", cfg.runs_grid},
                       {"detector_cap", cfg.detector_cap},
                       {"safety", cfg.safety}};
    const SplitSpec sp = cfg.effective_splits();
    j["splits"] = {{"washout", sp.washout}, {"train", sp.train}, {"test", sp.test}};
    j["task_params"] = {{"dt", cfg.dt},
                        {"substeps", cfg.substeps},
                        {"label_seed", cfg.label_seed}};
    return j;
}

// FNV-1a over the canonical config serialization; stable across platforms.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// The full grid. Cells run independently (optionally in parallel) and land
// in preassigned slots, so rows and aggregates never depend on thread count.
inline ExperimentRecord run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    cfg.validate();
    const TaskData task = make_task(cfg);

    ExperimentRecord record;
    record.config = cfg;
    record.config_hash = config_hash(cfg);

    const std::size_t cells = cfg.detectors.size() * static_cast<std::size_t>(cfg.n_samples);
    record.rows.resize(cells);
    std::vector<std::string> errors(resolve_threads(threads));

    parallel_chunks(cells, threads, [&](std::size_t begin, std::size_t end, std::size_t worker) {
        for (std::size_t c = begin; c < end; ++c) {
            const int det = cfg.detectors[c / static_cast<std::size_t>(cfg.n_samples)];
            const int sample = static_cast<int>(c % static_cast<std::size_t>(cfg.n_samples));
            try {
                record.rows[c] = run_cell(cfg, task, det, sample);
            } catch (const std::exception& e) {
                if (errors[worker].empty())
                    errors[worker] = "cell (detectors=" + std::to_string(det) +
                                     ", sample=" + std::to_string(sample) +
                                     ", seed=" + std::to_string(cell_seed(cfg.master_seed, det, sample)) +
                                     "): " + e.what();
            }
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw DivergenceError(e);

    record.aggregates = detail::compute_aggregates(cfg.detectors, record.rows);
    return record;
}

} // namespace stochrc
