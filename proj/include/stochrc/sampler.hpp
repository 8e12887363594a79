#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochrc/esn.hpp"
#include "stochrc/markov.hpp"
#include "stochrc/parallel.hpp"
#include "stochrc/rng.hpp"

namespace stochrc {

// Occurrence counts n_k^(a) of outcome a at step k over n_runs independent
// trajectories. Row k sums to n_runs. 64-bit counts keep run budgets up to
// 1e9 safe.
struct CountTable {
    std::size_t steps = 0;    // T + 1 rows
    std::size_t outcomes = 0; // M columns
    std::int64_t n_runs = 0;
    std::vector<std::int64_t> counts; // row-major (steps x outcomes)

    std::int64_t at(std::size_t k, std::size_t a) const { return counts[k * outcomes + a]; }

    void validate() const {
        if (counts.size() != steps * outcomes) throw std::invalid_argument("CountTable: bad shape");
        for (std::size_t k = 0; k < steps; ++k) {
            std::int64_t sum = 0;
            for (std::size_t a = 0; a < outcomes; ++a) {
                if (at(k, a) < 0) throw std::invalid_argument("CountTable: negative count");
                sum += at(k, a);
            }
            if (sum != n_runs)
                throw std::invalid_argument("CountTable: row " + std::to_string(k) +
                                            " sums to " + std::to_string(sum));
        }
    }
};

// One stochastic trajectory x_0..x_T, returned as outcome indices (the
// little-endian bit packing of outcome_bits). Each step draws detector bits
// in fixed (step, detector) order from the run's own SplitMix64 stream, so
// a (cfg, inputs, seed, x0) tuple always reproduces the same path.
inline std::vector<std::uint32_t> run_trajectory(const EsnConfig& cfg, const InputSeries& inputs,
                                                 std::uint64_t seed, std::span<const int> x0) {
    cfg.validate();
    detail::check_probability_space_cap(cfg, "run_trajectory");
    if (static_cast<int>(x0.size()) != cfg.detectors)
        throw std::invalid_argument("run_trajectory: x0 has wrong length");
    SplitMix64 g(seed);
    std::vector<std::uint32_t> path;
    path.reserve(inputs.steps() + 1);
    std::uint32_t state = static_cast<std::uint32_t>(bits_to_index(x0));
    path.push_back(state);
    std::vector<double> z;
    for (std::size_t k = 0; k < inputs.steps(); ++k) {
        const auto u = inputs.at(k);
        detail::check_input_bound(cfg, u);
        detail::drive_for_outcome(cfg, state, u, z);
        std::uint32_t next = 0;
        for (int i = 0; i < cfg.detectors; ++i) {
            const double zi = z[static_cast<std::size_t>(i)];
            detail::check_drive_window(cfg, zi);
            if (g.uniform01() < cfg.rho.rho1(zi)) next |= 1u << i;
        }
        state = next;
        path.push_back(state);
    }
    return path;
}

namespace detail {

// Firing probabilities for every (step, detector, prior outcome) triple.
// The drive z depends only on that triple, so precomputing the table turns
// each run-step into table lookups. Sampling against the cached values is
// bit-identical to evaluating rho1 inline.
struct FiringTable {
    std::size_t steps = 0, m = 0;
    int detectors = 0;
    std::vector<double> p; // [k][i][b]

    double at(std::size_t k, int i, std::uint32_t b) const {
        return p[(k * static_cast<std::size_t>(detectors) + static_cast<std::size_t>(i)) * m + b];
    }
};

inline FiringTable build_firing_table(const EsnConfig& cfg, const InputSeries& inputs) {
    FiringTable t;
    t.steps = inputs.steps();
    t.m = cfg.outcomes();
    t.detectors = cfg.detectors;
    t.p.resize(t.steps * static_cast<std::size_t>(t.detectors) * t.m);
    std::vector<double> z;
    for (std::size_t k = 0; k < t.steps; ++k) {
        const auto u = inputs.at(k);
        check_input_bound(cfg, u);
        for (std::size_t b = 0; b < t.m; ++b) {
            drive_for_outcome(cfg, b, u, z);
            for (int i = 0; i < cfg.detectors; ++i) {
                check_drive_window(cfg, z[static_cast<std::size_t>(i)]);
                t.p[(k * static_cast<std::size_t>(t.detectors) + static_cast<std::size_t>(i)) * t.m + b] =
                    cfg.rho.rho1(z[static_cast<std::size_t>(i)]);
            }
        }
    }
    return t;
}

} // namespace detail

// Counts over n_runs independent trajectories. Run r draws from the
// substream derive_seed(master_seed, r); runs are sharded across threads
// and merged by integer addition, so the table is bit-identical for any
// worker count. x0 defaults to the all-zeros outcome.
inline CountTable accumulate_counts(const EsnConfig& cfg, const InputSeries& inputs,
                                    std::int64_t n_runs, std::uint64_t master_seed,
                                    int threads = 1) {
    cfg.validate();
    detail::check_probability_space_cap(cfg, "accumulate_counts");
    if (n_runs < 1) throw std::invalid_argument("accumulate_counts: n_runs must be >= 1");
    const std::size_t m = cfg.outcomes();
    const std::size_t rows = inputs.steps() + 1;

    CountTable table;
    table.steps = rows;
    table.outcomes = m;
    table.n_runs = n_runs;
    table.counts.assign(rows * m, 0);

    // Probability table when it fits (~32 MB cap); direct evaluation otherwise.
    const std::size_t table_bytes = inputs.steps() * static_cast<std::size_t>(cfg.detectors) * m * 8;
    const bool use_table = table_bytes <= (std::size_t{32} << 20);
    detail::FiringTable ft;
    if (use_table) {
        ft = detail::build_firing_table(cfg, inputs);
    } else {
        for (std::size_t k = 0; k < inputs.steps(); ++k)
            detail::check_input_bound(cfg, inputs.at(k));
    }

    threads = resolve_threads(threads);
    std::vector<std::vector<std::int64_t>> partial(
        static_cast<std::size_t>(threads), std::vector<std::int64_t>(rows * m, 0));

    parallel_chunks(static_cast<std::size_t>(n_runs), threads,
                    [&](std::size_t begin, std::size_t end, std::size_t worker) {
        auto& local = partial[worker];
        std::vector<double> z;
        for (std::size_t r = begin; r < end; ++r) {
            SplitMix64 g(derive_seed(master_seed, r));
            std::uint32_t state = 0;
            local[state] += 1;
            for (std::size_t k = 0; k < inputs.steps(); ++k) {
                std::uint32_t next = 0;
                if (use_table) {
                    for (int i = 0; i < cfg.detectors; ++i)
                        if (g.uniform01() < ft.at(k, i, state)) next |= 1u << i;
                } else {
                    detail::drive_for_outcome(cfg, state, inputs.at(k), z);
                    for (int i = 0; i < cfg.detectors; ++i) {
                        detail::check_drive_window(cfg, z[static_cast<std::size_t>(i)]);
                        if (g.uniform01() < cfg.rho.rho1(z[static_cast<std::size_t>(i)])) next |= 1u << i;
                    }
                }
                state = next;
                local[(k + 1) * m + state] += 1;
            }
        }
    });

    for (const auto& local : partial)
        for (std::size_t i = 0; i < local.size(); ++i) table.counts[i] += local[i];
    return table;
}

// Posterior-mean probability estimates (n_k^(a) + 1) / (n_runs + M) under a
// flat prior: strictly positive, each row summing to one, so downstream
// code may divide by any entry.
inline std::vector<ProbabilityVector> estimate_probabilities(const CountTable& counts) {
    counts.validate();
    std::vector<ProbabilityVector> out;
    out.reserve(counts.steps);
    const double denom = static_cast<double>(counts.n_runs) + static_cast<double>(counts.outcomes);
    for (std::size_t k = 0; k < counts.steps; ++k) {
        std::vector<double> row(counts.outcomes);
        for (std::size_t a = 0; a < counts.outcomes; ++a)
            row[a] = (static_cast<double>(counts.at(k, a)) + 1.0) / denom;
        out.emplace_back(std::move(row));
    }
    return out;
}

} // namespace stochrc
