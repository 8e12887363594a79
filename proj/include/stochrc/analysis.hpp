#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stochrc/markov.hpp"
#include "stochrc/pipeline.hpp"
#include "stochrc/rng.hpp"
#include "stochrc/sampler.hpp"
#include "stochrc/tasks.hpp"
#include "stochrc/training.hpp"

namespace stochrc {

// Smallest eigenvalue of a symmetric matrix (row-major, dim x dim).
inline double min_eigenvalue(std::span<const double> k_matrix, std::size_t dim) {
    if (k_matrix.size() != dim * dim || dim == 0)
        throw std::invalid_argument("min_eigenvalue: bad shape");
    double max_abs = 0.0, max_asym = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            max_abs = std::max(max_abs, std::abs(k_matrix[i * dim + j]));
            max_asym = std::max(max_asym, std::abs(k_matrix[i * dim + j] - k_matrix[j * dim + i]));
        }
    if (max_asym > 1e-10 * std::max(1.0, max_abs))
        throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                0.5 * (k_matrix[i * dim + j] + k_matrix[j * dim + i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("min_eigenvalue: eigensolver failed");
    return eig.eigenvalues().minCoeff();
}

// Expected Gram matrix of frequency-estimated probabilities at a single
// step: E[ phat phat^T ] = (1 - 1/n_runs) P P^T + (1/n_runs) diag(P), with
// phat the multinomial frequency vector of n_runs draws from P. Exact.
inline std::vector<double> expected_kest_step(const ProbabilityVector& p, std::int64_t n_runs) {
    if (n_runs < 1) throw std::invalid_argument("expected_kest_step: n_runs must be >= 1");
    const std::size_t m = p.size();
    const double w = 1.0 / static_cast<double>(n_runs);
    std::vector<double> out(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) out[a * m + b] = (1.0 - w) * p[a] * p[b];
        out[a * m + a] += w * p[a];
    }
    return out;
}

// Step-averaged version: (1 - 1/n_runs) K + (1/n_runs) Dbar, where
// K = (1/N) sum_k P_k P_k^T and Dbar = (1/N) sum_k diag(P_k). This is the
// expectation of the estimated training Gram matrix under shot noise; its
// small eigenvalues are what a finite run budget fails to resolve.
inline std::vector<double> expected_kest(std::span<const ProbabilityVector> series,
                                         std::int64_t n_runs) {
    if (series.empty()) throw std::invalid_argument("expected_kest: empty series");
    if (n_runs < 1) throw std::invalid_argument("expected_kest: n_runs must be >= 1");
    const std::size_t m = series.front().size();
    std::vector<double> out(m * m, 0.0);
    for (const auto& p : series) {
        if (p.size() != m) throw std::invalid_argument("expected_kest: ragged series");
        const auto step = expected_kest_step(p, n_runs);
        for (std::size_t i = 0; i < m * m; ++i) out[i] += step[i];
    }
    const double inv_n = 1.0 / static_cast<double>(series.size());
    for (double& v : out) v *= inv_n;
    return out;
}

// Run budget needed to resolve the smallest Gram eigenvalue:
// ceil(factor / lambda_min). factor = 3 reproduces the empirical threshold
// where shot-limited fits start matching exact-probability fits.
inline std::int64_t runs_heuristic(double lambda_min, double factor = 3.0) {
    if (!(lambda_min > 0.0))
        throw std::invalid_argument("runs_heuristic: lambda_min must be > 0");
    if (!(factor > 0.0)) throw std::invalid_argument("runs_heuristic: factor must be > 0");
    return static_cast<std::int64_t>(std::ceil(factor / lambda_min));
}

struct NoiseSweepResult {
    std::vector<std::int64_t> runs_grid;
    std::vector<double> metric_values; // test metric per grid point
    double exact_metric = 0.0;         // same pipeline on exact probabilities
    double lambda_min = 0.0;           // smallest eigenvalue of the exact training Gram

    void validate() const {
        if (runs_grid.size() != metric_values.size())
            throw std::invalid_argument("NoiseSweepResult: shape mismatch");
        for (std::size_t i = 0; i + 1 < runs_grid.size(); ++i)
            if (runs_grid[i + 1] <= runs_grid[i])
                throw std::invalid_argument("NoiseSweepResult: runs_grid must be increasing");
        for (double v : metric_values)
            if (!std::isfinite(v))
                throw std::invalid_argument("NoiseSweepResult: non-finite metric");
    }
};

// Test-window metric as a function of the shot budget, against the
// exact-probability reference. Grid point g uses the count substream
// derive_seed(master_seed, g); grid points are independent, so evaluation
// order (or parallelism at the call site) cannot change results.
inline NoiseSweepResult noise_sweep(const EsnConfig& cfg, const TaskData& task,
                                    std::span<const std::int64_t> runs_grid,
                                    std::uint64_t master_seed, double lambda = 1e-10,
                                    int threads = 1) {
    if (runs_grid.empty()) throw std::invalid_argument("noise_sweep: empty grid");
    task.validate();

    NoiseSweepResult result;
    result.runs_grid.assign(runs_grid.begin(), runs_grid.end());
    for (std::size_t i = 0; i + 1 < result.runs_grid.size(); ++i)
        if (result.runs_grid[i + 1] <= result.runs_grid[i])
            throw std::invalid_argument("noise_sweep: runs_grid must be strictly increasing");

    const auto exact = simulate_exact(cfg, task.inputs);
    const auto aligned = align_probability_readouts(exact, task);
    const FitResult fit = fit_ridge(aligned.train, aligned.train_targets, lambda);
    result.exact_metric =
        task_metric(task.metric, predict(fit.weights, aligned.test), aligned.test_targets);
    result.lambda_min = min_eigenvalue(fit.gram, fit.dim);

    for (std::size_t g = 0; g < runs_grid.size(); ++g) {
        const CountTable counts =
            accumulate_counts(cfg, task.inputs, runs_grid[g], derive_seed(master_seed, g), threads);
        const auto est = estimate_probabilities(counts);
        const auto shot = align_probability_readouts(est, task);
        const FitResult sf = fit_ridge(shot.train, shot.train_targets, lambda);
        result.metric_values.push_back(
            task_metric(task.metric, predict(sf.weights, shot.test), shot.test_targets));
    }
    result.validate();
    return result;
}

} // namespace stochrc
