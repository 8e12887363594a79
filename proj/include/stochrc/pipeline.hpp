#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "stochrc/deterministic.hpp"
#include "stochrc/esn.hpp"
#include "stochrc/markov.hpp"
#include "stochrc/sampler.hpp"
#include "stochrc/tasks.hpp"
#include "stochrc/training.hpp"

namespace stochrc {

// Alignment between reservoir trajectories and task targets: the readout
// paired with target y_k is the state reached after absorbing u_k, i.e.
// index k+1 of a trajectory P_0..P_T. Readout row k therefore depends on
// u_k, u_{k-1}, ... but never on any later input.
struct AlignedReadouts {
    ReadoutSeries train, test;
    std::vector<double> train_targets, test_targets;
};

namespace detail {

inline AlignedReadouts split_aligned(const ReadoutSeries& all_rows, const TaskData& task) {
    // all_rows holds one row per step k = 0..T-1, already shifted.
    if (all_rows.count() != task.steps())
        throw std::invalid_argument("split_aligned: readout/target length mismatch");
    const auto& sp = task.splits;
    AlignedReadouts out;
    out.train = all_rows.slice(sp.washout, sp.train);
    out.test = all_rows.slice(sp.washout + sp.train, sp.test);
    out.train_targets.assign(task.targets.begin() + static_cast<std::ptrdiff_t>(sp.washout),
                             task.targets.begin() + static_cast<std::ptrdiff_t>(sp.washout + sp.train));
    out.test_targets.assign(task.targets.begin() + static_cast<std::ptrdiff_t>(sp.washout + sp.train),
                            task.targets.end());
    return out;
}

} // namespace detail

// Probability readouts (stochastic modes). series must be the T+1-long
// trajectory P_0..P_T for the task's inputs.
inline AlignedReadouts align_probability_readouts(std::span<const ProbabilityVector> series,
                                                  const TaskData& task) {
    if (series.size() != task.steps() + 1)
        throw std::invalid_argument("align_probability_readouts: need T+1 distributions");
    ReadoutSeries rows = ReadoutSeries::from_probabilities(series.subspan(1));
    return detail::split_aligned(rows, task);
}

// State readouts with bias column (deterministic mode).
inline AlignedReadouts align_state_readouts(std::span<const std::vector<double>> states,
                                            const TaskData& task) {
    if (states.size() != task.steps() + 1)
        throw std::invalid_argument("align_state_readouts: need T+1 states");
    ReadoutSeries rows = ReadoutSeries::from_states(states.subspan(1));
    return detail::split_aligned(rows, task);
}

inline double task_metric(TaskMetric metric, std::span<const double> predictions,
                          std::span<const double> targets) {
    return metric == TaskMetric::Nmse ? nmse(predictions, targets)
                                      : classification_error_rate(predictions, targets);
}

} // namespace stochrc
