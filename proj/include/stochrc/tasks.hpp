#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochrc/error.hpp"
#include "stochrc/esn.hpp"
#include "stochrc/rng.hpp"

namespace stochrc {

// scaled = gain * raw + offset; invert() recovers raw values.
struct AffineScale {
    double gain = 1.0;
    double offset = 0.0;
    double apply(double raw) const { return gain * raw + offset; }
    double invert(double scaled) const { return (scaled - offset) / gain; }
};

enum class TaskMetric { Nmse, ErrorRate };

struct SplitSpec {
    std::size_t washout = 0, train = 0, test = 0;
    std::size_t total() const { return washout + train + test; }
};

// A benchmark series: scaled inputs u_0..u_{T-1}, targets y_0..y_{T-1},
// and a washout/train/test partition of the step axis. Inputs always
// satisfy ||u_k||_inf <= 1.
struct TaskData {
    std::string name;
    InputSeries inputs;
    std::vector<double> targets;
    SplitSpec splits;
    AffineScale input_scale;
    TaskMetric metric = TaskMetric::Nmse;
    std::map<std::string, double> metadata;

    std::size_t steps() const { return targets.size(); }

    void validate() const {
        if (inputs.steps() != targets.size())
            throw std::invalid_argument("TaskData: inputs/targets length mismatch");
        if (splits.total() != targets.size())
            throw std::invalid_argument("TaskData: splits do not cover the series");
        if (inputs.max_abs() > 1.0 + 1e-12)
            throw std::invalid_argument("TaskData: scaled input exceeds bound 1");
    }
};

// Sine vs square identification. The input alternates between 8-step
// blocks of sin(pi k / 4) and a period-8 square wave (-1)^floor(k/4),
// block labels drawn i.i.d. from label_seed; the target is the current
// block's label. Default partition: 96 washout, 504 test, remainder train.
inline TaskData gen_sine_square(std::size_t n_periods, std::uint64_t label_seed,
                                std::optional<SplitSpec> splits = std::nullopt) {
    if (n_periods < 1) throw std::invalid_argument("gen_sine_square: n_periods must be >= 1");
    const std::size_t total = 8 * n_periods;

    SplitSpec sp;
    if (splits) {
        sp = *splits;
        if (sp.total() != total)
            throw std::invalid_argument("gen_sine_square: splits must sum to 8 * n_periods");
    } else {
        if (total <= 96 + 504)
            throw std::invalid_argument("gen_sine_square: need > 75 periods for default splits");
        sp = {96, total - 96 - 504, 504};
    }

    SplitMix64 g(label_seed);
    std::vector<int> labels(n_periods);
    for (auto& l : labels) l = static_cast<int>(g.next() >> 63);

    std::vector<double> u(total), y(total);
    for (std::size_t k = 0; k < total; ++k) {
        const int tau = labels[k / 8];
        if (tau == 0) {
            u[k] = std::sin(std::numbers::pi * static_cast<double>(k) / 4.0);
        } else {
            u[k] = ((k / 4) % 2 == 0) ? 1.0 : -1.0; // (-1)^floor(k/4)
        }
        y[k] = static_cast<double>(tau);
    }

    TaskData task;
    task.name = "sine_square";
    task.inputs = InputSeries::scalar(std::move(u));
    task.targets = std::move(y);
    task.splits = sp;
    task.metric = TaskMetric::ErrorRate;
    task.metadata = {{"period", 8.0}, {"label_seed", static_cast<double>(label_seed)}};
    task.validate();
    return task;
}

namespace detail {

struct Lorenz {
    // Standard chaotic parameter set.
    static constexpr double kA = 10.0, kB = 28.0, kC = 8.0 / 3.0;

    static std::array<double, 3> rhs(const std::array<double, 3>& s) {
        return {kA * (s[1] - s[0]),
                s[0] * (kB - s[2]) - s[1],
                s[0] * s[1] - kC * s[2]};
    }

    static std::array<double, 3> rk4_step(const std::array<double, 3>& s, double h) {
        const auto k1 = rhs(s);
        std::array<double, 3> t;
        for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * h * k1[i];
        const auto k2 = rhs(t);
        for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * h * k2[i];
        const auto k3 = rhs(t);
        for (int i = 0; i < 3; ++i) t[i] = s[i] + h * k3[i];
        const auto k4 = rhs(t);
        std::array<double, 3> out;
        for (int i = 0; i < 3; ++i)
            out[i] = s[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }
};

} // namespace detail

inline std::array<double, 3> lorenz_rk4_step(const std::array<double, 3>& state, double h) {
    return detail::Lorenz::rk4_step(state, h);
}

// One-step-ahead prediction of the Lorenz X coordinate. The flow is
// integrated with classical RK4 at internal step dt/substeps and sampled
// every dt; a literal RK4 step of dt = 1.0 blows up immediately, hence the
// substeps knob (default callers use substeps = 100). The first 1000
// samples are discarded, then u_k = X_k and y_k = X_{k+1} (so u_k equals
// y_{k-1}), affinely mapped onto [-1, 1] using the training window's range.
// Default partition: 100 washout, 500 test, remainder train.
inline TaskData gen_lorenz_x(std::size_t total_steps, double dt = 1.0, int substeps = 100,
                             std::optional<SplitSpec> splits = std::nullopt) {
    if (!(dt > 0.0)) throw std::invalid_argument("gen_lorenz_x: dt must be > 0");
    if (substeps < 1) throw std::invalid_argument("gen_lorenz_x: substeps must be >= 1");
    if (total_steps < 2) throw std::invalid_argument("gen_lorenz_x: need at least 2 steps");

    SplitSpec sp;
    if (splits) {
        sp = *splits;
        if (sp.total() != total_steps)
            throw std::invalid_argument("gen_lorenz_x: splits must sum to total_steps");
    } else {
        if (total_steps <= 100 + 500)
            throw std::invalid_argument("gen_lorenz_x: need > 600 steps for default splits");
        sp = {100, total_steps - 100 - 500, 500};
    }

    constexpr std::size_t kBurnIn = 1000;
    const double h = dt / static_cast<double>(substeps);
    std::array<double, 3> s{0.5, 0.1, 0.2};
    std::vector<double> x;
    x.reserve(total_steps + 1);
    for (std::size_t k = 0; k < kBurnIn + total_steps + 1; ++k) {
        for (int i = 0; i < substeps; ++i) s = detail::Lorenz::rk4_step(s, h);
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2]))
            throw DivergenceError("gen_lorenz_x: trajectory diverged at sample " +
                                  std::to_string(k) + " (dt = " + std::to_string(dt) +
                                  ", substeps = " + std::to_string(substeps) + ")");
        if (k >= kBurnIn) x.push_back(s[0]);
    }

    // Scale determined by the raw values feeding the training window
    // (inputs and targets both), applied everywhere.
    double lo = x[sp.washout], hi = x[sp.washout];
    for (std::size_t j = sp.washout; j <= sp.washout + sp.train; ++j) {
        lo = std::min(lo, x[j]);
        hi = std::max(hi, x[j]);
    }
    if (!(hi > lo)) throw DivergenceError("gen_lorenz_x: degenerate training window");
    AffineScale scale{2.0 / (hi - lo), -2.0 * lo / (hi - lo) - 1.0};

    std::vector<double> u(total_steps), y(total_steps);
    for (std::size_t k = 0; k < total_steps; ++k) {
        u[k] = scale.apply(x[k]);
        y[k] = scale.apply(x[k + 1]);
        if (std::abs(u[k]) > 1.0 + 1e-12)
            throw DivergenceError("gen_lorenz_x: input at step " + std::to_string(k) +
                                  " falls outside the training window's range; "
                                  "use a longer training window");
    }

    TaskData task;
    task.name = "lorenz_x";
    task.inputs = InputSeries::scalar(std::move(u));
    task.targets = std::move(y);
    task.splits = sp;
    task.input_scale = scale;
    task.metric = TaskMetric::Nmse;
    task.metadata = {{"a", detail::Lorenz::kA}, {"b", detail::Lorenz::kB},
                     {"c", detail::Lorenz::kC}, {"dt", dt},
                     {"substeps", static_cast<double>(substeps)},
                     {"burn_in", static_cast<double>(kBurnIn)},
                     {"x0", 0.5}, {"y0", 0.1}, {"z0", 0.2}};
    task.validate();
    return task;
}

} // namespace stochrc
