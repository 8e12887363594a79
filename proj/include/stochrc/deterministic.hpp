#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochrc/esn.hpp"

namespace stochrc {

// Deterministic companion network: the same weights, but each detector
// outputs its firing probability instead of a sampled bit, i.e.
// x_{k+1} = rho1(A x_k + B u_k) applied elementwise. States stay in [0,1]^L
// for the built-in families. Returns the full trajectory x_0..x_T.
inline std::vector<std::vector<double>> run_deterministic_esn(const EsnConfig& cfg,
                                                              const InputSeries& inputs,
                                                              std::span<const double> x0) {
    cfg.validate();
    if (static_cast<int>(x0.size()) != cfg.detectors)
        throw std::invalid_argument("run_deterministic_esn: x0 has wrong length");
    for (double v : x0)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("run_deterministic_esn: x0 component outside [0,1]");

    std::vector<std::vector<double>> traj;
    traj.reserve(inputs.steps() + 1);
    traj.emplace_back(x0.begin(), x0.end());

    std::vector<double> next(static_cast<std::size_t>(cfg.detectors));
    for (std::size_t k = 0; k < inputs.steps(); ++k) {
        const auto u = inputs.at(k);
        detail::check_input_bound(cfg, u);
        const auto& x = traj.back();
        for (int i = 0; i < cfg.detectors; ++i) {
            double zi = 0.0;
            for (int j = 0; j < cfg.detectors; ++j)
                zi += cfg.a_at(i, j) * x[static_cast<std::size_t>(j)];
            for (int j = 0; j < cfg.input_dim; ++j)
                zi += cfg.b_at(i, j) * u[static_cast<std::size_t>(j)];
            detail::check_drive_window(cfg, zi);
            next[static_cast<std::size_t>(i)] = cfg.rho.rho1(zi);
        }
        traj.push_back(next);
    }
    return traj;
}

inline std::vector<std::vector<double>> run_deterministic_esn(const EsnConfig& cfg,
                                                              const InputSeries& inputs) {
    return run_deterministic_esn(cfg, inputs,
                                 std::vector<double>(static_cast<std::size_t>(cfg.detectors), 0.0));
}

} // namespace stochrc
