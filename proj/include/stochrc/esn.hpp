#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochrc/activation.hpp"
#include "stochrc/error.hpp"
#include "stochrc/markov.hpp"
#include "stochrc/rng.hpp"

namespace stochrc {

// Time-major input sequence u_0..u_{T-1}, each step an n-vector.
class InputSeries {
public:
    InputSeries() = default;
    InputSeries(std::vector<double> data, int dim) : data_(std::move(data)), dim_(dim) {
        if (dim_ < 1 || data_.size() % static_cast<std::size_t>(dim_) != 0)
            throw std::invalid_argument("InputSeries: data size not a multiple of dim");
    }
    static InputSeries scalar(std::vector<double> u) { return InputSeries(std::move(u), 1); }

    std::size_t steps() const { return data_.size() / static_cast<std::size_t>(dim_); }
    int dim() const { return dim_; }
    std::span<const double> at(std::size_t k) const {
        return std::span<const double>(data_.data() + k * static_cast<std::size_t>(dim_),
                                       static_cast<std::size_t>(dim_));
    }
    const std::vector<double>& raw() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    std::vector<double> data_;
    int dim_ = 1;
};

// Probability-space operations materialize M = 2^L entries; this cap keeps
// a dense transition matrix under ~8 MB. The deterministic companion
// network never builds the M-dimensional space and may use more detectors.
inline constexpr int kMaxDetectors = 10;
inline constexpr int kMaxDetectorsDeterministic = 63;

// A stochastic echo state network: L binary detectors driven through
// z = A x + B u, each detector firing independently with probability
// rho1(z_i). Weights must satisfy the worst-case row bound
//   sum_j |A_ij| + sum_j |B_ij| * r_u  <=  r_zeta
// so that every drive component stays inside the activation's certified
// window for any outcome x in {0,1}^L and any admissible input.
struct EsnConfig {
    int detectors = 1;          // L
    int input_dim = 1;          // n
    std::vector<double> a;      // L x L, row-major recurrent weights
    std::vector<double> b;      // L x n, row-major input weights
    ActivationDistribution rho;
    double r_zeta = ActivationDistribution::kDefaultQubitShift;
    double r_u = 1.0;
    std::uint64_t seed = 0;     // provenance when drawn by sample_weights

    std::size_t outcomes() const { return std::size_t{1} << detectors; }

    double a_at(int i, int j) const { return a[static_cast<std::size_t>(i) * detectors + j]; }
    double b_at(int i, int j) const { return b[static_cast<std::size_t>(i) * input_dim + j]; }

    void validate() const {
        if (detectors < 1 || detectors > kMaxDetectorsDeterministic)
            throw std::invalid_argument("EsnConfig: detectors must be in [1, " +
                                        std::to_string(kMaxDetectorsDeterministic) + "]");
        if (input_dim < 1) throw std::invalid_argument("EsnConfig: input_dim must be >= 1");
        if (a.size() != static_cast<std::size_t>(detectors) * detectors)
            throw std::invalid_argument("EsnConfig: A has wrong shape");
        if (b.size() != static_cast<std::size_t>(detectors) * input_dim)
            throw std::invalid_argument("EsnConfig: B has wrong shape");
        if (!(r_zeta > 0.0) || !(r_u > 0.0))
            throw std::invalid_argument("EsnConfig: bounds must be positive");
        for (int i = 0; i < detectors; ++i) {
            double budget = 0.0;
            for (int j = 0; j < detectors; ++j) budget += std::abs(a_at(i, j));
            for (int j = 0; j < input_dim; ++j) budget += std::abs(b_at(i, j)) * r_u;
            if (budget > r_zeta + 1e-12)
                throw std::invalid_argument(
                    "EsnConfig: row " + std::to_string(i) + " worst-case drive " +
                    std::to_string(budget) + " exceeds r_zeta = " + std::to_string(r_zeta));
        }
    }
};

// Little-endian outcome indexing: bit i of the index is detector i's bit.
inline std::vector<int> outcome_bits(std::size_t a, int detectors) {
    if (detectors < 1 || a >= (std::size_t{1} << detectors))
        throw std::invalid_argument("outcome_bits: index out of range");
    std::vector<int> bits(static_cast<std::size_t>(detectors));
    for (int i = 0; i < detectors; ++i) bits[static_cast<std::size_t>(i)] = static_cast<int>((a >> i) & 1u);
    return bits;
}

inline std::size_t bits_to_index(std::span<const int> bits) {
    std::size_t a = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("bits_to_index: non-binary bit");
        a |= static_cast<std::size_t>(bits[i]) << i;
    }
    return a;
}

namespace detail {

inline void check_probability_space_cap(const EsnConfig& cfg, const char* op) {
    if (cfg.detectors > kMaxDetectors)
        throw std::invalid_argument(std::string(op) + ": probability-space operations are " +
                                    "capped at " + std::to_string(kMaxDetectors) +
                                    " detectors (M = 2^L memory bound)");
}

// Drive vector z = A x^(b) + B u for outcome index b.
inline void drive_for_outcome(const EsnConfig& cfg, std::size_t b, std::span<const double> u,
                              std::vector<double>& z) {
    z.assign(static_cast<std::size_t>(cfg.detectors), 0.0);
    for (int i = 0; i < cfg.detectors; ++i) {
        double zi = 0.0;
        for (int j = 0; j < cfg.detectors; ++j)
            if ((b >> j) & 1u) zi += cfg.a_at(i, j);
        for (int j = 0; j < cfg.input_dim; ++j) zi += cfg.b_at(i, j) * u[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(i)] = zi;
    }
}

inline void check_input_bound(const EsnConfig& cfg, std::span<const double> u) {
    if (static_cast<int>(u.size()) != cfg.input_dim)
        throw std::invalid_argument("input dimension mismatch");
    for (double x : u)
        if (!(std::abs(x) <= cfg.r_u + 1e-12))
            throw DivergenceError("input component " + std::to_string(x) +
                                  " exceeds bound r_u = " + std::to_string(cfg.r_u));
}

inline void check_drive_window(const EsnConfig& cfg, double zi) {
    if (!(std::abs(zi) <= cfg.r_zeta + 1e-12))
        throw DivergenceError("drive component " + std::to_string(zi) +
                              " outside the activation window [-" + std::to_string(cfg.r_zeta) +
                              ", " + std::to_string(cfg.r_zeta) + "]");
}

} // namespace detail

// The controlled transition matrix p(u). Column b is the product
// distribution of the L independent detectors conditioned on prior outcome
// x^(b): an iterated Kronecker product of per-detector pairs
// (rho0(z_i), rho1(z_i)), assembled in O(M) per column.
inline TransitionMatrix build_transition_matrix(const EsnConfig& cfg, std::span<const double> u) {
    detail::check_probability_space_cap(cfg, "build_transition_matrix");
    detail::check_input_bound(cfg, u);
    const std::size_t m = cfg.outcomes();
    std::vector<double> entries(m * m);
    std::vector<double> z;
    for (std::size_t b = 0; b < m; ++b) {
        detail::drive_for_outcome(cfg, b, u, z);
        double* col = entries.data() + b * m;
        col[0] = 1.0;
        std::size_t filled = 1;
        for (int i = 0; i < cfg.detectors; ++i) {
            const double zi = z[static_cast<std::size_t>(i)];
            detail::check_drive_window(cfg, zi);
            const double r1 = cfg.rho.rho1(zi);
            const double r0 = 1.0 - r1;
            for (std::size_t q = 0; q < filled; ++q) {
                col[filled + q] = col[q] * r1; // bit i set
                col[q] *= r0;                  // bit i clear
            }
            filled *= 2;
        }
    }
    return TransitionMatrix(m, std::move(entries));
}

// Random weights with the row bound enforced by construction: entries are
// i.i.d. uniform on [-1, 1), then any row whose worst-case drive exceeds
// safety * r_zeta is shrunk onto that budget. safety < 1 keeps drives
// strictly inside the open window. Draw order is A row-major then B
// row-major, pinned for reproducibility.
inline EsnConfig sample_weights(std::uint64_t seed, int detectors, int input_dim,
                                const ActivationDistribution& rho, double r_zeta, double r_u,
                                double safety = 0.99) {
    if (!(safety > 0.0) || safety > 1.0)
        throw std::invalid_argument("sample_weights: safety must be in (0, 1]");
    EsnConfig cfg;
    cfg.detectors = detectors;
    cfg.input_dim = input_dim;
    cfg.rho = rho;
    cfg.r_zeta = r_zeta;
    cfg.r_u = r_u;
    cfg.seed = seed;
    SplitMix64 g(seed);
    cfg.a.resize(static_cast<std::size_t>(detectors) * detectors);
    cfg.b.resize(static_cast<std::size_t>(detectors) * input_dim);
    for (double& w : cfg.a) w = g.uniform_pm1();
    for (double& w : cfg.b) w = g.uniform_pm1();
    for (int i = 0; i < detectors; ++i) {
        double budget = 0.0;
        for (int j = 0; j < detectors; ++j) budget += std::abs(cfg.a_at(i, j));
        for (int j = 0; j < input_dim; ++j) budget += std::abs(cfg.b_at(i, j)) * r_u;
        const double cap = safety * r_zeta;
        if (budget > cap) {
            const double s = cap / budget;
            for (int j = 0; j < detectors; ++j)
                cfg.a[static_cast<std::size_t>(i) * detectors + j] *= s;
            for (int j = 0; j < input_dim; ++j)
                cfg.b[static_cast<std::size_t>(i) * input_dim + j] *= s;
        }
    }
    cfg.validate();
    return cfg;
}

// Exact probability trajectory P_0..P_T under inputs u_0..u_{T-1}.
inline std::vector<ProbabilityVector> simulate_exact(const EsnConfig& cfg, const InputSeries& inputs,
                                                     const ProbabilityVector& p0) {
    cfg.validate();
    detail::check_probability_space_cap(cfg, "simulate_exact");
    if (p0.size() != cfg.outcomes())
        throw std::invalid_argument("simulate_exact: initial distribution has wrong size");
    std::vector<ProbabilityVector> traj;
    traj.reserve(inputs.steps() + 1);
    traj.push_back(p0);
    for (std::size_t k = 0; k < inputs.steps(); ++k) {
        const TransitionMatrix p = build_transition_matrix(cfg, inputs.at(k));
        traj.push_back(propagate(p, traj.back()));
    }
    return traj;
}

inline std::vector<ProbabilityVector> simulate_exact(const EsnConfig& cfg, const InputSeries& inputs) {
    return simulate_exact(cfg, inputs, ProbabilityVector::uniform(cfg.outcomes()));
}

} // namespace stochrc
