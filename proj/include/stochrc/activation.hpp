#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochrc {

// Probability that a single binary detector fires, as a function of its
// scalar drive. sin^2 is the computational-basis measurement statistic of a
// driven qubit; delta shifts the working point.
inline double rho_qubit(double zeta, double delta) {
    if (!std::isfinite(zeta) || !std::isfinite(delta))
        throw std::invalid_argument("rho_qubit: non-finite input");
    const double s = std::sin(zeta + delta);
    return s * s;
}

// Click probability of a single-photon detector watching a coherent beam of
// amplitude zeta + d: one minus the vacuum probability.
inline double rho_optical(double zeta, double d) {
    if (!std::isfinite(zeta) || !std::isfinite(d))
        throw std::invalid_argument("rho_optical: non-finite input");
    const double amp = zeta + d;
    return 1.0 - std::exp(-amp * amp);
}

enum class ActivationKind { Qubit, Optical, Constant };

inline const char* to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Qubit: return "qubit";
        case ActivationKind::Optical: return "optical";
        case ActivationKind::Constant: return "constant";
    }
    return "?";
}

// Two-outcome controlled distribution rho(zeta) = (rho0, rho1) with
// rho0 = 1 - rho1. The Constant family ignores its argument and exists as
// a degenerate test fixture (it fails monotonicity by construction).
struct ActivationDistribution {
    ActivationKind kind = ActivationKind::Qubit;
    double shift = 0.0; // delta for Qubit, d for Optical, the value itself for Constant

    ActivationDistribution() = default;
    ActivationDistribution(ActivationKind k, double s) : kind(k), shift(s) {
        if (!std::isfinite(shift))
            throw std::invalid_argument("ActivationDistribution: non-finite shift");
        if (kind == ActivationKind::Constant && (shift < 0.0 || shift > 1.0))
            throw std::invalid_argument("ActivationDistribution: constant value outside [0,1]");
    }

    // Shifts below are the largest-window choices for each family.
    static ActivationDistribution qubit(double delta = kDefaultQubitShift) {
        return {ActivationKind::Qubit, delta};
    }
    static ActivationDistribution optical(double d = 1.0) {
        return {ActivationKind::Optical, d};
    }
    static ActivationDistribution constant(double c) {
        return {ActivationKind::Constant, c};
    }

    double rho1(double zeta) const {
        switch (kind) {
            case ActivationKind::Qubit: return rho_qubit(zeta, shift);
            case ActivationKind::Optical: return rho_optical(zeta, shift);
            case ActivationKind::Constant: return shift;
        }
        throw std::logic_error("ActivationDistribution: bad kind");
    }

    double rho0(double zeta) const { return 1.0 - rho1(zeta); }

    static constexpr double kDefaultQubitShift = 0.78539816339744830961; // pi/4
};

// Grid-based certification of the three properties an activation family
// needs for its generated reservoir class to approximate arbitrary fading-
// memory maps: continuity, probabilities bounded away from certainty, and
// strict monotonicity of rho1 over the drive window [-r_zeta, r_zeta].
struct UniversalityReport {
    bool continuous_ok = false;
    bool bounded_away_ok = false;
    bool monotonic_ok = false;
    bool overall = false;
};

inline UniversalityReport check_universality_criteria(const ActivationDistribution& rho,
                                                      double r_zeta, int grid_points) {
    if (!(r_zeta > 0.0)) throw std::invalid_argument("check_universality_criteria: r_zeta must be > 0");
    if (grid_points < 3) throw std::invalid_argument("check_universality_criteria: need >= 3 grid points");

    std::vector<double> v(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        const double zeta = -r_zeta + 2.0 * r_zeta * static_cast<double>(i) / (grid_points - 1);
        v[static_cast<std::size_t>(i)] = rho.rho1(zeta);
    }

    UniversalityReport rep;

    // Continuity heuristic: on a uniform grid a continuous function has no
    // adjacent jump wildly larger than the typical one. Both built-in
    // families are analytically continuous; this check is for tabulated
    // user-supplied distributions. Threshold: max jump <= 5x median jump.
    std::vector<double> jumps(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) jumps[i] = std::abs(v[i + 1] - v[i]);
    std::vector<double> sorted = jumps;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double maxjump = sorted.back();
    rep.continuous_ok = (maxjump <= 5.0 * median) || maxjump == 0.0;

    bool all_pos = true, all_below_one = true;
    for (double x : v) {
        if (!(x > 0.0)) all_pos = false;
        if (!(x < 1.0)) all_below_one = false;
    }
    rep.bounded_away_ok = all_pos || all_below_one;

    bool inc = true, dec = true;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (!(v[i + 1] > v[i])) inc = false;
        if (!(v[i + 1] < v[i])) dec = false;
    }
    rep.monotonic_ok = inc || dec;

    rep.overall = rep.continuous_ok && rep.bounded_away_ok && rep.monotonic_ok;
    return rep;
}

} // namespace stochrc
