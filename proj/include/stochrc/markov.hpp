#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stochrc {

inline constexpr double kStochasticTol = 1e-12;

// Distribution over M discrete outcomes. Entries are non-negative and sum
// to 1; construction renormalizes sums that drift by at most kStochasticTol
// and rejects anything worse.
class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<double> entries)
        : entries_(std::move(entries)) {
        if (entries_.empty())
            throw std::invalid_argument("ProbabilityVector: empty");
        double sum = 0.0;
        for (double e : entries_) {
            if (!(e >= 0.0))
                throw std::invalid_argument(
                    "ProbabilityVector: negative or non-finite entry " + std::to_string(e));
            sum += e;
        }
        if (std::abs(sum - 1.0) > kStochasticTol)
            throw std::invalid_argument(
                "ProbabilityVector: entries sum to " + std::to_string(sum) + ", not 1");
        for (double& e : entries_) e /= sum;
    }

    static ProbabilityVector uniform(std::size_t m) {
        return ProbabilityVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
    }

    static ProbabilityVector basis(std::size_t m, std::size_t a) {
        if (a >= m) throw std::invalid_argument("ProbabilityVector::basis: index out of range");
        std::vector<double> e(m, 0.0);
        e[a] = 1.0;
        return ProbabilityVector(std::move(e));
    }

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t a) const { return entries_[a]; }
    const std::vector<double>& entries() const { return entries_; }

private:
    std::vector<double> entries_;
};

// Column-stochastic transition matrix: entry (a, b) is the conditional
// probability of outcome a given prior outcome b, so propagation is the
// plain matrix-vector product P' = p P. Stored column-major; every column
// is itself a distribution. Note the orientation: many chain libraries are
// row-stochastic, this one deliberately is not.
class TransitionMatrix {
public:
    TransitionMatrix(std::size_t m, std::vector<double> column_major)
        : m_(m), entries_(std::move(column_major)) {
        if (m_ == 0 || entries_.size() != m_ * m_)
            throw std::invalid_argument("TransitionMatrix: bad dimensions");
        for (std::size_t b = 0; b < m_; ++b) {
            double sum = 0.0;
            for (std::size_t a = 0; a < m_; ++a) {
                double e = entries_[b * m_ + a];
                if (!(e >= 0.0) || e > 1.0 + kStochasticTol)
                    throw std::invalid_argument(
                        "TransitionMatrix: entry (" + std::to_string(a) + "," +
                        std::to_string(b) + ") = " + std::to_string(e) + " outside [0,1]");
                sum += e;
            }
            if (std::abs(sum - 1.0) > kStochasticTol)
                throw std::invalid_argument(
                    "TransitionMatrix: column " + std::to_string(b) + " sums to " +
                    std::to_string(sum) + ", not 1");
            for (std::size_t a = 0; a < m_; ++a) entries_[b * m_ + a] /= sum;
        }
    }

    static TransitionMatrix identity(std::size_t m) {
        std::vector<double> e(m * m, 0.0);
        for (std::size_t i = 0; i < m; ++i) e[i * m + i] = 1.0;
        return TransitionMatrix(m, std::move(e));
    }

    std::size_t size() const { return m_; }
    double operator()(std::size_t a, std::size_t b) const { return entries_[b * m_ + a]; }
    std::span<const double> column(std::size_t b) const {
        return std::span<const double>(entries_.data() + b * m_, m_);
    }

private:
    std::size_t m_;
    std::vector<double> entries_; // column-major, columns contiguous
};

inline double l1_distance(const ProbabilityVector& x, const ProbabilityVector& y) {
    if (x.size() != y.size()) throw std::invalid_argument("l1_distance: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d += std::abs(x[i] - y[i]);
    return d;
}

// One exact propagation step P' = p P.
inline ProbabilityVector propagate(const TransitionMatrix& p, const ProbabilityVector& P) {
    const std::size_t m = p.size();
    if (P.size() != m) throw std::invalid_argument("propagate: dimension mismatch");
    std::vector<double> out(m, 0.0);
    for (std::size_t b = 0; b < m; ++b) {
        const double pb = P[b];
        if (pb == 0.0) continue;
        const auto col = p.column(b);
        for (std::size_t a = 0; a < m; ++a) out[a] += col[a] * pb;
    }
    return ProbabilityVector(std::move(out));
}

// Tightest epsilon with ||p (P1 - P2)||_1 <= epsilon ||P1 - P2||_1 over all
// distribution pairs. Equals half the maximum 1-norm distance between any
// two columns (the extreme pairs P1 - P2 are differences of basis vectors),
// the classical ergodicity coefficient of the chain. Computed per pair as
// 1 - sum_a min(c1[a], c2[a]), which is identical for unit-sum columns and
// exact at the critical boundary: columns with disjoint support yield 1.0
// bit-for-bit, so the strict-contraction test below agrees with this
// coefficient with no tolerance games. O(M^3), fine at the dense sizes this
// library targets.
inline double contraction_coefficient(const TransitionMatrix& p) {
    const std::size_t m = p.size();
    double worst = 0.0;
    for (std::size_t b1 = 0; b1 + 1 < m; ++b1) {
        const auto c1 = p.column(b1);
        for (std::size_t b2 = b1 + 1; b2 < m; ++b2) {
            const auto c2 = p.column(b2);
            double overlap = 0.0;
            for (std::size_t a = 0; a < m; ++a) overlap += std::min(c1[a], c2[a]);
            const double d = std::max(0.0, std::min(1.0, 1.0 - overlap));
            if (d > worst) worst = d;
        }
    }
    return worst;
}

// Strict contraction test: true iff every element of p^T p is positive,
// i.e. every pair of columns has overlapping support. Exact zero is the
// only way to fail since entries are non-negative, so no tolerance.
inline bool is_contracting(const TransitionMatrix& p) {
    const std::size_t m = p.size();
    for (std::size_t b1 = 0; b1 < m; ++b1) {
        const auto c1 = p.column(b1);
        for (std::size_t b2 = b1; b2 < m; ++b2) {
            const auto c2 = p.column(b2);
            bool overlap = false;
            for (std::size_t a = 0; a < m; ++a) {
                if (c1[a] > 0.0 && c2[a] > 0.0) { overlap = true; break; }
            }
            if (!overlap) return false;
        }
    }
    return true;
}

// Sufficient condition for contraction: some row is strictly positive, so
// every column overlaps every other on that row.
inline bool has_positive_row(const TransitionMatrix& p) {
    const std::size_t m = p.size();
    for (std::size_t a = 0; a < m; ++a) {
        bool all = true;
        for (std::size_t b = 0; b < m; ++b) {
            if (!(p(a, b) > 0.0)) { all = false; break; }
        }
        if (all) return true;
    }
    return false;
}

} // namespace stochrc
