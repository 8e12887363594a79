#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stochrc/markov.hpp"

namespace stochrc {

// N readout vectors of width D, one per step. Stochastic readouts are the
// probability vectors themselves (D = M; no bias column, the constant
// already lies in their span since rows sum to 1). Deterministic readouts
// carry an explicit trailing 1 (D = L + 1).
class ReadoutSeries {
public:
    ReadoutSeries() = default;
    ReadoutSeries(std::vector<double> rows, std::size_t dim)
        : rows_(std::move(rows)), dim_(dim) {
        if (dim_ == 0 || rows_.size() % dim_ != 0)
            throw std::invalid_argument("ReadoutSeries: data size not a multiple of dim");
    }

    static ReadoutSeries from_probabilities(std::span<const ProbabilityVector> series) {
        if (series.empty()) throw std::invalid_argument("ReadoutSeries: empty series");
        const std::size_t d = series.front().size();
        std::vector<double> rows;
        rows.reserve(series.size() * d);
        for (const auto& p : series) {
            if (p.size() != d) throw std::invalid_argument("ReadoutSeries: ragged series");
            rows.insert(rows.end(), p.entries().begin(), p.entries().end());
        }
        return ReadoutSeries(std::move(rows), d);
    }

    // States as rows with a bias column of ones appended.
    static ReadoutSeries from_states(std::span<const std::vector<double>> states) {
        if (states.empty()) throw std::invalid_argument("ReadoutSeries: empty series");
        const std::size_t l = states.front().size();
        std::vector<double> rows;
        rows.reserve(states.size() * (l + 1));
        for (const auto& x : states) {
            if (x.size() != l) throw std::invalid_argument("ReadoutSeries: ragged series");
            rows.insert(rows.end(), x.begin(), x.end());
            rows.push_back(1.0);
        }
        return ReadoutSeries(std::move(rows), l + 1);
    }

    std::size_t count() const { return rows_.empty() ? 0 : rows_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> row(std::size_t k) const {
        return std::span<const double>(rows_.data() + k * dim_, dim_);
    }
    const std::vector<double>& data() const { return rows_; }

    ReadoutSeries slice(std::size_t begin, std::size_t n) const {
        if (begin + n > count()) throw std::invalid_argument("ReadoutSeries::slice: out of range");
        return ReadoutSeries(std::vector<double>(rows_.begin() + static_cast<std::ptrdiff_t>(begin * dim_),
                                                 rows_.begin() + static_cast<std::ptrdiff_t>((begin + n) * dim_)),
                             dim_);
    }

private:
    std::vector<double> rows_;
    std::size_t dim_ = 1;
};

struct FitResult {
    std::vector<double> weights; // D
    double lambda = 0.0;
    std::vector<double> gram;    // D x D row-major, K = (1/N) sum_k r_k r_k^T
    double train_nmse = std::numeric_limits<double>::quiet_NaN();
    std::size_t dim = 0;
};

inline std::vector<double> predict(std::span<const double> weights, const ReadoutSeries& readouts) {
    if (weights.size() != readouts.dim())
        throw std::invalid_argument("predict: weight/readout dimension mismatch");
    std::vector<double> out(readouts.count());
    for (std::size_t k = 0; k < readouts.count(); ++k) {
        const auto r = readouts.row(k);
        double acc = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) acc += weights[j] * r[j];
        out[k] = acc;
    }
    return out;
}

// Normalized mean squared error over the evaluation window:
// sum (yhat - y)^2 / sum (y - mean(y))^2.
inline double nmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("nmse: length mismatch");
    if (targets.size() < 2) throw std::invalid_argument("nmse: need at least 2 targets");
    double mean = 0.0;
    for (double y : targets) mean += y;
    mean /= static_cast<double>(targets.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        num += (predictions[k] - targets[k]) * (predictions[k] - targets[k]);
        den += (targets[k] - mean) * (targets[k] - mean);
    }
    if (den == 0.0) throw std::invalid_argument("nmse: constant targets (zero normalizer)");
    return num / den;
}

// Percentage of steps misclassified by thresholding at 0.5; an exact tie
// counts as class 1.
inline double classification_error_rate(std::span<const double> predictions,
                                        std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("classification_error_rate: length mismatch");
    if (predictions.empty())
        throw std::invalid_argument("classification_error_rate: empty input");
    std::size_t wrong = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] != 0.0 && targets[k] != 1.0)
            throw std::invalid_argument("classification_error_rate: non-binary target");
        const bool pred_one = predictions[k] >= 0.5;
        const bool is_one = targets[k] == 1.0;
        if (pred_one != is_one) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(targets.size());
}

// Ridge regression on the normal equations: solve (K + lambda I) W = c with
// K = (1/N) sum r_k r_k^T and c = (1/N) sum r_k y_k. Cholesky first, a
// symmetric eigendecomposition as fallback, and iterative refinement until
// the residual meets ||(K + lambda I) W - c||_inf < 1e-10 max(1, ||c||_inf).
inline FitResult fit_ridge(const ReadoutSeries& readouts, std::span<const double> targets,
                           double lambda) {
    const std::size_t n = readouts.count();
    const std::size_t d = readouts.dim();
    if (n == 0) throw std::invalid_argument("fit_ridge: empty readouts");
    if (targets.size() != n) throw std::invalid_argument("fit_ridge: target length mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_ridge: lambda must be >= 0");

    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        rows(readouts.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::Map<const VectorXd> y(targets.data(), static_cast<Eigen::Index>(n));

    const double inv_n = 1.0 / static_cast<double>(n);
    MatrixXd gram = (rows.transpose() * rows) * inv_n;
    gram = 0.5 * (gram + gram.transpose()); // exact symmetry
    VectorXd rhs = (rows.transpose() * y) * inv_n;

    MatrixXd reg = gram;
    reg.diagonal().array() += lambda;

    if (lambda == 0.0) {
        // An unregularized solve must fail loudly on a rank-deficient Gram
        // even when the system happens to be consistent.
        Eigen::SelfAdjointEigenSolver<MatrixXd> probe(gram, Eigen::EigenvaluesOnly);
        const double max_ev = probe.eigenvalues().cwiseAbs().maxCoeff();
        if (probe.eigenvalues().minCoeff() <= 1e-13 * std::max(max_ev, 1e-300))
            throw std::invalid_argument(
                "fit_ridge: Gram matrix is singular at lambda = 0; use lambda > 0 "
                "(Tikhonov regularization)");
    }

    const double rhs_scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    const double res_tol = 1e-10 * rhs_scale;

    VectorXd w;
    bool solved = false;

    Eigen::LLT<MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
        w = llt.solve(rhs);
        for (int it = 0; it < 4; ++it) {
            VectorXd res = rhs - reg * w;
            if (res.lpNorm<Eigen::Infinity>() < res_tol) { solved = true; break; }
            w += llt.solve(res);
        }
        if (!solved && (rhs - reg * w).lpNorm<Eigen::Infinity>() < res_tol) solved = true;
    }

    if (!solved) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(reg);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("fit_ridge: eigendecomposition failed");
        const VectorXd& ev = eig.eigenvalues();
        const double floor_ev = ev.cwiseAbs().maxCoeff() * 1e-14;
        if (ev.minCoeff() <= floor_ev && lambda == 0.0)
            throw std::invalid_argument(
                "fit_ridge: Gram matrix is singular at lambda = 0; use lambda > 0 "
                "(Tikhonov regularization)");
        VectorXd inv = ev.unaryExpr([&](double v) { return v > floor_ev ? 1.0 / v : 0.0; });
        w = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * rhs;
        for (int it = 0; it < 4; ++it) {
            VectorXd res = rhs - reg * w;
            if (res.lpNorm<Eigen::Infinity>() < res_tol) break;
            w += eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * res;
        }
        if ((rhs - reg * w).lpNorm<Eigen::Infinity>() >= res_tol)
            throw std::runtime_error("fit_ridge: solver failed to reach the residual tolerance");
    }

    FitResult fit;
    fit.lambda = lambda;
    fit.dim = d;
    fit.weights.assign(w.data(), w.data() + w.size());
    fit.gram.resize(d * d);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        fit.gram.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) = gram;

    // Training-window NMSE; NaN when the targets are constant.
    double mean = y.mean();
    double den = (y.array() - mean).square().sum();
    if (den > 0.0 && n >= 2) {
        const VectorXd pred = rows * w;
        fit.train_nmse = (pred - y).squaredNorm() / den;
    }
    return fit;
}

} // namespace stochrc
