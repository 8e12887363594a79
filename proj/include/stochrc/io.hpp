#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochrc/analysis.hpp"
#include "stochrc/esn.hpp"
#include "stochrc/sampler.hpp"
#include "stochrc/tasks.hpp"
#include "stochrc/training.hpp"

namespace stochrc {

// Shortest round-trip decimal form, locale-independent. Every number that
// reaches a results file goes through here so emitted bytes are a pure
// function of the values.
inline std::string format_double(double v) {
    std::string best;
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v && (best.empty() || std::string(buf).size() < best.size())) best = buf;
    }
    return best.empty() ? "nan" : best;
}

inline ActivationKind activation_kind_from_string(const std::string& s) {
    if (s == "qubit") return ActivationKind::Qubit;
    if (s == "optical") return ActivationKind::Optical;
    if (s == "constant") return ActivationKind::Constant;
    throw std::invalid_argument("unknown activation kind: " + s);
}

inline nlohmann::json to_json(const EsnConfig& cfg) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < cfg.detectors; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < cfg.detectors; ++j) row.push_back(cfg.a_at(i, j));
        a.push_back(row);
    }
    nlohmann::json b = nlohmann::json::array();
    for (int i = 0; i < cfg.detectors; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < cfg.input_dim; ++j) row.push_back(cfg.b_at(i, j));
        b.push_back(row);
    }
    return nlohmann::json{{"kind", to_string(cfg.rho.kind)},
                          {"shift", cfg.rho.shift},
                          {"A", a},
                          {"B", b},
                          {"r_zeta", cfg.r_zeta},
                          {"r_u", cfg.r_u},
                          {"seed", cfg.seed}};
}

inline EsnConfig esn_config_from_json(const nlohmann::json& j) {
    EsnConfig cfg;
    cfg.rho = ActivationDistribution(activation_kind_from_string(j.at("kind").get<std::string>()),
                                     j.at("shift").get<double>());
    const auto& a = j.at("A");
    const auto& b = j.at("B");
    cfg.detectors = static_cast<int>(a.size());
    if (cfg.detectors < 1) throw std::invalid_argument("EsnConfig json: empty A");
    cfg.input_dim = static_cast<int>(b.at(0).size());
    for (const auto& row : a) {
        if (static_cast<int>(row.size()) != cfg.detectors)
            throw std::invalid_argument("EsnConfig json: A is not square");
        for (const auto& v : row) cfg.a.push_back(v.get<double>());
    }
    for (const auto& row : b) {
        if (static_cast<int>(row.size()) != cfg.input_dim)
            throw std::invalid_argument("EsnConfig json: ragged B");
        for (const auto& v : row) cfg.b.push_back(v.get<double>());
    }
    cfg.r_zeta = j.at("r_zeta").get<double>();
    cfg.r_u = j.at("r_u").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

inline nlohmann::json to_json(const FitResult& fit) {
    double lam_min = 0.0, lam_max = 0.0;
    if (fit.dim > 0) {
        Eigen::Map<const Eigen::MatrixXd> k(fit.gram.data(), static_cast<Eigen::Index>(fit.dim),
                                            static_cast<Eigen::Index>(fit.dim));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
        lam_min = eig.eigenvalues().minCoeff();
        lam_max = eig.eigenvalues().maxCoeff();
    }
    return nlohmann::json{{"W", fit.weights},
                          {"lambda", fit.lambda},
                          {"train_nmse", fit.train_nmse},
                          {"gram_eigenvalues", {{"min", lam_min}, {"max", lam_max}}}};
}

inline void write_csv(std::ostream& os, const CountTable& table) {
    os << "k,a,count\n";
    for (std::size_t k = 0; k < table.steps; ++k)
        for (std::size_t a = 0; a < table.outcomes; ++a)
            os << k << ',' << a << ',' << table.at(k, a) << '\n';
}

inline void write_csv(std::ostream& os, const TaskData& task) {
    for (const auto& [key, value] : task.metadata)
        os << "# " << key << " = " << format_double(value) << '\n';
    os << "k,u,y,split\n";
    for (std::size_t k = 0; k < task.steps(); ++k) {
        os << k << ',';
        const auto u = task.inputs.at(k);
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (j) os << ';';
            os << format_double(u[j]);
        }
        const char* split = k < task.splits.washout                       ? "washout"
                            : k < task.splits.washout + task.splits.train ? "train"
                                                                          : "test";
        os << ',' << format_double(task.targets[k]) << ',' << split << '\n';
    }
}

inline void write_csv(std::ostream& os, const NoiseSweepResult& sweep) {
    os << "n_runs,metric,exact_metric,lambda_min\n";
    for (std::size_t i = 0; i < sweep.runs_grid.size(); ++i)
        os << sweep.runs_grid[i] << ',' << format_double(sweep.metric_values[i]) << ','
           << format_double(sweep.exact_metric) << ',' << format_double(sweep.lambda_min) << '\n';
}

// Deterministic state trajectory, one row per step.
inline void write_csv(std::ostream& os, const std::vector<std::vector<double>>& states) {
    if (states.empty()) return;
    os << "k";
    for (std::size_t i = 0; i < states.front().size(); ++i) os << ",x" << i;
    os << '\n';
    for (std::size_t k = 0; k < states.size(); ++k) {
        os << k;
        for (double v : states[k]) os << ',' << format_double(v);
        os << '\n';
    }
}

} // namespace stochrc
