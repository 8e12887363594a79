#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochrc/error.hpp"
#include "stochrc/experiment.hpp"
#include "stochrc/io.hpp"

namespace stochrc {

inline TaskKind task_kind_from_string(const std::string& s) {
    if (s == "sine_square") return TaskKind::SineSquare;
    if (s == "lorenz_x") return TaskKind::LorenzX;
    throw ConfigError("experiment.task: unknown value '" + s + "'");
}
inline Family family_from_string(const std::string& s) {
    if (s == "qubit") return Family::Qubit;
    if (s == "optical") return Family::Optical;
    throw ConfigError("experiment.family: unknown value '" + s + "'");
}
inline RunMode run_mode_from_string(const std::string& s) {
    if (s == "deterministic") return RunMode::Deterministic;
    if (s == "stochastic_exact") return RunMode::StochasticExact;
    if (s == "stochastic_shots") return RunMode::StochasticShots;
    throw ConfigError("experiment.mode: unknown value '" + s + "'");
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.schema_version = j.at("schema_version").get<int>();
        const auto& e = j.at("experiment");
        cfg.task = task_kind_from_string(e.at("task").get<std::string>());
        cfg.family = family_from_string(e.at("family").get<std::string>());
        cfg.mode = run_mode_from_string(e.at("mode").get<std::string>());
        cfg.detectors = e.at("detectors").get<std::vector<int>>();
        if (e.contains("n_runs") && !e.at("n_runs").is_null())
            cfg.n_runs = e.at("n_runs").get<std::int64_t>();
        cfg.n_samples = e.at("n_samples").get<int>();
        cfg.master_seed = e.at("master_seed").get<std::uint64_t>();
        if (e.contains("lambda")) cfg.lambda = e.at("lambda").get<double>();
        if (e.contains("runs_grid")) cfg.runs_grid = e.at("runs_grid").get<std::vector<std::int64_t>>();
        if (e.contains("detector_cap")) cfg.detector_cap = e.at("detector_cap").get<int>();
        if (e.contains("safety")) cfg.safety = e.at("safety").get<double>();
        if (j.contains("splits")) {
            const auto& s = j.at("splits");
            cfg.splits = SplitSpec{s.at("washout").get<std::size_t>(),
                                   s.at("train").get<std::size_t>(),
                                   s.at("test").get<std::size_t>()};
        }
        if (j.contains("task_params")) {
            const auto& t = j.at("task_params");
            if (t.contains("dt")) cfg.dt = t.at("dt").get<double>();
            if (t.contains("substeps")) cfg.substeps = t.at("substeps").get<int>();
            if (t.contains("label_seed")) cfg.label_seed = t.at("label_seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config json: ") + ex.what());
    }
    cfg.validate();
    return cfg;
}

inline nlohmann::json to_json(const ExperimentRecord& record) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : record.rows)
        rows.push_back({{"detectors", r.detectors},
                        {"sample", r.sample},
                        {"seed", r.seed},
                        {"metric", r.metric},
                        {"lambda_min", r.lambda_min}});
    nlohmann::json aggs = nlohmann::json::array();
    for (const auto& a : record.aggregates)
        aggs.push_back({{"detectors", a.detectors},
                        {"metric_mean", a.metric_mean},
                        {"metric_std", a.metric_std},
                        {"lambda_min_mean", a.lambda_min_mean}});
    nlohmann::json j;
    j["config"] = to_json(record.config);
    // Shot count is meaningless outside shots mode.
    if (record.config.mode != RunMode::StochasticShots) j["config"]["experiment"]["n_runs"] = nullptr;
    j["config_hash"] = record.config_hash;
    j["rows"] = rows;
    j["aggregates"] = aggs;
    return j;
}

inline ExperimentRecord experiment_record_from_json(const nlohmann::json& j) {
    ExperimentRecord record;
    record.config = experiment_config_from_json(j.at("config"));
    record.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& r : j.at("rows"))
        record.rows.push_back({r.at("detectors").get<int>(), r.at("sample").get<int>(),
                               r.at("seed").get<std::uint64_t>(), r.at("metric").get<double>(),
                               r.at("lambda_min").get<double>()});
    for (const auto& a : j.at("aggregates"))
        record.aggregates.push_back({a.at("detectors").get<int>(), a.at("metric_mean").get<double>(),
                                     a.at("metric_std").get<double>(),
                                     a.at("lambda_min_mean").get<double>()});
    return record;
}

inline bool records_equal(const ExperimentRecord& x, const ExperimentRecord& y) {
    return to_json(x) == to_json(y);
}

inline void write_csv(std::ostream& os, const ExperimentRecord& record) {
    const bool shots = record.config.mode == RunMode::StochasticShots;
    const std::string n_runs = shots ? std::to_string(record.config.n_runs) : std::string();
    os << "detectors,sample,seed,mode,n_runs,metric,lambda_min\n";
    for (const auto& r : record.rows)
        os << r.detectors << ',' << r.sample << ',' << r.seed << ','
           << to_string(record.config.mode) << ',' << n_runs << ',' << format_double(r.metric)
           << ',' << format_double(r.lambda_min) << '\n';
    for (const auto& a : record.aggregates) {
        os << a.detectors << ",mean,," << to_string(record.config.mode) << ',' << n_runs << ','
           << format_double(a.metric_mean) << ',' << format_double(a.lambda_min_mean) << '\n';
        os << a.detectors << ",std,," << to_string(record.config.mode) << ',' << n_runs << ','
           << format_double(a.metric_std) << ",\n";
    }
}

namespace detail {

// Minimal static chart: aggregate metric vs detector count with one-sigma
// error bars. NMSE plots use a log metric axis.
inline void write_svg(std::ostream& os, const ExperimentRecord& record) {
    if (record.aggregates.empty())
        throw std::invalid_argument("write_svg: record has no aggregates");
    const bool logy = record.config.task == TaskKind::LorenzX;
    const int width = 640, height = 440, ml = 70, mr = 20, mt = 30, mb = 50;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& a : record.aggregates) {
        const double low = logy ? std::max(a.metric_mean - a.metric_std, a.metric_mean * 1e-2)
                                : a.metric_mean - a.metric_std;
        lo = std::min(lo, low);
        hi = std::max(hi, a.metric_mean + a.metric_std);
    }
    if (!(hi > lo)) { hi = lo + 1.0; }
    if (logy) {
        lo = std::max(lo, 1e-12);
        hi = std::max(hi, lo * 10.0);
    }

    int dmin = record.aggregates.front().detectors, dmax = dmin;
    for (const auto& a : record.aggregates) {
        dmin = std::min(dmin, a.detectors);
        dmax = std::max(dmax, a.detectors);
    }
    if (dmax == dmin) dmax = dmin + 1;

    const auto xpix = [&](double d) {
        return ml + (d - dmin) / double(dmax - dmin) * (width - ml - mr);
    };
    const auto ypix = [&](double v) {
        const double t = logy ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                              : (v - lo) / (hi - lo);
        return height - mb - t * (height - mt - mb);
    };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";

    os << "<text x=\"" << (width / 2) << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">detectors</text>\n";
    const char* metric_name =
        record.config.task == TaskKind::LorenzX ? "test NMSE" : "test error %";
    os << "<text x=\"18\" y=\"" << (height / 2)
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << (height / 2) << ")\">" << metric_name << (logy ? " (log)" : "") << "</text>\n";
    os << "<text x=\"" << (width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
       << to_string(record.config.task) << " / " << to_string(record.config.family) << " / "
       << to_string(record.config.mode) << "</text>\n";

    for (int d = dmin; d <= dmax; ++d)
        os << "<text x=\"" << xpix(d) << "\" y=\"" << height - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << d << "</text>\n";

    for (const auto& a : record.aggregates) {
        const double x = xpix(a.detectors);
        const double ylo =
            ypix(logy ? std::max(a.metric_mean - a.metric_std, lo) : a.metric_mean - a.metric_std);
        const double yhi = ypix(a.metric_mean + a.metric_std);
        os << "<line x1=\"" << x << "\" y1=\"" << ylo << "\" x2=\"" << x << "\" y2=\"" << yhi
           << "\" stroke=\"steelblue\"/>\n"
           << "<circle cx=\"" << x << "\" cy=\"" << ypix(a.metric_mean)
           << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    os << "</svg>\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << contents;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

} // namespace detail

enum class ReportFormat { Csv, Json, Svg };

// Writes <stem>.csv / .json / .svg under out_dir; returns the paths.
inline std::vector<std::filesystem::path> emit_report(const ExperimentRecord& record,
                                                      const std::filesystem::path& out_dir,
                                                      const std::vector<ReportFormat>& formats,
                                                      const std::string& stem = "experiment") {
    if (record.rows.empty()) throw std::invalid_argument("emit_report: empty record");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (ReportFormat f : formats) {
        std::ostringstream body;
        std::filesystem::path path = out_dir;
        switch (f) {
            case ReportFormat::Csv:
                write_csv(body, record);
                path /= stem + ".csv";
                break;
            case ReportFormat::Json:
                body << to_json(record).dump(2) << '\n';
                path /= stem + ".json";
                break;
            case ReportFormat::Svg:
                detail::write_svg(body, record);
                path /= stem + ".svg";
                break;
        }
        detail::write_file(path, body.str());
        written.push_back(path);
    }
    return written;
}

} // namespace stochrc
