#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stochrc/error.hpp"
#include "stochrc/report.hpp"

namespace stochrc {
namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

// Scalar or integer-array TOML value -> json. Covers the flat schema the
// experiment config uses; nothing more.
inline nlohmann::json parse_toml_value(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                long long n = std::stoll(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                arr.push_back(n);
            } catch (const std::exception&) {
                throw ConfigError("toml line " + std::to_string(line_no) +
                                  ": array element '" + item + "' is not an integer");
            }
        }
        return arr;
    }
    try {
        std::size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            long long n = std::stoll(v, &used);
            if (used == v.size()) return n;
        }
        double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("toml line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

// Subset of TOML sufficient for experiment configs: [section] headers and
// key = value lines with strings, booleans, numbers and integer arrays.
inline nlohmann::json parse_toml_subset(std::istream& in) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* section = &root;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("toml line " + std::to_string(line_no) + ": malformed section");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw ConfigError("toml line " + std::to_string(line_no) + ": empty section name");
            section = &root[name];
            if (section->is_null()) *section = nlohmann::json::object();
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("toml line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("toml line " + std::to_string(line_no) + ": empty key");
        (*section)[key] = parse_toml_value(line.substr(eq + 1), line_no);
    }
    return root;
}

} // namespace detail

// Loads an experiment config from .toml or .json, selected by extension.
inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    const std::string ext = path.extension().string();
    if (ext == ".toml") {
        j = detail::parse_toml_subset(in);
    } else if (ext == ".json") {
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    } else {
        throw ConfigError("config file must end in .toml or .json: " + path.string());
    }
    return experiment_config_from_json(j);
}

} // namespace stochrc
