/* config.hpp
 *
 * Experiment configuration: a small INI-style text format (sections,
 * key = value, comma-separated lists, # comments) parsed into a typed
 * struct with explicit validation.  Validation failures are collected,
 * not thrown, so the CLI can print all of them and exit with the
 * config-error code.
 */

#pragma once

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstar {

using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

// Parses the raw section/key/value structure.  Malformed lines throw;
// semantic validation happens later on the typed struct.
inline RawConfig parse_raw_config(std::istream& in) {
    RawConfig out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": empty section name");
            out[section];
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": key outside any section");
        out[section][key] = val;
    }
    return out;
}

struct ExperimentConfig {
    // [run]
    std::uint64_t seed = 20260813;
    std::string out_dir = "out";
    int instances = 24;

    // [homotopy]
    std::vector<int> homotopy_dims{2, 4, 8};
    std::vector<double> homotopy_eps{0.5, 1.0};
    int homotopy_min_samples = 200;
    int homotopy_max_samples = 1600;

    // [interval]
    std::vector<int> interval_chi{7, 7};       // single-block multiplicities per step
    std::vector<double> interval_windows{0.6, 0.5, 0.4};
    int interval_level = 1;                    // certify the step level -> level+1
    int interval_grid = 641;
    double interval_margin = 0.025;
    double interval_group_gap = 0.02;
    double interval_max_window = 0.008;
    double interval_wiggle = 0.002;
    bool interval_conjugate = true;

    // [circle]
    std::vector<int> circle_chi{4, 4};
    std::vector<double> circle_amplitudes{1.0, 1.0};
    double circle_threshold = 1.0;
    int circle_grid = 128;
    int circle_slices = 11;

    // Set by the CLI, not the file.
    std::string negative_control = "none";

    [[nodiscard]] std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        if (instances < 0) errs.push_back("run.instances must be nonnegative");
        if (out_dir.empty()) errs.push_back("run.out must not be empty");

        for (int d : homotopy_dims)
            if (d < 2) errs.push_back("homotopy.dims entries must be at least 2");
        for (double e : homotopy_eps)
            if (e <= 0.0 || e > 2.0) errs.push_back("homotopy.eps entries must lie in (0, 2]");
        if (homotopy_min_samples < 2) errs.push_back("homotopy.min_samples must be at least 2");
        if (homotopy_max_samples < homotopy_min_samples)
            errs.push_back("homotopy.max_samples must be at least min_samples");

        if (interval_chi.empty()) errs.push_back("interval.chi must list at least one step");
        for (int c : interval_chi)
            if (c < 3) errs.push_back("interval.chi entries must be at least 3");
        if (interval_windows.size() != interval_chi.size() + 1)
            errs.push_back("interval.windows needs one entry per level (steps + 1)");
        if (!interval_windows.empty()) {
            if (interval_windows.front() > 0.6 + 1e-15)
                errs.push_back("interval.windows must start at 3/5 or below");
            for (size_t i = 0; i + 1 < interval_windows.size(); ++i)
                if (!(interval_windows[i] > interval_windows[i + 1]) ||
                    interval_windows[i + 1] <= 0.0) {
                    errs.push_back("interval.windows must decrease strictly and stay positive");
                    break;
                }
        }
        if (interval_level < 1 || interval_level > static_cast<int>(interval_chi.size()))
            errs.push_back("interval.level must name an embedding step");
        if (interval_grid < 64) errs.push_back("interval.grid must be at least 64");
        if (interval_margin <= 0.0 || interval_margin >= 0.2)
            errs.push_back("interval.margin must lie in (0, 1/5)");
        if (interval_group_gap <= 0.0) errs.push_back("interval.group_gap must be positive");
        if (interval_max_window <= 0.0) errs.push_back("interval.max_window must be positive");
        if (interval_wiggle < 0.0) errs.push_back("interval.wiggle must be nonnegative");

        if (circle_chi.empty()) errs.push_back("circle.chi must list at least one step");
        for (int c : circle_chi)
            if (c < 4) errs.push_back("circle.chi entries must be at least 4");
        if (circle_amplitudes.size() != circle_chi.size())
            errs.push_back("circle.amplitudes needs one entry per step");
        for (double a : circle_amplitudes)
            if (a <= 0.0) errs.push_back("circle.amplitudes entries must be positive");
        if (circle_threshold <= 0.0) errs.push_back("circle.threshold must be positive");
        if (circle_grid < 16) errs.push_back("circle.grid must be at least 16");
        if (circle_slices < 2) errs.push_back("circle.slices must be at least 2");

        if (negative_control != "none" && negative_control != "weak-gap" &&
            negative_control != "loose-nu")
            errs.push_back("unknown negative control '" + negative_control + "'");
        return errs;
    }
};

namespace detail {

template <class T>
T parse_scalar(const std::string& s);

template <>
inline int parse_scalar<int>(const std::string& s) {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::runtime_error("trailing characters in integer '" + s + "'");
    return v;
}

template <>
inline std::uint64_t parse_scalar<std::uint64_t>(const std::string& s) {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::runtime_error("trailing characters in integer '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

template <>
inline double parse_scalar<double>(const std::string& s) {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error("trailing characters in number '" + s + "'");
    return v;
}

template <>
inline bool parse_scalar<bool>(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::runtime_error("expected boolean, got '" + s + "'");
}

template <>
inline std::string parse_scalar<std::string>(const std::string& s) {
    return s;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::string item;
    std::istringstream iss(s);
    while (std::getline(iss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::runtime_error("empty list entry in '" + s + "'");
        out.push_back(parse_scalar<T>(item));
    }
    return out;
}

template <class T>
void assign(const RawConfig& raw, const std::string& sec, const std::string& key, T& field) {
    const auto sit = raw.find(sec);
    if (sit == raw.end()) return;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return;
    try {
        field = parse_scalar<T>(kit->second);
    } catch (const std::exception& e) {
        throw std::runtime_error(sec + "." + key + ": " + e.what());
    }
}

template <class T>
void assign_list(const RawConfig& raw, const std::string& sec, const std::string& key,
                 std::vector<T>& field) {
    const auto sit = raw.find(sec);
    if (sit == raw.end()) return;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return;
    try {
        field = parse_list<T>(kit->second);
    } catch (const std::exception& e) {
        throw std::runtime_error(sec + "." + key + ": " + e.what());
    }
}

}  // namespace detail

// Builds the typed config from raw key/values; unknown keys are an error
// (typo protection), semantic problems go through validate().
inline ExperimentConfig make_config(const RawConfig& raw) {
    static const std::map<std::string, std::vector<std::string>> known{
        {"run", {"seed", "out", "instances"}},
        {"homotopy", {"dims", "eps", "min_samples", "max_samples"}},
        {"interval",
         {"chi", "windows", "level", "grid", "margin", "group_gap", "max_window", "wiggle",
          "conjugate"}},
        {"circle", {"chi", "amplitudes", "threshold", "grid", "slices"}},
    };
    for (const auto& [sec, kv] : raw) {
        const auto sit = known.find(sec);
        if (sit == known.end()) throw std::runtime_error("unknown config section [" + sec + "]");
        for (const auto& [key, val] : kv) {
            (void)val;
            if (std::find(sit->second.begin(), sit->second.end(), key) == sit->second.end())
                throw std::runtime_error("unknown config key " + sec + "." + key);
        }
    }

    ExperimentConfig cfg;
    detail::assign(raw, "run", "seed", cfg.seed);
    detail::assign(raw, "run", "out", cfg.out_dir);
    detail::assign(raw, "run", "instances", cfg.instances);

    detail::assign_list(raw, "homotopy", "dims", cfg.homotopy_dims);
    detail::assign_list(raw, "homotopy", "eps", cfg.homotopy_eps);
    detail::assign(raw, "homotopy", "min_samples", cfg.homotopy_min_samples);
    detail::assign(raw, "homotopy", "max_samples", cfg.homotopy_max_samples);

    detail::assign_list(raw, "interval", "chi", cfg.interval_chi);
    detail::assign_list(raw, "interval", "windows", cfg.interval_windows);
    detail::assign(raw, "interval", "level", cfg.interval_level);
    detail::assign(raw, "interval", "grid", cfg.interval_grid);
    detail::assign(raw, "interval", "margin", cfg.interval_margin);
    detail::assign(raw, "interval", "group_gap", cfg.interval_group_gap);
    detail::assign(raw, "interval", "max_window", cfg.interval_max_window);
    detail::assign(raw, "interval", "wiggle", cfg.interval_wiggle);
    detail::assign(raw, "interval", "conjugate", cfg.interval_conjugate);

    detail::assign_list(raw, "circle", "chi", cfg.circle_chi);
    detail::assign_list(raw, "circle", "amplitudes", cfg.circle_amplitudes);
    detail::assign(raw, "circle", "threshold", cfg.circle_threshold);
    detail::assign(raw, "circle", "grid", cfg.circle_grid);
    detail::assign(raw, "circle", "slices", cfg.circle_slices);
    return cfg;
}

inline ExperimentConfig load_config(std::istream& in) {
    return make_config(parse_raw_config(in));
}

}  // namespace cstar
