#pragma once

// Run configuration: a flat key = value file with [section] headers.
// Keys carry their unit in the name (mt, ghz, mhz, m, ohm).

#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "circuit_model.hpp"
#include "coupled_modes.hpp"
#include "defaults.hpp"
#include "error.hpp"
#include "nrw_extraction.hpp"

namespace pmnri {

struct RunConfig {
    CircuitDesign circuit = defaults::circuit_design();
    HybridModel model = defaults::hybrid_model();
    GridSpec grid;
    MapOptions map;
    RegionOptions regions;
    ExtractionConfig extraction;

    /// Both the circuit and the two-mode model share one Kittel line.
    KittelParams& kittel() { return model.kittel; }

    CircuitParams circuit_params() const {
        CircuitDesign d = circuit;
        d.kittel = model.kittel;
        return d.params();
    }

    AnalysisSetup setup() const {
        AnalysisSetup s;
        s.circuit = circuit_params();
        s.model = model;
        s.grid = grid;
        s.map = map;
        s.regions = regions;
        return s;
    }
};

/// Parses "a+bi", "a-bi", "bi", "a" and "(a,b)".
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    auto bad = [&] { return UsageError("not a complex number: '" + text + "'"); };
    if (s.empty()) throw bad();
    auto number = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != t.size()) throw bad();
        return v;
    };
    if (s.front() == '(' && s.back() == ')') {
        const auto comma = s.find(',');
        if (comma == std::string::npos) throw bad();
        return {number(s.substr(1, comma - 1)), number(s.substr(comma + 1, s.size() - comma - 2))};
    }
    if (s.back() != 'i' && s.back() != 'j') return {number(s), 0.0};
    s.pop_back();
    // Split at the last sign that is not an exponent sign.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag = [&](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return number(t);
    };
    if (split == std::string::npos) return {0.0, imag(s)};
    return {number(s.substr(0, split)), imag(s.substr(split))};
}

namespace detail {

inline double parse_real(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not a number: '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x)) throw UsageError("config key '" + key + "': not a number: '" + v + "'");
    return x;
}

inline std::size_t parse_count(const std::string& v, const std::string& key) {
    const double x = parse_real(v, key);
    if (x < 1 || x != std::floor(x)) throw UsageError("config key '" + key + "': expected a positive integer");
    return static_cast<std::size_t>(x);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
    auto real = [](auto field) -> Setter {
        return [field](RunConfig& c, const std::string& v, const std::string& k) { field(c, parse_real(v, k)); };
    };
    static const std::map<std::string, Setter> table{
        {"circuit.line_index", real([](RunConfig& c, double x) { c.circuit.line_index = x; })},
        {"circuit.line_impedance_ohm", real([](RunConfig& c, double x) { c.circuit.z_line = x; })},
        {"circuit.ls_m", real([](RunConfig& c, double x) { c.circuit.ls = x; c.extraction.ls = x; })},
        {"circuit.isrr_frequency_ghz", real([](RunConfig& c, double x) { c.circuit.isrr_frequency = x * 1e9; })},
        {"circuit.capacitance_ratio", real([](RunConfig& c, double x) { c.circuit.capacitance_ratio = x; })},
        {"circuit.isrr_half_linewidth_mhz", real([](RunConfig& c, double x) { c.circuit.isrr_half_linewidth = x * 1e6; })},
        {"circuit.m0", real([](RunConfig& c, double x) { c.circuit.M0 = x; })},
        {"circuit.mc", [](RunConfig& c, const std::string& v, const std::string&) { c.circuit.Mc = parse_complex(v); }},
        {"circuit.ext", real([](RunConfig& c, double x) { c.circuit.ext = x; })},
        {"circuit.mc_scale", real([](RunConfig& c, double x) { c.circuit.mc_scale = x; })},
        {"kittel.gamma_ghz_per_t", real([](RunConfig& c, double x) { c.model.kittel.gamma_mu0 = angular(x * 1e9); })},
        {"kittel.mu0_ms_t", real([](RunConfig& c, double x) { c.model.kittel.mu0_Ms = x; })},
        {"kittel.alpha", real([](RunConfig& c, double x) { c.model.kittel.alpha = x; })},
        {"model.isrr_frequency_ghz", real([](RunConfig& c, double x) { c.model.isrr.omega = angular(x * 1e9); })},
        {"model.isrr_half_linewidth_mhz", real([](RunConfig& c, double x) { c.model.isrr.linewidth = angular(x * 1e6); })},
        {"model.magnon_half_linewidth_mhz", real([](RunConfig& c, double x) { c.model.magnon_linewidth = angular(x * 1e6); })},
        {"model.kappa", [](RunConfig& c, const std::string& v, const std::string&) { c.model.coupling.kappa = parse_complex(v); }},
        {"grid.field_min_mt", real([](RunConfig& c, double x) { c.grid.field_min = x * 1e-3; })},
        {"grid.field_max_mt", real([](RunConfig& c, double x) { c.grid.field_max = x * 1e-3; })},
        {"grid.field_points", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.field_points = parse_count(v, k); }},
        {"grid.freq_min_ghz", real([](RunConfig& c, double x) { c.grid.freq_min = x * 1e9; })},
        {"grid.freq_max_ghz", real([](RunConfig& c, double x) { c.grid.freq_max = x * 1e9; })},
        {"grid.freq_points", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.freq_points = parse_count(v, k); }},
        {"analysis.branch",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             if (v == "principal") c.map.branch = c.extraction.branch = BranchPolicy::principal;
             else if (v == "continuity") c.map.branch = c.extraction.branch = BranchPolicy::continuity;
             else throw UsageError("config key '" + k + "': expected principal or continuity");
         }},
        {"analysis.threads",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             const double x = parse_real(v, k);
             if (x < 0 || x != std::floor(x)) throw UsageError("config key '" + k + "': expected a non-negative integer");
             c.map.threads = static_cast<unsigned>(x);
         }},
        {"analysis.nri_depth", real([](RunConfig& c, double x) { c.regions.depth = x; })},
        {"analysis.min_deep_cells", [](RunConfig& c, const std::string& v, const std::string& k) { c.regions.min_deep_cells = parse_count(v, k); }},
        {"extraction.jump_threshold", real([](RunConfig& c, double x) { c.extraction.jump_threshold = x; })},
    };
    return table;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// All accepted keys, sorted.
inline std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : detail::setters()) out.push_back(k);
    return out;
}

/// Applies one "section.key" = value pair; unknown keys are rejected.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    const auto& t = detail::setters();
    const auto it = t.find(key);
    if (it == t.end()) throw UsageError("unknown config key '" + key + "'");
    it->second(c, detail::trim(value), key);
}

/// Applies "section.key=value".
inline void apply_override(RunConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override must look like section.key=value: '" + assignment + "'");
    apply_setting(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline void load_config(RunConfig& c, std::istream& in, const std::string& source = "config") {
    std::string line, section;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& what) {
            return UsageError(source + ": line " + std::to_string(n) + ": " + what);
        };
        if (line.front() == '[') {
            if (line.back() != ']') throw fail("malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw fail("expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        try {
            apply_setting(c, full, line.substr(eq + 1));
        } catch (const UsageError& e) {
            throw fail(e.what());
        }
    }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    load_config(c, in, path);
}

}  // namespace pmnri
