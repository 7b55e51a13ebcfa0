#pragma once

// Touchstone v1 two-port files.

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "sparams.hpp"

namespace pmnri {

enum class TouchstoneFormat { RI, MA, DB };

struct TouchstoneOptions {
    double unit = 1e9;  ///< Hz per file frequency unit
    TouchstoneFormat format = TouchstoneFormat::MA;
    double reference = 50.0;  ///< ohm
};

struct TouchstoneFile {
    TouchstoneOptions options;
    TwoPortSpectrum spectrum;
};

namespace detail {

inline std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline cplx touchstone_value(double a, double b, TouchstoneFormat f) {
    constexpr double deg = constants::pi / 180.0;
    switch (f) {
        case TouchstoneFormat::RI: return {a, b};
        case TouchstoneFormat::MA: return std::polar(a, b * deg);
        case TouchstoneFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * deg);
    }
    return {};
}

inline TouchstoneOptions parse_option_line(const std::string& line, std::size_t line_no) {
    TouchstoneOptions o;
    std::istringstream is(line.substr(1));
    std::string tok;
    while (is >> tok) {
        const std::string t = upper(tok);
        if (t == "HZ") o.unit = 1.0;
        else if (t == "KHZ") o.unit = 1e3;
        else if (t == "MHZ") o.unit = 1e6;
        else if (t == "GHZ") o.unit = 1e9;
        else if (t == "S") continue;
        else if (t == "Y" || t == "Z" || t == "H" || t == "G")
            throw ParseError(line_no, "parameter type " + tok + " is not supported, only S");
        else if (t == "RI") o.format = TouchstoneFormat::RI;
        else if (t == "MA") o.format = TouchstoneFormat::MA;
        else if (t == "DB") o.format = TouchstoneFormat::DB;
        else if (t == "R") {
            if (!(is >> o.reference) || !(o.reference > 0.0))
                throw ParseError(line_no, "option line: R needs a positive reference resistance");
        } else {
            throw ParseError(line_no, "option line: unknown token '" + tok + "'");
        }
    }
    return o;
}

}  // namespace detail

/// Parses a v1 two-port file. Rows carry the frequency and four complex values
/// in the order S11 S21 S12 S22; `!` starts a comment.
inline TouchstoneFile parse_touchstone(std::istream& in) {
    TouchstoneFile file;
    bool have_options = false;
    std::string line;
    std::size_t line_no = 0;
    double last = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        line.erase(0, first);
        if (line[0] == '[') throw ParseError(line_no, "Touchstone v2 keywords are not supported, use a v1 file");
        if (line[0] == '#') {
            if (have_options) throw ParseError(line_no, "second option line");
            file.options = detail::parse_option_line(line, line_no);
            have_options = true;
            continue;
        }
        std::istringstream is(line);
        std::vector<double> v;
        std::string tok;
        while (is >> tok) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(line_no, "not a number: '" + tok + "'");
            }
        }
        if (v.size() != 9)
            throw ParseError(line_no, "two-port row needs 9 values, found " + std::to_string(v.size()));
        const double f = v[0] * file.options.unit;
        if (!(f > last)) throw ParseError(line_no, "frequency is not strictly increasing");
        last = f;
        const auto fmt = file.options.format;
        file.spectrum.push_back(f, {detail::touchstone_value(v[1], v[2], fmt), detail::touchstone_value(v[3], v[4], fmt),
                                    detail::touchstone_value(v[5], v[6], fmt), detail::touchstone_value(v[7], v[8], fmt)});
    }
    if (file.spectrum.empty()) throw ParseError(line_no, "no data rows");
    return file;
}

inline TouchstoneFile read_touchstone(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return parse_touchstone(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path);
    }
}

/// Writes RI format in GHz with 12 significant digits.
inline void write_touchstone(std::ostream& out, const TwoPortSpectrum& s, double reference = 50.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", reference);
    out << "# GHz S RI R " << buf << '\n';
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, " %.12g", x);
        out << buf;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", s.frequency[i] / 1e9);
        out << buf;
        for (const cplx& z : {s.s11[i], s.s21[i], s.s12[i], s.s22[i]}) {
            put(z.real());
            put(z.imag());
        }
        out << '\n';
    }
}

}  // namespace pmnri
