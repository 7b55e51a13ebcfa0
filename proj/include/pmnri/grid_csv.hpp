#pragma once

// Field-frequency maps as CSV: columns field_mT, freq_GHz, then one column per
// layer; rows run over frequency fastest.

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "csv.hpp"
#include "error.hpp"

namespace pmnri {

/// Writes the chosen layers (all when empty). Masked points print as nan.
inline void write_grid_csv(std::ostream& out, const FieldFrequencyMap& m, std::vector<std::string> names = {}) {
    if (names.empty()) names = m.layer_names();
    std::vector<const std::vector<double>*> cols;
    for (const auto& n : names) cols.push_back(&m.layer(n));
    std::vector<std::string> cells{"field_mT", "freq_GHz"};
    cells.insert(cells.end(), names.begin(), names.end());
    csv::write_row(out, cells);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const std::size_t k = m.index(i, j);
            cells.assign({csv::number(m.field()[i] * 1e3), csv::number(m.frequency()[j] / 1e9)});
            for (const auto* c : cols) cells.push_back(m.mask()[k] ? "nan" : csv::number((*c)[k]));
            csv::write_row(out, cells);
        }
    }
}

/// Reads a map written by write_grid_csv. Points whose layers are all nan come back masked.
inline FieldFrequencyMap read_grid_csv(std::istream& in) {
    const csv::Table t = csv::read_table(in);
    if (t.header.size() < 2 || t.header[0] != "field_mT" || t.header[1] != "freq_GHz")
        throw ParseError(1, "grid header must start with field_mT,freq_GHz");
    std::vector<double> field, freq;
    for (const auto& r : t.rows) {
        if (field.empty() || r[0] != field.back()) field.push_back(r[0]);
        if (field.size() == 1) freq.push_back(r[1]);
    }
    if (t.rows.size() != field.size() * freq.size())
        throw DataError("grid rows (" + std::to_string(t.rows.size()) + ") do not form a " +
                        std::to_string(field.size()) + " x " + std::to_string(freq.size()) + " grid");
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        if (t.rows[k][0] != field[k / freq.size()] || t.rows[k][1] != freq[k % freq.size()])
            throw ParseError(t.line_numbers[k], "row is out of field-major order");
    }
    std::vector<double> h_si, f_si;
    for (double h : field) h_si.push_back(h * 1e-3);
    for (double f : freq) f_si.push_back(f * 1e9);
    FieldFrequencyMap m(std::move(h_si), std::move(f_si));
    for (std::size_t c = 2; c < t.header.size(); ++c) {
        auto& layer = m.add_layer(t.header[c]);
        for (std::size_t k = 0; k < t.rows.size(); ++k) layer[k] = t.rows[k][c];
    }
    if (t.header.size() > 2) {
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            bool all_nan = true;
            for (std::size_t c = 2; c < t.header.size(); ++c) all_nan = all_nan && std::isnan(t.rows[k][c]);
            m.mask()[k] = all_nan ? 1 : 0;
        }
    }
    return m;
}

}  // namespace pmnri
