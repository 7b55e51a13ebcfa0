#pragma once

// Field-frequency maps of the loaded line, NRI region detection, branch
// association, anti-damping containment and the coupling sweeps.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "axis.hpp"
#include "circuit_model.hpp"
#include "coupled_modes.hpp"
#include "error.hpp"
#include "nrw_extraction.hpp"

namespace pmnri {

struct GridSpec {
    double field_min = 0.040;  ///< T
    double field_max = 0.080;  ///< T
    std::size_t field_points = 401;
    double freq_min = 2.8e9;  ///< Hz
    double freq_max = 4.2e9;  ///< Hz
    std::size_t freq_points = 701;

    std::vector<double> fields() const { return linspace(field_min, field_max, field_points); }
    std::vector<double> frequencies() const { return linspace(freq_min, freq_max, freq_points); }

    void validate() const {
        if (field_points == 0 || freq_points == 0) throw DataError("grid needs at least one point per axis");
        if (field_points > 1 && !(field_max > field_min)) throw DataError("grid field range is empty");
        if (freq_points > 1 && !(freq_max > freq_min)) throw DataError("grid frequency range is empty");
        if (!(field_min >= 0.0)) throw DataError("grid field must be non-negative");
        if (!(freq_min > 0.0)) throw DataError("grid frequency must be positive");
    }
};

/// Rectangular (field, frequency) grid of named real layers, stored field-major.
class FieldFrequencyMap {
public:
    FieldFrequencyMap() = default;
    FieldFrequencyMap(std::vector<double> field, std::vector<double> frequency)
        : field_(std::move(field)), frequency_(std::move(frequency)), mask_(field_.size() * frequency_.size(), 0) {
        if (!strictly_monotonic(field_) || !strictly_monotonic(frequency_))
            throw DataError("map axes must be strictly monotonic");
    }

    const std::vector<double>& field() const { return field_; }
    const std::vector<double>& frequency() const { return frequency_; }
    std::size_t rows() const { return field_.size(); }
    std::size_t cols() const { return frequency_.size(); }
    std::size_t size() const { return rows() * cols(); }
    std::size_t index(std::size_t i_field, std::size_t j_freq) const { return i_field * cols() + j_freq; }

    /// Layer names in insertion order.
    const std::vector<std::string>& layer_names() const { return names_; }
    bool has_layer(const std::string& name) const { return layers_.count(name) != 0; }

    std::vector<double>& add_layer(const std::string& name) {
        if (!has_layer(name)) names_.push_back(name);
        auto& v = layers_[name];
        v.assign(size(), std::numeric_limits<double>::quiet_NaN());
        return v;
    }

    const std::vector<double>& layer(const std::string& name) const {
        auto it = layers_.find(name);
        if (it == layers_.end()) throw DataError("map has no layer '" + name + "'");
        return it->second;
    }
    std::vector<double>& layer(const std::string& name) {
        auto it = layers_.find(name);
        if (it == layers_.end()) throw DataError("map has no layer '" + name + "'");
        return it->second;
    }

    /// Nonzero where the point was singular; layers hold NaN there.
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::vector<std::uint8_t>& mask() { return mask_; }

    /// Area of one grid cell in T*Hz.
    double cell_area() const {
        const double dh = rows() > 1 ? std::abs(field_.back() - field_.front()) / double(rows() - 1) : 0.0;
        const double df = cols() > 1 ? std::abs(frequency_.back() - frequency_.front()) / double(cols() - 1) : 0.0;
        return dh * df;
    }

private:
    std::vector<double> field_;
    std::vector<double> frequency_;
    std::vector<std::string> names_;
    std::map<std::string, std::vector<double>> layers_;
    std::vector<std::uint8_t> mask_;
};

namespace layers {
inline const std::string trans_abs = "trans_abs";  ///< |S21| forward, |S12| reverse
inline const std::string trans_arg = "trans_arg";  ///< rad
inline const std::string n_prime = "n_prime";
inline const std::string n_dprime = "n_dprime";  ///< loss-positive, -Im(n)
inline const std::string eps_prime = "eps_prime";
inline const std::string eps_dprime = "eps_dprime";
inline const std::string mu_prime = "mu_prime";
inline const std::string mu_dprime = "mu_dprime";
inline const std::string nri_condition = "nri_condition";

inline const std::vector<std::string>& all() {
    static const std::vector<std::string> v{trans_abs, trans_arg, n_prime,  n_dprime,     eps_prime,
                                            eps_dprime, mu_prime,  mu_dprime, nri_condition};
    return v;
}
}  // namespace layers

struct MapOptions {
    BranchPolicy branch = BranchPolicy::principal;
    unsigned threads = 0;  ///< 0 picks the hardware concurrency
};

namespace detail {

template <class F>
void parallel_rows(std::size_t rows, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(rows, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < rows; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < rows; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Evaluates the circuit on every grid point, synthesizes the slab's two-port
/// response and runs the retrieval on it. Rows are independent; the result is
/// identical for any thread count.
inline FieldFrequencyMap build_maps(const CircuitParams& params, const GridSpec& grid, Direction dir,
                                    const MapOptions& opt = {}) {
    params.validate();
    grid.validate();
    FieldFrequencyMap m(grid.fields(), grid.frequencies());
    std::vector<std::vector<double>*> out;
    for (const auto& name : layers::all()) out.push_back(&m.add_layer(name));
    const auto& fs = m.frequency();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    detail::parallel_rows(m.rows(), opt.threads, [&](std::size_t i) {
        const double h = m.field()[i];
        std::vector<cplx> zs(fs.size()), ys(fs.size());
        std::vector<std::uint8_t> bad(fs.size(), 0);
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const double w = angular(fs[j]);
            try {
                zs[j] = series_impedance(w, h, params);
                ys[j] = shunt_admittance(w, h, params, dir);
            } catch (const SingularityError&) {
                bad[j] = 1;
            }
        }
        std::vector<cplx> th(fs.size());
        for (std::size_t j = 0; j < fs.size(); ++j)
            if (!bad[j]) th[j] = bloch_phase(zs[j], ys[j]);
        if (opt.branch == BranchPolicy::continuity) {
            // Track across the valid points only.
            std::vector<cplx> z2, y2;
            std::vector<std::size_t> idx;
            for (std::size_t j = 0; j < fs.size(); ++j)
                if (!bad[j]) {
                    z2.push_back(zs[j]);
                    y2.push_back(ys[j]);
                    idx.push_back(j);
                }
            const auto tracked = bloch_phases(z2, y2, BranchPolicy::continuity);
            for (std::size_t k = 0; k < idx.size(); ++k) th[idx[k]] = tracked[k];
        }
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const std::size_t at = m.index(i, j);
            const double w = angular(fs[j]);
            try {
                if (bad[j]) throw SingularityError("circuit");
                const MaterialPoint mp = material_from_immittance(w, zs[j], ys[j], th[j], params);
                const double k0 = w / constants::c0;
                const SParams s = slab_sparams(mp.n, mp.z, k0, params.ls);
                // Offset the log by the branch the tracked phase sits on.
                const int branch = opt.branch == BranchPolicy::continuity
                                       ? -static_cast<int>(std::lround(mp.theta.real() / constants::two_pi))
                                       : 0;
                const MaterialRow r = extract_point(fs[j], s.s11, s.s21, params.ls, branch);
                (*out[0])[at] = std::abs(s.s21);
                (*out[1])[at] = std::arg(s.s21);
                (*out[2])[at] = r.n.real();
                (*out[3])[at] = -r.n.imag();
                const cplx eps = mp.eps, mu = mp.mu;
                (*out[4])[at] = eps.real();
                (*out[5])[at] = -eps.imag();
                (*out[6])[at] = mu.real();
                (*out[7])[at] = -mu.imag();
                (*out[8])[at] = nri_condition(eps, mu).value;
            } catch (const SingularityError&) {
                m.mask()[at] = 1;
                for (auto* l : out) (*l)[at] = nan;
            }
        }
    });
    return m;
}

/// Median n' along the lowest-field row, where the magnon sits far below the band.
inline double baseline_index(const FieldFrequencyMap& m) {
    const auto& n = m.layer(layers::n_prime);
    std::vector<double> row;
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (!m.mask()[m.index(0, j)]) row.push_back(n[m.index(0, j)]);
    if (row.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::nth_element(row.begin(), row.begin() + row.size() / 2, row.end());
    return row[row.size() / 2];
}

struct RegionOptions {
    double depth = -0.05;            ///< n' threshold for a cell to count as deep
    std::size_t min_deep_cells = 4;  ///< regions with fewer deep cells are speckle
};

struct NriRegion {
    std::vector<std::size_t> cells;  ///< flat map indices
    double min_n = 0.0;
    double argmin_field = 0.0;      ///< T
    double argmin_frequency = 0.0;  ///< Hz
    double field_lo = 0.0, field_hi = 0.0;
    double freq_lo = 0.0, freq_hi = 0.0;

    double field_span() const { return field_hi - field_lo; }
    double freq_span() const { return freq_hi - freq_lo; }
    std::size_t pixels() const { return cells.size(); }
};

/// 4-connected components of n' < 0, speckle removed, sorted by min n'.
inline std::vector<NriRegion> detect_nri_regions(const FieldFrequencyMap& m, const RegionOptions& opt = {}) {
    const auto& n = m.layer(layers::n_prime);
    const std::size_t R = m.rows(), C = m.cols();
    std::vector<int> label(m.size(), -1);
    std::vector<NriRegion> out;
    std::vector<std::size_t> stack;
    auto negative = [&](std::size_t k) { return !m.mask()[k] && n[k] < 0.0; };
    for (std::size_t start = 0; start < m.size(); ++start) {
        if (label[start] != -1 || !negative(start)) continue;
        NriRegion r;
        std::size_t deep = 0;
        stack.assign(1, start);
        label[start] = 0;
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            r.cells.push_back(k);
            if (n[k] < opt.depth) ++deep;
            const std::size_t i = k / C, j = k % C;
            auto visit = [&](std::size_t kk) {
                if (label[kk] == -1 && negative(kk)) {
                    label[kk] = 0;
                    stack.push_back(kk);
                }
            };
            if (i > 0) visit(k - C);
            if (i + 1 < R) visit(k + C);
            if (j > 0) visit(k - 1);
            if (j + 1 < C) visit(k + 1);
        }
        if (deep < opt.min_deep_cells) continue;
        std::sort(r.cells.begin(), r.cells.end());
        r.min_n = std::numeric_limits<double>::infinity();
        r.field_lo = r.freq_lo = std::numeric_limits<double>::infinity();
        r.field_hi = r.freq_hi = -std::numeric_limits<double>::infinity();
        for (std::size_t k : r.cells) {
            const double h = m.field()[k / C], f = m.frequency()[k % C];
            if (n[k] < r.min_n) {
                r.min_n = n[k];
                r.argmin_field = h;
                r.argmin_frequency = f;
            }
            r.field_lo = std::min(r.field_lo, h);
            r.field_hi = std::max(r.field_hi, h);
            r.freq_lo = std::min(r.freq_lo, f);
            r.freq_hi = std::max(r.freq_hi, f);
        }
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const NriRegion& a, const NriRegion& b) { return a.min_n < b.min_n; });
    return out;
}

/// The region with the most cells; ties go to the deeper one.
inline const NriRegion* dominant_region(const std::vector<NriRegion>& regions) {
    const NriRegion* best = nullptr;
    for (const auto& r : regions)
        if (!best || r.pixels() > best->pixels()) best = &r;
    return best;
}

struct BranchAssociation {
    Branch branch = Branch::upper;
    double upper_fraction = 0.0;  ///< share of cells nearer the upper branch
};

/// Majority vote of the region's cells: nearer in frequency to Re of the
/// upper or the lower hybrid branch at the cell's field.
inline BranchAssociation classify_branch(const NriRegion& r, const FieldFrequencyMap& m, const HybridModel& model) {
    if (r.cells.empty()) throw DataError("classify_branch: empty region");
    std::map<std::size_t, HybridPair> cache;
    std::size_t up = 0;
    for (std::size_t k : r.cells) {
        const std::size_t i = k / m.cols();
        auto it = cache.find(i);
        if (it == cache.end()) it = cache.emplace(i, model.at(m.field()[i])).first;
        const double w = angular(m.frequency()[k % m.cols()]);
        if (std::abs(w - it->second.upper.real()) < std::abs(w - it->second.lower.real())) ++up;
    }
    BranchAssociation b;
    b.upper_fraction = double(up) / double(r.cells.size());
    b.branch = b.upper_fraction >= 0.5 ? Branch::upper : Branch::lower;
    return b;
}

struct ContainmentReport {
    bool has_interval = false;
    bool has_region = false;
    double fraction = 0.0;  ///< share of the region's field extent inside [H-, H+]
};

inline ContainmentReport correlate_antidamping(const NriRegion* region, const std::optional<FieldInterval>& interval) {
    ContainmentReport c;
    c.has_interval = interval.has_value();
    c.has_region = region != nullptr && !region->cells.empty();
    if (!c.has_interval || !c.has_region) return c;
    const double span = region->field_span();
    if (span <= 0.0) {
        c.fraction = interval->contains(region->field_lo) ? 1.0 : 0.0;
        return c;
    }
    const double lo = std::max(region->field_lo, interval->lower);
    const double hi = std::min(region->field_hi, interval->upper);
    c.fraction = std::max(0.0, hi - lo) / span;
    return c;
}

/// Branch whose linewidth the coupling drives negative in each direction.
inline Branch antidamped_branch(Direction d) { return d == Direction::forward ? Branch::upper : Branch::lower; }

/// The two-mode model seen by one direction.
inline HybridModel directional_model(const HybridModel& m, Direction d) {
    return d == Direction::forward ? m : m.with_coupling(m.coupling.reversed());
}

struct SweepResult {
    double ratio = 0.0;
    bool nri_present = false;
    double peak_n = 0.0;          ///< most negative n' over the detected regions, 0 when absent
    double delta_h_nd = 0.0;      ///< T, width of the anti-damping interval
    std::size_t nri_pixels = 0;   ///< total cells of the detected regions
};

struct AnalysisSetup {
    CircuitParams circuit;
    HybridModel model;  ///< forward-direction two-mode model
    GridSpec grid;
    MapOptions map;
    RegionOptions regions;
    /// Field axis for the anti-damping roots: the map window widened by its
    /// own span on both sides, so strong coupling keeps both roots in range.
    std::vector<double> damping_axis() const {
        const double w = grid.field_max - grid.field_min;
        return linspace(std::max(0.0, grid.field_min - w), grid.field_max + w, 12001);
    }
};

/// Anti-damping interval of the direction's active branch, or nothing.
inline std::optional<FieldInterval> antidamping_interval(const HybridModel& forward_model, Direction d,
                                                          std::span<const double> axis) {
    const HybridModel m = directional_model(forward_model, d);
    return m.anti_damping_interval(axis, antidamped_branch(d));
}

/// Scales Mc (circuit) and kappa (two-mode model) by each ratio.
inline std::vector<SweepResult> coupling_sweep(std::span<const double> ratios, const AnalysisSetup& s, Direction d) {
    std::vector<SweepResult> out;
    const auto axis = s.damping_axis();
    for (double r : ratios) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw DataError("coupling_sweep: ratios must be non-negative");
        SweepResult res;
        res.ratio = r;
        CircuitParams p = s.circuit;
        p.Mc *= r;
        const auto map = build_maps(p, s.grid, d, s.map);
        const auto regions = detect_nri_regions(map, s.regions);
        res.nri_present = !regions.empty();
        for (const auto& reg : regions) {
            res.peak_n = std::min(res.peak_n, reg.min_n);
            res.nri_pixels += reg.pixels();
        }
        const auto iv = antidamping_interval(s.model.with_coupling(s.model.coupling.scaled(r)), d, axis);
        res.delta_h_nd = iv ? iv->width() : 0.0;
        out.push_back(res);
    }
    return out;
}

struct AblationResult {
    double im_mc = 0.0;
    std::size_t pixels = 0;
    double area = 0.0;  ///< T*Hz
    double peak_n = 0.0;
    std::optional<Branch> branch;  ///< association of the dominant region
};

/// NRI area for Mc = re + i*im for each im value, real part held fixed.
inline std::vector<AblationResult> im_coupling_ablation(std::span<const double> im_values, const AnalysisSetup& s,
                                                         std::optional<double> re_mc = std::nullopt) {
    std::vector<AblationResult> out;
    const double re = re_mc.value_or(s.circuit.Mc.real());
    for (double im : im_values) {
        CircuitParams p = s.circuit;
        p.Mc = cplx(re, im);
        const auto map = build_maps(p, s.grid, Direction::forward, s.map);
        const auto regions = detect_nri_regions(map, s.regions);
        AblationResult a;
        a.im_mc = im;
        for (const auto& reg : regions) {
            a.pixels += reg.pixels();
            a.peak_n = std::min(a.peak_n, reg.min_n);
        }
        a.area = double(a.pixels) * map.cell_area();
        if (const NriRegion* dom = dominant_region(regions)) {
            // kappa follows the phase of conj(Mc) at fixed magnitude.
            HybridModel hm = s.model;
            hm.coupling.kappa = std::polar(std::abs(s.model.coupling.kappa), -std::arg(cplx(re, im)));
            a.branch = classify_branch(*dom, map, hm).branch;
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace pmnri
