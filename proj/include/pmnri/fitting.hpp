#pragma once

// Fits of the two-mode model to branch data, bare-mode fits, and calibration
// of the circuit against two-mode observables.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "circuit_model.hpp"
#include "constants.hpp"
#include "coupled_modes.hpp"
#include "error.hpp"
#include "optim.hpp"

namespace pmnri {

/// Complex branch frequencies w - i dw (rad/s) against field. Either branch
/// may be left empty.
struct BranchData {
    std::vector<double> field;  ///< T
    std::vector<cplx> upper;
    std::vector<cplx> lower;
    std::vector<double> weights;  ///< per field point, empty for uniform

    void validate() const {
        if (field.size() < 5) throw DataError("branch data needs at least 5 field points");
        if (upper.empty() && lower.empty()) throw DataError("branch data has no branch values");
        if (!upper.empty() && upper.size() != field.size()) throw DataError("upper branch length differs from field axis");
        if (!lower.empty() && lower.size() != field.size()) throw DataError("lower branch length differs from field axis");
        if (!weights.empty() && weights.size() != field.size()) throw DataError("weights length differs from field axis");
        for (double w : weights)
            if (!(w > 0.0) || !std::isfinite(w)) throw DataError("weights must be positive");
        if (!strictly_monotonic(field)) throw DataError("branch data field axis must be strictly monotonic");
    }

    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

/// Samples a model on a field axis.
inline BranchData branch_data_from_model(const HybridModel& m, std::span<const double> field) {
    BranchData d;
    d.field.assign(field.begin(), field.end());
    for (double h : field) {
        const HybridPair p = m.at(h);
        d.upper.push_back(p.upper);
        d.lower.push_back(p.lower);
    }
    return d;
}

struct FitResult {
    Coupling coupling;
    HybridModel model;           ///< bare modes used, with the fitted coupling
    double residual_norm = 0.0;  ///< sqrt of the weighted sum of squared complex residuals, rad/s
    std::size_t iterations = 0;
    bool converged = false;
};

struct FitOptions {
    std::size_t max_iterations = 10000;
    double relative_tolerance = 1e-12;
};

namespace detail {

inline double coupling_objective(const BranchData& d, const HybridModel& bare, cplx kappa) {
    const HybridModel m = bare.with_coupling({kappa});
    double sum = 0.0;
    for (std::size_t i = 0; i < d.field.size(); ++i) {
        const HybridPair p = m.at(d.field[i]);
        const double w = d.weight(i);
        if (!d.upper.empty()) sum += w * std::norm(d.upper[i] - p.upper);
        if (!d.lower.empty()) sum += w * std::norm(d.lower[i] - p.lower);
    }
    return sum;
}

/// kappa and -kappa give the same eigenvalues; report Re(kappa) >= 0.
inline cplx canonical_kappa(cplx k) { return (k.real() < 0.0 || (k.real() == 0.0 && k.imag() < 0.0)) ? -k : k; }

}  // namespace detail

/// Closed-form estimate: each data point gives
/// kappa^2 = ((2w - a - b)^2 - (a - b)^2) / w_isrr^2; the weighted mean is returned.
inline Coupling kappa_seed(const BranchData& d, const HybridModel& bare) {
    d.validate();
    cplx acc = 0.0;
    double wsum = 0.0;
    const cplx a = bare.isrr.complex_frequency();
    const double wi2 = bare.isrr.omega * bare.isrr.omega;
    for (std::size_t i = 0; i < d.field.size(); ++i) {
        const cplx b = bare.magnon_at(d.field[i]).complex_frequency();
        for (const auto* br : {&d.upper, &d.lower}) {
            if (br->empty()) continue;
            const cplx t = 2.0 * (*br)[i] - a - b;
            acc += d.weight(i) * (t * t - (a - b) * (a - b)) / wi2;
            wsum += d.weight(i);
        }
    }
    return {detail::canonical_kappa(std::sqrt(acc / wsum))};
}

/// Gauss-Newton on the complex coupling with the bare modes held fixed.
/// Steps are halved until the objective decreases, so accepted iterates never
/// increase it.
inline FitResult fit_coupling(const BranchData& d, std::optional<Coupling> init, const HybridModel& bare,
                              const FitOptions& opt = {}) {
    d.validate();
    cplx k = init ? init->kappa : kappa_seed(d, bare).kappa;
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw DataError("fit_coupling: non-finite initial kappa");
    const cplx a = bare.isrr.complex_frequency();
    const double wi2 = bare.isrr.omega * bare.isrr.omega;
    double obj = detail::coupling_objective(d, bare, k);
    FitResult res;
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        // Each eigenvalue r obeys dr/dkappa = w_isrr^2 kappa / (2 (2r - a - b)).
        cplx num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < d.field.size(); ++i) {
            const BareMode mag = bare.magnon_at(d.field[i]);
            const cplx b = mag.complex_frequency();
            const HybridPair p = hybrid_eigenvalues(bare.isrr, mag, {k});
            const double w = d.weight(i);
            auto accumulate = [&](cplx model, cplx data) {
                const cplx s = 2.0 * model - a - b;
                if (s == 0.0) return;
                const cplx J = wi2 * k / (2.0 * s);
                num += w * std::conj(J) * (data - model);
                den += w * std::norm(J);
            };
            if (!d.upper.empty()) accumulate(p.upper, d.upper[i]);
            if (!d.lower.empty()) accumulate(p.lower, d.lower[i]);
        }
        if (!(den > 0.0)) {
            // The Jacobian vanishes at kappa = 0; nudge off the origin.
            if (k == 0.0) {
                k = 1e-6;
                obj = detail::coupling_objective(d, bare, k);
                continue;
            }
            res.converged = true;
            break;
        }
        const cplx step = num / den;
        double t = 1.0;
        bool accepted = false;
        cplx trial{};
        double trial_obj = obj;
        for (int h = 0; h < 60; ++h, t *= 0.5) {
            trial = k + t * step;
            trial_obj = detail::coupling_objective(d, bare, trial);
            if (trial_obj < obj) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.converged = true;
            break;
        }
        const double change = obj - trial_obj;
        k = trial;
        const double prev = obj;
        obj = trial_obj;
        if (change <= opt.relative_tolerance * prev || std::abs(t * step) <= 1e-15 * std::max(std::abs(k), 1e-300)) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    res.coupling = {detail::canonical_kappa(k)};
    res.model = bare.with_coupling(res.coupling);
    res.residual_norm = std::sqrt(obj);
    return res;
}

struct UnlabeledFit {
    FitResult kappa;        ///< started from init
    FitResult conjugate;    ///< started from conj(init)
    const FitResult& best() const { return conjugate.residual_norm < kappa.residual_norm ? conjugate : kappa; }
};

/// For data of unknown propagation direction: fits from init and from its
/// conjugate and keeps both.
inline UnlabeledFit fit_coupling_unlabeled(const BranchData& d, Coupling init, const HybridModel& bare,
                                           const FitOptions& opt = {}) {
    return {fit_coupling(d, init, bare, opt), fit_coupling(d, init.reversed(), bare, opt)};
}

struct LorentzianDip {
    double center = 0.0;      ///< Hz
    double half_width = 0.0;  ///< Hz
    double depth = 0.0;
    double baseline = 0.0;

    double operator()(double f) const {
        const double x = (f - center) / half_width;
        return baseline - depth / (1.0 + x * x);
    }
};

/// Least-squares Lorentzian dip y = B - A / (1 + ((f - f0)/g)^2).
inline LorentzianDip fit_lorentzian_dip(std::span<const double> freq, std::span<const double> y) {
    if (freq.size() != y.size()) throw DataError("fit_lorentzian_dip: axis and data differ in length");
    if (freq.size() < 5) throw DataError("fit_lorentzian_dip: needs at least 5 points");
    require_strictly_increasing(freq, "fit_lorentzian_dip: frequency axis");
    const auto lo = std::min_element(y.begin(), y.end());
    const auto hi = std::max_element(y.begin(), y.end());
    const std::size_t i0 = static_cast<std::size_t>(lo - y.begin());
    LorentzianDip seed{freq[i0], 0.0, *hi - *lo, *hi};
    // Half width from the half-depth crossings.
    const double half = *hi - 0.5 * seed.depth;
    std::size_t l = i0, r = i0;
    while (l > 0 && y[l] < half) --l;
    while (r + 1 < y.size() && y[r] < half) ++r;
    seed.half_width = std::max(0.5 * (freq[r] - freq[l]), freq[1] - freq[0]);
    if (!(seed.depth > 0.0)) throw DataError("fit_lorentzian_dip: flat data, no dip");

    auto unpack = [&](const std::vector<double>& x) {
        return LorentzianDip{seed.center + x[0] * seed.half_width, seed.half_width * std::exp(x[1]),
                             seed.depth * x[2], seed.baseline + seed.depth * x[3]};
    };
    auto cost = [&](const std::vector<double>& x) {
        const LorentzianDip m = unpack(x);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = m(freq[i]) - y[i];
            s += e * e;
        }
        return s;
    };
    SimplexOptions so;
    so.initial_step = 0.1;
    std::vector<double> x{0.0, 0.0, 1.0, 0.0};
    // Restarts refresh a collapsed simplex.
    for (int pass = 0; pass < 4; ++pass) x = nelder_mead(cost, x, so).x;
    return unpack(x);
}

/// Linear least squares of w^2 = g^2 H^2 + g^2 Ms H over a resonance locus.
inline KittelParams fit_kittel(std::span<const double> field, std::span<const double> omega, double alpha = 1e-4) {
    if (field.size() != omega.size()) throw DataError("fit_kittel: field and frequency lists differ in length");
    if (field.size() < 2) throw DataError("fit_kittel: needs at least two locus points");
    double s44 = 0, s34 = 0, s22 = 0, y4 = 0, y2 = 0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double h = field[i], w2 = omega[i] * omega[i];
        s44 += h * h * h * h;
        s34 += h * h * h;
        s22 += h * h;
        y4 += w2 * h * h;
        y2 += w2 * h;
    }
    const double det = s44 * s22 - s34 * s34;
    if (!(std::abs(det) > 1e-30 * s44 * s22)) throw DataError("fit_kittel: locus fields are not distinct");
    const double p = (y4 * s22 - s34 * y2) / det;
    const double q = (s44 * y2 - s34 * y4) / det;
    if (!(p > 0.0) || !(q > 0.0)) throw DataError("fit_kittel: locus is not Kittel-like");
    KittelParams k;
    k.gamma_mu0 = std::sqrt(p);
    k.mu0_Ms = q / p;
    k.alpha = alpha;
    return k;
}

struct BareModeData {
    std::vector<double> frequency;  ///< Hz, transmission spectrum far from the crossing
    std::vector<double> magnitude;  ///< |S21|
    std::vector<double> locus_field;      ///< T
    std::vector<double> locus_frequency;  ///< Hz, magnon resonance at each locus field
    double exclusion = 200.0e6;           ///< Hz, locus points closer than this to the ISRR are dropped
};

struct BareModeFit {
    BareMode isrr;
    KittelParams kittel;
    std::size_t locus_points_used = 0;
};

inline BareModeFit fit_bare_modes(const BareModeData& d, double alpha = 1e-4) {
    const LorentzianDip dip = fit_lorentzian_dip(d.frequency, d.magnitude);
    BareModeFit out;
    out.isrr = {angular(dip.center), angular(dip.half_width)};
    std::vector<double> h, w;
    for (std::size_t i = 0; i < d.locus_field.size() && i < d.locus_frequency.size(); ++i) {
        if (std::abs(d.locus_frequency[i] - dip.center) > d.exclusion) {
            h.push_back(d.locus_field[i]);
            w.push_back(angular(d.locus_frequency[i]));
        }
    }
    std::vector<double> distinct = h;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        std::ostringstream os;
        os << "fit_bare_modes: fewer than two locus fields lie off resonance";
        if (d.locus_field.size() >= 2) {
            std::vector<double> aw;
            for (double f : d.locus_frequency) aw.push_back(angular(f));
            try {
                const KittelParams k = fit_kittel(d.locus_field, aw, alpha);
                const double lo = kittel_field(angular(dip.center - d.exclusion), k);
                const double hi = kittel_field(angular(dip.center + d.exclusion), k);
                os << "; add points below " << lo * 1e3 << " mT or above " << hi * 1e3 << " mT";
            } catch (const DataError&) {
            }
        }
        throw DataError(os.str());
    }
    out.kittel = fit_kittel(h, w, alpha);
    out.locus_points_used = h.size();
    return out;
}

struct CalibrationTargets {
    double omega_isrr = angular(3.4e9);  ///< rad/s
    cplx kappa{0.0296, 0.0088};          ///< forward-direction coupling
    double crossing_field = 0.0;         ///< T, 0 keeps the seed's Kittel parameters
};

struct CalibrationResult {
    CircuitParams params;
    double omega_error = 0.0;  ///< relative
    double gap_error = 0.0;    ///< relative
    double ratio_error = 0.0;  ///< relative, |Im/Re| of Mc against kappa
    std::size_t iterations = 0;
    bool converged = false;
};

/// Real splitting of the two shunt resonances at the field where the Kittel
/// line crosses the loaded ISRR frequency.
inline double circuit_branch_gap(const CircuitParams& p) {
    const double hc = kittel_field(p.isrr_omega(), p.kittel);
    const auto r = shunt_resonances(hc, p);
    return r[1].real() - r[0].real();
}

/// Adjusts L_isrr (loaded resonance), Ms (crossing field), arg(Mc) (its
/// Re:Im ratio mirrors kappa) and the effective |Mc| through mc_scale (branch
/// gap equal to w_isrr Re(kappa)). Quantities already on target are left untouched.
inline CalibrationResult calibrate_circuit(const CalibrationTargets& t, const CircuitParams& seed) {
    seed.validate();
    if (!(t.omega_isrr > 0.0) || !(t.kappa.real() > 0.0)) throw DataError("calibrate_circuit: targets out of range");
    CalibrationResult res;
    CircuitParams p = seed;
    constexpr double keep = 1e-12;

    if (std::abs(p.isrr_omega() / t.omega_isrr - 1.0) > keep)
        p.L_isrr = 1.0 / (t.omega_isrr * t.omega_isrr * (p.C0 + p.C_isrr));

    if (t.crossing_field > 0.0 && std::abs(kittel_field(t.omega_isrr, p.kittel) / t.crossing_field - 1.0) > keep) {
        const double g = p.kittel.gamma_mu0;
        const double ms = t.omega_isrr * t.omega_isrr / (g * g * t.crossing_field) - t.crossing_field;
        if (ms > 0.0) p.kittel.mu0_Ms = ms;
    }

    const double target_arg = -std::arg(t.kappa);
    if (p.Mc == 0.0) throw DataError("calibrate_circuit: seed Mc is zero");
    if (std::abs(std::arg(p.Mc) - target_arg) > keep) p.Mc = std::polar(std::abs(p.Mc), target_arg);

    const double target_gap = t.omega_isrr * t.kappa.real();
    double gap = circuit_branch_gap(p);
    if (std::abs(gap / target_gap - 1.0) > 1e-9) {
        // The splitting grows like sqrt(mc_scale) near the crossing.
        for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
            const double ratio = target_gap / gap;
            p.mc_scale *= ratio * ratio;
            gap = circuit_branch_gap(p);
            if (std::abs(gap / target_gap - 1.0) < 1e-10) break;
        }
    }
    res.params = p;
    res.omega_error = std::abs(p.isrr_omega() / t.omega_isrr - 1.0);
    res.gap_error = std::abs(gap / target_gap - 1.0);
    const double want = std::abs(t.kappa.imag() / t.kappa.real());
    const double have = std::abs(p.Mc.imag() / p.Mc.real());
    res.ratio_error = want > 0.0 ? std::abs(have / want - 1.0) : std::abs(have);
    res.converged = res.omega_error < 0.01 && res.gap_error < 0.01 && res.ratio_error < 0.01;
    return res;
}

}  // namespace pmnri
