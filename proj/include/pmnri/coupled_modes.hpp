#pragma once

// Two-mode non-Hermitian model of the ISRR photon mode coupled to the Kittel
// magnon mode: closed-form hybrid eigenvalues, branch tracking through the
// anticrossing, branch linewidths and zero-damping fields.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "axis.hpp"
#include "constants.hpp"
#include "error.hpp"

namespace pmnri {

/// One uncoupled resonator, w~ = omega - i * linewidth.
struct BareMode {
    double omega = 0.0;      ///< rad/s
    double linewidth = 0.0;  ///< half linewidth, rad/s

    cplx complex_frequency() const { return {omega, -linewidth}; }
};

/// Complex coupling constant. The reverse propagation direction uses conj(kappa).
struct Coupling {
    cplx kappa{};

    Coupling reversed() const { return {std::conj(kappa)}; }
    Coupling scaled(double ratio) const { return {kappa * ratio}; }
};

struct KittelParams {
    double gamma_mu0 = constants::two_pi * 28.0e9;  ///< rad/(s T)
    double mu0_Ms = 0.175;                          ///< T
    double alpha = 1.0e-4;                          ///< Gilbert damping

    double omega_H(double mu0_H) const { return gamma_mu0 * mu0_H; }
    double omega_m() const { return gamma_mu0 * mu0_Ms; }

    void validate() const {
        if (!(gamma_mu0 > 0.0) || !std::isfinite(gamma_mu0)) throw DataError("gamma_mu0 must be positive");
        if (!(mu0_Ms > 0.0) || !std::isfinite(mu0_Ms)) throw DataError("mu0_Ms must be positive");
        if (!(alpha >= 0.0 && alpha < 1.0)) throw DataError("alpha must lie in [0, 1)");
    }
};

/// FMR frequency sqrt(wH (wH + wm)) of the uniform mode, rad/s.
inline double kittel_frequency(double mu0_H, const KittelParams& p) {
    if (!(mu0_H >= 0.0)) {
        std::ostringstream os;
        os << "kittel_frequency: field must be non-negative, got " << mu0_H << " T";
        throw DataError(os.str());
    }
    const double wH = p.omega_H(mu0_H);
    return std::sqrt(wH * (wH + p.omega_m()));
}

/// Inverse of kittel_frequency: the field at which the FMR frequency equals omega.
inline double kittel_field(double omega, const KittelParams& p) {
    if (!(omega >= 0.0)) throw DataError("kittel_field: omega must be non-negative");
    const double wm = p.omega_m();
    const double wH = 0.5 * (-wm + std::sqrt(wm * wm + 4.0 * omega * omega));
    return wH / p.gamma_mu0;
}

/// Both roots of the two-mode secular equation; Re(upper) >= Re(lower).
struct HybridPair {
    cplx upper{};
    cplx lower{};
};

/// Hybrid eigenvalues w~(+/-) = ((a + b) +/- sqrt((a - b)^2 + (w_isrr kappa)^2)) / 2
/// with a, b the complex bare frequencies. The kappa prefactor is the real
/// ISRR frequency, not the complex one.
inline HybridPair hybrid_eigenvalues(const BareMode& isrr, const BareMode& magnon, const Coupling& coupling) {
    const cplx a = isrr.complex_frequency();
    const cplx b = magnon.complex_frequency();
    const auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    if (!finite(a) || !finite(b) || !finite(coupling.kappa))
        throw DataError("hybrid_eigenvalues: non-finite input");
    const cplx d = a - b;
    const cplx k = isrr.omega * coupling.kappa;
    const cplx s = std::sqrt(d * d + k * k);
    const cplx trace = a + b;
    cplx p = 0.5 * (trace + s);
    cplx m = 0.5 * (trace - s);
    if (p.real() < m.real()) std::swap(p, m);
    return {p, m};
}

enum class Branch { upper, lower };

inline const char* to_string(Branch b) { return b == Branch::upper ? "upper" : "lower"; }

/// Two continuous curves through a field sweep. `upper` is the curve that
/// starts with the larger real part at the first field point.
struct BranchCurves {
    std::vector<double> field;
    std::vector<cplx> upper;
    std::vector<cplx> lower;
    /// Indices where both pairings were equally close; the previous ordering was kept.
    std::vector<std::size_t> ties;

    const std::vector<cplx>& curve(Branch b) const { return b == Branch::upper ? upper : lower; }
};

/// Pairs consecutive eigenvalues by minimum total complex distance.
inline BranchCurves track_branches(std::span<const double> field, std::span<const HybridPair> pairs) {
    if (field.size() != pairs.size()) throw DataError("track_branches: field axis and eigenvalue list differ in length");
    if (!strictly_monotonic(field)) throw DataError("track_branches: field axis must be strictly monotonic");
    BranchCurves out;
    out.field.assign(field.begin(), field.end());
    if (pairs.empty()) return out;
    out.upper.reserve(pairs.size());
    out.lower.reserve(pairs.size());
    out.upper.push_back(pairs[0].upper);
    out.lower.push_back(pairs[0].lower);
    bool swapped = false;  // previous step assigned pair.lower to the upper curve
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const cplx a = out.upper.back();
        const cplx b = out.lower.back();
        const double keep = std::abs(pairs[i].upper - a) + std::abs(pairs[i].lower - b);
        const double swap = std::abs(pairs[i].lower - a) + std::abs(pairs[i].upper - b);
        const double scale = std::abs(a) + std::abs(b);
        if (std::abs(keep - swap) <= 1e-14 * scale) {
            out.ties.push_back(i);
        } else {
            swapped = swap < keep;
        }
        out.upper.push_back(swapped ? pairs[i].lower : pairs[i].upper);
        out.lower.push_back(swapped ? pairs[i].upper : pairs[i].lower);
    }
    return out;
}

/// Linewidth of one tracked branch along the field axis.
struct DampingProfile {
    std::vector<double> field;      ///< T
    std::vector<double> linewidth;  ///< rad/s; positive is loss, negative anti-damping
    Branch branch = Branch::upper;
};

/// dw(H) = -Im(w~(H)) for the requested branch.
inline DampingProfile branch_linewidth(const BranchCurves& curves, Branch branch) {
    DampingProfile out;
    out.field = curves.field;
    out.branch = branch;
    const auto& c = curves.curve(branch);
    out.linewidth.reserve(c.size());
    for (const cplx& w : c) out.linewidth.push_back(-w.imag());
    return out;
}

/// Closed field interval [lower, upper], T.
struct FieldInterval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    bool contains(double h) const { return h >= lower && h <= upper; }
};

struct RootTolerance {
    double field = 1e-6;              ///< stop when the bracket is narrower than this, T (1e-3 mT)
    double relative_damping = 1e-6;   ///< or when |dw| < this times max|dw| on the axis
};

namespace detail {

inline double bisect_root(const std::function<double(double)>& f, double a, double b, double fa, double abs_tol,
                          const RootTolerance& tol) {
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (a + b);
        if (std::abs(b - a) < tol.field) return mid;
        const double fm = f(mid);
        if (std::abs(fm) < abs_tol) return mid;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Zero crossings of a sampled damping profile refined by bisection.
///
/// `damping_at` evaluates dw at an arbitrary field inside a bracket; without
/// it the profile is linearly interpolated. Returns nothing when dw keeps one
/// sign. Exactly two crossings with dw < 0 between them yield the
/// anti-damping interval; any other pattern is reported as an error.
inline std::optional<FieldInterval> zero_damping_fields(const DampingProfile& profile,
                                                        std::function<double(double)> damping_at = {},
                                                        const RootTolerance& tol = {}) {
    const auto& h = profile.field;
    const auto& d = profile.linewidth;
    if (h.size() != d.size()) throw DataError("zero_damping_fields: axis and profile differ in length");
    if (!strictly_monotonic(h)) throw DataError("zero_damping_fields: field axis must be strictly monotonic");

    double max_abs = 0.0;
    for (double v : d) max_abs = std::max(max_abs, std::abs(v));
    const double abs_tol = tol.relative_damping * max_abs;

    std::vector<std::pair<std::size_t, std::size_t>> brackets;
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) continue;
        if (last && ((d[i] < 0.0) != (d[*last] < 0.0))) brackets.emplace_back(*last, i);
        last = i;
    }
    if (brackets.empty()) return std::nullopt;

    std::vector<double> roots;
    for (auto [i, j] : brackets) {
        std::function<double(double)> f = damping_at;
        if (!f) {
            f = [&, i, j](double x) {
                const double t = (x - h[i]) / (h[j] - h[i]);
                return d[i] + t * (d[j] - d[i]);
            };
        }
        double a = h[i], b = h[j];
        double fa = d[i];
        if (a > b) {
            std::swap(a, b);
            fa = d[j];
        }
        roots.push_back(detail::bisect_root(f, a, b, fa, abs_tol, tol));
    }
    std::sort(roots.begin(), roots.end());

    if (roots.size() != 2) {
        std::ostringstream os;
        os << "zero_damping_fields: expected two zero-damping crossings, found " << roots.size() << " at";
        for (double r : roots) os << ' ' << r * 1e3 << " mT";
        throw DataError(os.str());
    }
    // The interior must be the anti-damping side.
    const double probe = 0.5 * (roots[0] + roots[1]);
    double inside = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > roots[0] && h[i] < roots[1]) {
            inside = d[i];
            break;
        }
    }
    if (inside == 0.0 && damping_at) inside = damping_at(probe);
    if (inside > 0.0) {
        std::ostringstream os;
        os << "zero_damping_fields: damping is positive between the crossings at " << roots[0] * 1e3 << " and "
           << roots[1] * 1e3 << " mT";
        throw DataError(os.str());
    }
    return FieldInterval{roots[0], roots[1]};
}

/// The two-mode model: a fixed ISRR mode, a Kittel magnon with a constant
/// linewidth, and one coupling constant.
struct HybridModel {
    BareMode isrr;
    double magnon_linewidth = 0.0;  ///< rad/s
    KittelParams kittel;
    Coupling coupling;

    BareMode magnon_at(double mu0_H) const { return {kittel_frequency(mu0_H, kittel), magnon_linewidth}; }

    HybridPair at(double mu0_H) const { return hybrid_eigenvalues(isrr, magnon_at(mu0_H), coupling); }

    /// Field at which the bare modes cross.
    double crossing_field() const { return kittel_field(isrr.omega, kittel); }

    HybridModel with_coupling(Coupling c) const {
        HybridModel m = *this;
        m.coupling = c;
        return m;
    }

    BranchCurves sweep(std::span<const double> field) const {
        std::vector<HybridPair> pairs;
        pairs.reserve(field.size());
        for (double h : field) pairs.push_back(at(h));
        return track_branches(field, pairs);
    }

    DampingProfile damping(std::span<const double> field, Branch branch) const {
        return branch_linewidth(sweep(field), branch);
    }

    /// Anti-damping interval of one branch, refined on the model itself. Inside a
    /// bracket the branch is identified as the eigenvalue nearest the tracked
    /// value at the bracket's left end.
    std::optional<FieldInterval> anti_damping_interval(std::span<const double> field, Branch branch,
                                                       const RootTolerance& tol = {}) const {
        const BranchCurves curves = sweep(field);
        const DampingProfile profile = branch_linewidth(curves, branch);
        const auto& c = curves.curve(branch);
        auto eval = [&](double h) {
            // Locate the grid cell containing h and follow the branch from its left end.
            const auto it = std::upper_bound(curves.field.begin(), curves.field.end(), h);
            std::size_t idx = it == curves.field.begin() ? 0 : static_cast<std::size_t>(it - curves.field.begin() - 1);
            idx = std::min(idx, c.size() - 1);
            const HybridPair p = at(h);
            const cplx ref = c[idx];
            const cplx pick = std::abs(p.upper - ref) <= std::abs(p.lower - ref) ? p.upper : p.lower;
            return -pick.imag();
        };
        if (!strictly_increasing(field)) return zero_damping_fields(profile, {}, tol);
        return zero_damping_fields(profile, eval, tol);
    }
};

}  // namespace pmnri
