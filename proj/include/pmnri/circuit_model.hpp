#pragma once

// Lumped transmission-line cell loaded by an ISRR tank and a YIG sphere.
// One cell of length ls has a series branch Z (line inductance plus the
// microstrip-YIG mutual term) and a shunt branch Y (line capacitance in series
// with the ISRR tank, whose inductive arm carries the ISRR-YIG mutual term).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "coupled_modes.hpp"
#include "error.hpp"
#include "sparams.hpp"

namespace pmnri {

enum class Direction { forward, reverse };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "reverse"; }

/// Branch policy for the Bloch phase and for the logarithm in the extraction.
///
/// principal: each frequency point is resolved on its own (passive root of the
///   cell impedance, principal log); no 2 pi k offsets are ever added.
/// continuity: starts on the principal branch at the lowest frequency, then
///   picks, among all branches, the one nearest the previous point.
enum class BranchPolicy { principal, continuity };

inline const char* to_string(BranchPolicy b) { return b == BranchPolicy::principal ? "principal" : "continuity"; }

struct YigInductanceParams {
    KittelParams kittel;
    double L0 = 0.0;  ///< H
};

struct CircuitParams {
    double L0 = 0.0;      ///< H per cell
    double C0 = 0.0;      ///< F per cell
    double L_isrr = 0.0;  ///< H
    double C_isrr = 0.0;  ///< F
    double R_isrr = 0.0;  ///< ohm
    double M0 = 0.0;      ///< microstrip-YIG coupling
    cplx Mc{};            ///< ISRR-YIG coupling for the forward direction
    double ls = 0.005;    ///< m
    double G = constants::z_ref / constants::eta0;
    double ext = 1.0;       ///< factor turning L_YIG into L_YIG,ext in the series branch
    double mc_scale = 1.0;  ///< coupling efficiency multiplying Mc in the tank
    KittelParams kittel;

    cplx mc(Direction d) const { return d == Direction::forward ? Mc : std::conj(Mc); }

    YigInductanceParams yig() const { return {kittel, L0}; }

    /// Mutual coupling term of the tank, mc_scale * Mc or its conjugate.
    cplx tank_coupling(Direction d) const { return mc_scale * mc(d); }

    /// Resonance of the loaded ISRR tank: L_isrr against C_isrr in parallel
    /// with the line capacitance that feeds it. This is where the transmission
    /// dip of the bare resonator sits.
    double isrr_omega() const { return 1.0 / std::sqrt(L_isrr * (C0 + C_isrr)); }

    /// Half linewidth of the bare tank, rad/s.
    double isrr_linewidth() const { return 1.0 / (2.0 * R_isrr * C_isrr); }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DataError(std::string(name) + " must be positive and finite");
        };
        positive(L0, "L0");
        positive(C0, "C0");
        positive(L_isrr, "L_isrr");
        positive(C_isrr, "C_isrr");
        positive(R_isrr, "R_isrr");
        positive(ls, "ls");
        positive(G, "G");
        positive(ext, "ext");
        positive(mc_scale, "mc_scale");
        if (!(M0 >= 0.0) || !std::isfinite(M0)) throw DataError("M0 must be non-negative");
        if (!std::isfinite(Mc.real()) || !std::isfinite(Mc.imag())) throw DataError("Mc must be finite");
        kittel.validate();
    }
};

/// Builds a cell from physical targets.
struct CircuitDesign {
    double line_index = 1.0;                   ///< n of the bare line cell
    double z_line = constants::z_ref;          ///< sqrt(L0/C0), ohm
    double ls = 0.005;                         ///< m
    double isrr_frequency = 3.4e9;             ///< Hz, loaded tank resonance
    double capacitance_ratio = 0.25;           ///< C_isrr / C0
    double isrr_half_linewidth = 30.0e6;       ///< Hz, sets R_isrr
    double M0 = 0.085;
    cplx Mc{0.0093, -0.0028};
    double ext = 1.0;
    double mc_scale = 1.0;
    KittelParams kittel;

    CircuitParams params() const {
        if (!(line_index > 0.0 && z_line > 0.0 && ls > 0.0 && isrr_frequency > 0.0 && capacitance_ratio > 0.0 &&
              isrr_half_linewidth > 0.0))
            throw DataError("circuit design values must be positive");
        CircuitParams p;
        const double tau = line_index * ls / constants::c0;
        p.L0 = z_line * tau;
        p.C0 = tau / z_line;
        p.C_isrr = capacitance_ratio * p.C0;
        const double w = angular(isrr_frequency);
        p.L_isrr = 1.0 / (w * w * (p.C0 + p.C_isrr));
        p.R_isrr = 1.0 / (2.0 * angular(isrr_half_linewidth) * p.C_isrr);
        p.M0 = M0;
        p.Mc = Mc;
        p.ls = ls;
        p.G = z_line / constants::eta0;
        p.ext = ext;
        p.mc_scale = mc_scale;
        p.kittel = kittel;
        return p;
    }
};

/// Polder-form YIG inductance
/// L0 wm (wH + wm + i w alpha) / (wr^2 - w^2 + i w alpha (2 wH + wm)).
inline cplx l_yig(double omega, double mu0_H, const YigInductanceParams& p) {
    if (!(omega >= 0.0)) throw DataError("l_yig: omega must be non-negative");
    if (!(mu0_H >= 0.0)) throw DataError("l_yig: field must be non-negative");
    const double wH = p.kittel.omega_H(mu0_H);
    const double wm = p.kittel.omega_m();
    const double a = p.kittel.alpha;
    const cplx num = wm * cplx(wH + wm, omega * a);
    const cplx den = cplx(wH * (wH + wm) - omega * omega, omega * a * (2.0 * wH + wm));
    if (den == 0.0) {
        std::ostringstream os;
        os << "l_yig: undamped pole at f = " << hertz(omega) << " Hz, mu0H = " << mu0_H << " T";
        throw SingularityError(os.str());
    }
    return p.L0 * num / den;
}

/// Series impedance of one cell: i w L0 + i w M0^2 ext L_YIG.
inline cplx series_impedance(double omega, double mu0_H, const CircuitParams& p) {
    if (omega == 0.0) return 0.0;
    const cplx ly = l_yig(omega, mu0_H, p.yig());
    return I * omega * p.L0 + I * omega * (p.M0 * p.M0 * p.ext) * ly;
}

/// Shunt admittance of one cell: C0 in series with the ISRR tank
/// (L_isrr + mc_scale Mc L_YIG) || C_isrr || R_isrr.
inline cplx shunt_admittance(double omega, double mu0_H, const CircuitParams& p, Direction d = Direction::forward) {
    if (omega == 0.0) return 0.0;
    const cplx ly = l_yig(omega, mu0_H, p.yig());
    const cplx z_arm = I * omega * p.L_isrr + I * omega * p.tank_coupling(d) * ly;
    if (z_arm == 0.0) throw SingularityError("shunt_admittance: inductive arm of the ISRR tank has zero impedance");
    const cplx y_tank = 1.0 / z_arm + I * omega * p.C_isrr + 1.0 / p.R_isrr;
    if (y_tank == 0.0) throw SingularityError("shunt_admittance: ISRR tank admittance vanishes");
    const cplx z_total = 1.0 / (I * omega * p.C0) + 1.0 / y_tank;
    if (z_total == 0.0) throw SingularityError("shunt_admittance: series resonance of C0 and the tank");
    return 1.0 / z_total;
}

/// Bloch impedance Z cot(theta/2) / (2i) of a symmetric cell.
inline cplx bloch_impedance(cplx z_se, cplx theta) {
    const cplx h = 0.5 * theta;
    const cplx s = std::sin(h);
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    return z_se * std::cos(h) / s / (2.0 * I);
}

/// Passive Bloch phase of one cell: 2 asin(sqrt(Z Y)/(2i)) with the sign
/// chosen so that the Bloch impedance has a non-negative real part. Lossless
/// ties keep Re(theta) >= 0.
inline cplx bloch_phase(cplx z_se, cplx y_sh) {
    const cplx zy = z_se * y_sh;
    if (zy == 0.0) return 0.0;
    cplx theta = 2.0 * std::asin(std::sqrt(zy) / (2.0 * I));
    const double re_zb = bloch_impedance(z_se, theta).real();
    const double scale = std::abs(z_se) + 1e-300;
    if (re_zb < -1e-13 * scale) {
        theta = -theta;
    } else if (re_zb <= 1e-13 * scale && theta.real() < 0.0) {
        theta = -theta;
    }
    return theta;
}

/// Bloch phases along a frequency sweep at fixed field.
inline std::vector<cplx> bloch_phases(std::span<const cplx> z_se, std::span<const cplx> y_sh, BranchPolicy policy) {
    if (z_se.size() != y_sh.size()) throw DataError("bloch_phases: series and shunt lists differ in length");
    std::vector<cplx> out(z_se.size());
    for (std::size_t i = 0; i < z_se.size(); ++i) {
        const cplx t = bloch_phase(z_se[i], y_sh[i]);
        if (policy == BranchPolicy::principal || i == 0) {
            out[i] = t;
            continue;
        }
        // 2 sin(theta/2) is invariant under theta -> -theta + 4 pi k and theta -> 2 pi - theta + 4 pi k.
        const cplx prev = out[i - 1];
        cplx best = t;
        double best_d = std::abs(t - prev);
        for (int s : {1, -1}) {
            for (int k = -3; k <= 3; ++k) {
                const double shift = 4.0 * constants::pi * k;
                for (cplx c : {static_cast<double>(s) * t + shift, static_cast<double>(s) * (2.0 * constants::pi - t) + shift}) {
                    const double dist = std::abs(c - prev);
                    if (dist < best_d) {
                        best_d = dist;
                        best = c;
                    }
                }
            }
        }
        out[i] = best;
    }
    return out;
}

/// Effective constants of one cell.
struct MaterialPoint {
    double frequency = 0.0;  ///< Hz
    double field = 0.0;      ///< T
    cplx z_se{};
    cplx y_sh{};
    cplx theta{};
    cplx n{};
    cplx z{};
    cplx eps{};
    cplx mu{};
};

/// n = theta/(k0 ls); eps and mu from the cell immittances with the
/// theta/2 correction brackets; z = sqrt(mu/eps) with Re(z) >= 0.
inline MaterialPoint material_from_immittance(double omega, cplx z_se, cplx y_sh, cplx theta, const CircuitParams& p) {
    if (!(omega > 0.0)) throw DataError("material_from_circuit: omega must be positive");
    MaterialPoint m;
    m.frequency = hertz(omega);
    m.z_se = z_se;
    m.y_sh = y_sh;
    m.theta = theta;
    const double k0 = omega / constants::c0;
    m.n = theta / (k0 * p.ls);
    const cplx h = 0.5 * theta;
    cplx eps_bracket = 1.0;  // (theta/2) / (sin cos)
    cplx mu_bracket = 1.0;   // (theta/2) cos / sin
    if (std::abs(h) > 1e-8) {
        const cplx s = std::sin(h);
        const cplx c = std::cos(h);
        if (s == 0.0 || c == 0.0) throw SingularityError("material_from_circuit: Bloch phase at a band edge");
        eps_bracket = h / (s * c);
        mu_bracket = h * c / s;
    } else {
        // Series to second order; the brackets are 1 + h^2 * (2/3) and 1 - h^2/3.
        eps_bracket = 1.0 + h * h * (2.0 / 3.0);
        mu_bracket = 1.0 - h * h / 3.0;
    }
    m.eps = (y_sh / p.ls) * p.G / (I * omega * constants::eps0) * eps_bracket;
    m.mu = (z_se / p.ls) / (I * omega * constants::mu0 * p.G) * mu_bracket;
    if (m.eps == 0.0) throw SingularityError("material_from_circuit: zero effective permittivity");
    m.z = std::sqrt(m.mu / m.eps);
    if (m.z.real() < 0.0 || (m.z.real() == 0.0 && m.z.imag() < 0.0)) m.z = -m.z;
    return m;
}

inline MaterialPoint material_from_circuit(double omega, double mu0_H, const CircuitParams& p,
                                           Direction d = Direction::forward) {
    const cplx z = series_impedance(omega, mu0_H, p);
    const cplx y = shunt_admittance(omega, mu0_H, p, d);
    MaterialPoint m = material_from_immittance(omega, z, y, bloch_phase(z, y), p);
    m.field = mu0_H;
    return m;
}

/// Material points over a frequency sweep at one field.
inline std::vector<MaterialPoint> material_sweep(std::span<const double> frequency, double mu0_H, const CircuitParams& p,
                                                 Direction d, BranchPolicy policy = BranchPolicy::principal) {
    std::vector<cplx> zs(frequency.size()), ys(frequency.size());
    for (std::size_t i = 0; i < frequency.size(); ++i) {
        const double w = angular(frequency[i]);
        zs[i] = series_impedance(w, mu0_H, p);
        ys[i] = shunt_admittance(w, mu0_H, p, d);
    }
    const auto th = bloch_phases(zs, ys, policy);
    std::vector<MaterialPoint> out;
    out.reserve(frequency.size());
    for (std::size_t i = 0; i < frequency.size(); ++i) {
        out.push_back(material_from_immittance(angular(frequency[i]), zs[i], ys[i], th[i], p));
        out.back().field = mu0_H;
    }
    return out;
}

/// Resonances of the shunt branch at one field: the complex frequencies where
/// the tank, loaded by the line capacitance, has zero admittance. Returned as
/// w - i dw (dw > 0 for loss), sorted by real part, positive-frequency pair only.
inline std::array<cplx, 2> shunt_resonances(double mu0_H, const CircuitParams& p, Direction d = Direction::forward) {
    const double wH = p.kittel.omega_H(mu0_H);
    const double wm = p.kittel.omega_m();
    const double a = p.kittel.alpha;
    const cplx k = p.tank_coupling(d);
    const double C = p.C0 + p.C_isrr;
    // Clearing denominators of 1/(iW(L_isrr + k L_YIG)) + iW C + 1/R = 0 leaves a quartic in W.
    const cplx d2 = -1.0, d1 = I * a * (2.0 * wH + wm), d0 = wH * (wH + wm);
    const cplx n1 = I * p.L0 * wm * a, n0 = p.L0 * wm * (wH + wm);
    const cplx b2 = -p.L_isrr, b1 = p.L_isrr * d1 + k * n1, b0 = p.L_isrr * d0 + k * n0;
    const cplx e2 = -C, e1 = I / p.R_isrr;
    std::array<cplx, 5> c{d0, e1 * b0 + d1, e2 * b0 + e1 * b1 + d2, e2 * b1 + e1 * b2, e2 * b2};
    for (auto& v : c) v /= c[4];
    // Durand-Kerner iteration seeded on a circle around the ISRR frequency.
    const double scale = p.isrr_omega();
    std::array<cplx, 4> r;
    for (int i = 0; i < 4; ++i) r[i] = scale * std::pow(cplx(0.4, 0.9), i);
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < 4; ++i) {
            cplx num = c[4];
            for (int j = 3; j >= 0; --j) num = num * r[i] + c[j];
            cplx den = 1.0;
            for (int j = 0; j < 4; ++j)
                if (j != i) den *= r[i] - r[j];
            const cplx step = num / den;
            r[i] -= step;
            moved = std::max(moved, std::abs(step) / scale);
        }
        if (moved < 1e-15) break;
    }
    std::array<cplx, 2> out{};
    int count = 0;
    std::sort(r.begin(), r.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    for (const cplx& w : r)
        if (w.real() > 0.0 && count < 2) out[count++] = std::conj(w);
    if (count != 2) throw SingularityError("shunt_resonances: positive-frequency pair not found");
    return out;
}

/// S-parameters of a homogeneous slab built from material points. The slab is
/// reciprocal and symmetric within one direction; the two directions differ
/// through the material points themselves.
inline TwoPortSpectrum synth_sparams(std::span<const MaterialPoint> points, double ls) {
    TwoPortSpectrum out;
    out.reserve(points.size());
    for (const auto& m : points) {
        const double k0 = angular(m.frequency) / constants::c0;
        out.push_back(m.frequency, slab_sparams(m.n, m.z, k0, ls));
    }
    require_strictly_increasing(out.frequency, "synth_sparams: frequency axis");
    return out;
}

}  // namespace pmnri
