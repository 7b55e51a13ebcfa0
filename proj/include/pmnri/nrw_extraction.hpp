#pragma once

// Nicolson-Ross-Weir retrieval of n, z, eps and mu from two-port data.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "circuit_model.hpp"
#include "constants.hpp"
#include "error.hpp"
#include "sparams.hpp"

namespace pmnri {

enum class DeembedMode { subtract, ratio };

/// Removes the empty-fixture response. Transmission terms are subtracted
/// (or divided in ratio mode); reflection terms pass through unchanged.
inline TwoPortSpectrum de_embed(const TwoPortSpectrum& total, const TwoPortSpectrum& background,
                                DeembedMode mode = DeembedMode::subtract) {
    if (total.size() != background.size()) {
        std::ostringstream os;
        os << "de_embed: axis lengths differ (" << total.size() << " vs " << background.size() << ")";
        throw DataError(os.str());
    }
    for (std::size_t i = 0; i < total.size(); ++i) {
        if (total.frequency[i] != background.frequency[i]) {
            std::ostringstream os;
            os.precision(12);
            os << "de_embed: frequency axes differ at index " << i << " (" << total.frequency[i] << " Hz vs "
               << background.frequency[i] << " Hz)";
            throw DataError(os.str());
        }
    }
    TwoPortSpectrum out = total;
    for (std::size_t i = 0; i < total.size(); ++i) {
        if (mode == DeembedMode::subtract) {
            out.s21[i] -= background.s21[i];
            out.s12[i] -= background.s12[i];
        } else {
            if (background.s21[i] == 0.0 || background.s12[i] == 0.0) {
                std::ostringstream os;
                os << "de_embed: zero background transmission at " << total.frequency[i] << " Hz";
                throw SingularityError(os.str());
            }
            out.s21[i] /= background.s21[i];
            out.s12[i] /= background.s12[i];
        }
    }
    return out;
}

/// Normalized impedance sqrt(((1 + S11)^2 - S21^2) / ((1 - S11)^2 - S21^2)),
/// root with Re(z) >= 0 and, on a tie, Im(z) >= 0.
inline cplx impedance_from_s(cplx s11, cplx s21) {
    const cplx num = (1.0 + s11) * (1.0 + s11) - s21 * s21;
    const cplx den = (1.0 - s11) * (1.0 - s11) - s21 * s21;
    if (std::abs(den) < 1e-14) throw SingularityError("impedance_from_s: vanishing denominator");
    cplx z = std::sqrt(num / den);
    if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() < 0.0)) z = -z;
    return z;
}

inline cplx reflection_from_impedance(cplx z) {
    if (z == -1.0) throw SingularityError("reflection_from_impedance: z = -1");
    return (z - 1.0) / (z + 1.0);
}

/// P = (S11 + S21 - Gamma) / (1 - (S11 + S21) Gamma).
inline cplx propagation_term(cplx s11, cplx s21, cplx z) {
    const cplx g = reflection_from_impedance(z);
    const cplx den = 1.0 - (s11 + s21) * g;
    if (std::abs(den) < 1e-14) throw SingularityError("propagation_term: vanishing denominator");
    return (s11 + s21 - g) / den;
}

/// n = i (ln P + 2 pi i k) / (k0 ls).
inline cplx refractive_index(cplx P, double ls, double frequency, int branch = 0) {
    if (P == 0.0) throw SingularityError("refractive_index: P = 0");
    if (!(ls > 0.0)) throw DataError("refractive_index: ls must be positive");
    if (!(frequency > 0.0)) throw DataError("refractive_index: frequency must be positive");
    const double k0 = angular(frequency) / constants::c0;
    return I * (std::log(P) + I * (constants::two_pi * branch)) / (k0 * ls);
}

struct NriCondition {
    double value = 0.0;
    bool is_nri = false;
};

/// eps' mu'' + eps'' mu' with the loss-positive parts eps'' = -Im(eps), mu'' = -Im(mu).
inline NriCondition nri_condition(cplx eps, cplx mu) {
    const double v = eps.real() * (-mu.imag()) + (-eps.imag()) * mu.real();
    return {v, v < 0.0};
}

struct ExtractionConfig {
    double ls = 0.005;  ///< m
    BranchPolicy branch = BranchPolicy::principal;
    /// Largest accepted |n(f_i+1) - n(f_i)|; bigger steps are reported.
    double jump_threshold = 5.0;
};

struct MaterialRow {
    double frequency = 0.0;
    cplx n{};
    cplx z{};
    cplx eps{};
    cplx mu{};
    double nri_value = 0.0;
    int branch = 0;
    bool valid = true;  ///< false where a formula was singular; the complex fields are NaN then
};

struct MaterialSpectrum {
    std::vector<MaterialRow> rows;
    std::vector<std::size_t> jumps;  ///< indices i where |n_i - n_{i-1}| exceeded the jump threshold
};

/// Full retrieval for one point on a fixed branch.
inline MaterialRow extract_point(double frequency, cplx s11, cplx s21, double ls, int branch = 0) {
    MaterialRow r;
    r.frequency = frequency;
    r.z = impedance_from_s(s11, s21);
    const cplx P = propagation_term(s11, s21, r.z);
    r.n = refractive_index(P, ls, frequency, branch);
    r.branch = branch;
    r.eps = r.n / r.z;
    r.mu = r.n * r.z;
    r.nri_value = nri_condition(r.eps, r.mu).value;
    return r;
}

/// Extracts a whole spectrum. Forward uses (S11, S21); reverse uses (S22, S12).
inline MaterialSpectrum extract(const TwoPortSpectrum& s, const ExtractionConfig& cfg,
                                Direction d = Direction::forward) {
    s.validate();
    if (!(cfg.ls > 0.0)) throw DataError("extract: ls must be positive");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MaterialSpectrum out;
    out.rows.reserve(s.size());
    std::optional<cplx> prev;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const cplx refl = d == Direction::forward ? s.s11[i] : s.s22[i];
        const cplx trans = d == Direction::forward ? s.s21[i] : s.s12[i];
        MaterialRow r;
        try {
            r = extract_point(s.frequency[i], refl, trans, cfg.ls, 0);
            if (cfg.branch == BranchPolicy::continuity && prev) {
                const double k0l = angular(s.frequency[i]) / constants::c0 * cfg.ls;
                // Adjacent branches differ by 2 pi / (k0 ls) in Re(n).
                const double step = constants::two_pi / k0l;
                const int k = static_cast<int>(std::lround((prev->real() - r.n.real()) / step));
                if (k != 0) r = extract_point(s.frequency[i], refl, trans, cfg.ls, -k);
            }
        } catch (const SingularityError&) {
            r = MaterialRow{};
            r.frequency = s.frequency[i];
            r.n = r.z = r.eps = r.mu = cplx(nan, nan);
            r.nri_value = nan;
            r.valid = false;
        }
        if (r.valid) {
            if (prev && std::abs(r.n - *prev) > cfg.jump_threshold) out.jumps.push_back(i);
            prev = r.n;
        }
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace pmnri
