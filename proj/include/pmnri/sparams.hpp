#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "axis.hpp"
#include "constants.hpp"
#include "error.hpp"

namespace pmnri {

/// S-parameters of a two-port at one frequency.
struct SParams {
    cplx s11{};
    cplx s21{};
    cplx s12{};
    cplx s22{};
};

/// Frequency-indexed two-port data. Column order follows the Touchstone v1
/// convention: S11, S21, S12, S22.
struct TwoPortSpectrum {
    std::vector<double> frequency;  ///< Hz
    std::vector<cplx> s11, s21, s12, s22;

    std::size_t size() const { return frequency.size(); }
    bool empty() const { return frequency.empty(); }

    void reserve(std::size_t n) {
        frequency.reserve(n);
        s11.reserve(n);
        s21.reserve(n);
        s12.reserve(n);
        s22.reserve(n);
    }

    void push_back(double f, const SParams& s) {
        frequency.push_back(f);
        s11.push_back(s.s11);
        s21.push_back(s.s21);
        s12.push_back(s.s12);
        s22.push_back(s.s22);
    }

    SParams at(std::size_t i) const { return {s11.at(i), s21.at(i), s12.at(i), s22.at(i)}; }

    /// Throws DataError unless the axis increases strictly and every entry is finite.
    void validate() const {
        const std::size_t n = frequency.size();
        if (s11.size() != n || s21.size() != n || s12.size() != n || s22.size() != n)
            throw DataError("two-port spectrum columns differ in length");
        require_strictly_increasing(frequency, "frequency axis");
        auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(frequency[i]) || !finite(s11[i]) || !finite(s21[i]) || !finite(s12[i]) || !finite(s22[i]))
                throw DataError("non-finite entry at index " + std::to_string(i));
        }
    }
};

/// Slab of index n and normalized impedance z between matched ports:
/// S21 = (1 - G^2) P / (1 - G^2 P^2), S11 = G (1 - P^2) / (1 - G^2 P^2),
/// with G = (z - 1)/(z + 1) and P = exp(-i k0 n ls).
inline SParams slab_sparams(cplx n, cplx z, double k0, double ls) {
    if (z == -1.0) throw SingularityError("slab_sparams: z = -1");
    const cplx g = (z - 1.0) / (z + 1.0);
    const cplx p = std::exp(-I * k0 * n * ls);
    const cplx d = 1.0 - g * g * p * p;
    if (std::abs(d) < 1e-14) throw SingularityError("slab_sparams: 1 - Gamma^2 P^2 vanishes");
    SParams s;
    s.s21 = (1.0 - g * g) * p / d;
    s.s11 = g * (1.0 - p * p) / d;
    s.s12 = s.s21;
    s.s22 = s.s11;
    return s;
}

}  // namespace pmnri
