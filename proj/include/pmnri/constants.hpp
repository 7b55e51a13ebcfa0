#pragma once

#include <complex>
#include <numbers>

/// Sign convention used throughout the library.
///
/// Time dependence is exp(+i w t). With it an inductor has impedance +i w L,
/// a lossy refractive index reads n = n' - i n'' with n'' > 0, and complex
/// permittivity / permeability read eps = eps' - i eps'' with eps'' > 0 for
/// loss. Resonator frequencies are written w~ = w - i dw and dw > 0 is loss,
/// dw < 0 is anti-damping. Every module follows this convention; nothing
/// flips signs on input or output.
namespace pmnri {

using cplx = std::complex<double>;

namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Speed of light in vacuum, m/s.
inline constexpr double c0 = 299792458.0;
/// Vacuum permeability, H/m (CODATA 2018).
inline constexpr double mu0 = 1.25663706212e-6;
/// Vacuum permittivity, F/m.
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
/// Free-space wave impedance, ohm.
inline constexpr double eta0 = mu0 * c0;
/// Reference impedance of the feed line and the VNA ports, ohm.
inline constexpr double z_ref = 50.0;

}  // namespace constants

inline constexpr cplx I{0.0, 1.0};

/// Angular frequency from a frequency in Hz.
constexpr double angular(double hertz) { return constants::two_pi * hertz; }
/// Frequency in Hz from an angular frequency.
constexpr double hertz(double angular_frequency) { return angular_frequency / constants::two_pi; }

}  // namespace pmnri
