#pragma once

// Calibrated default parameter set. The two-mode model reproduces the
// anti-damping intervals 50.3-64.4 mT (upper branch, kappa) and 56.5-70.7 mT
// (lower branch, conj(kappa)); the circuit values reproduce the NRI regions
// on the default grid.

#include "circuit_model.hpp"
#include "constants.hpp"
#include "coupled_modes.hpp"

namespace pmnri::defaults {

inline constexpr double isrr_frequency = 3.4e9;  ///< Hz
inline constexpr cplx kappa{0.0296, 0.0088};
inline constexpr cplx Mc{0.0093, -0.0028};
inline constexpr double M0 = 0.085;

inline KittelParams kittel() {
    KittelParams k;
    k.gamma_mu0 = angular(28.0e9);
    k.mu0_Ms = 0.18391251;
    k.alpha = 0.0083;
    return k;
}

inline HybridModel hybrid_model() {
    HybridModel m;
    m.isrr = {angular(isrr_frequency), angular(3.95903512e6)};
    m.magnon_linewidth = angular(9.38371172e6);
    m.kittel = kittel();
    m.coupling = {kappa};
    return m;
}

inline CircuitDesign circuit_design() {
    CircuitDesign d;
    d.line_index = 1.78029483;
    d.z_line = constants::z_ref;
    d.ls = 0.005;
    d.isrr_frequency = isrr_frequency;
    d.capacitance_ratio = 0.23645732;
    d.isrr_half_linewidth = 54.41225544e6;
    d.M0 = M0;
    d.Mc = std::polar(std::abs(Mc), -std::arg(kappa));
    d.ext = 0.11;
    d.mc_scale = 0.66;
    d.kittel = kittel();
    return d;
}

inline CircuitParams circuit() { return circuit_design().params(); }

}  // namespace pmnri::defaults
