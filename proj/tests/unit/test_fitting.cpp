#include <catch_amalgamated.hpp>

#include <pmnri/defaults.hpp>
#include <pmnri/fitting.hpp>
#include <pmnri/optim.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace pmnri;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const cplx kappa_c{0.0296, 0.0088};

BranchData clean_data(cplx kappa, std::size_t points = 201) {
    const HybridModel m = defaults::hybrid_model().with_coupling({kappa});
    return branch_data_from_model(m, linspace(0.045, 0.075, points));
}

}  // namespace

TEST_CASE("closed-form seed is exact on noiseless data", "[fitting]") {
    const BranchData d = clean_data(kappa_c);
    const Coupling k = kappa_seed(d, defaults::hybrid_model());
    REQUIRE(std::abs(k.kappa - kappa_c) < 1e-10);
}

TEST_CASE("coupling fit recovers kappa from noiseless branches", "[fitting]") {
    const BranchData d = clean_data(kappa_c);
    const HybridModel bare = defaults::hybrid_model();
    SECTION("from the closed-form seed") {
        const FitResult r = fit_coupling(d, std::nullopt, bare);
        REQUIRE(r.converged);
        REQUIRE(std::abs(r.coupling.kappa - kappa_c) < 1e-9);
        REQUIRE(r.residual_norm < 1e-3);
    }
    SECTION("from a distant start") {
        const FitResult r = fit_coupling(d, Coupling{{0.05, -0.02}}, bare);
        REQUIRE(std::abs(r.coupling.kappa - kappa_c) < 1e-9);
    }
    SECTION("from the origin") {
        const FitResult r = fit_coupling(d, Coupling{0.0}, bare);
        REQUIRE(std::abs(r.coupling.kappa - kappa_c) < 1e-9);
    }
    SECTION("one branch is enough") {
        BranchData up = d;
        up.lower.clear();
        REQUIRE(std::abs(fit_coupling(up, std::nullopt, bare).coupling.kappa - kappa_c) < 1e-9);
    }
}

TEST_CASE("fitted kappa is reported with a non-negative real part", "[fitting]") {
    const BranchData d = clean_data(kappa_c);
    const FitResult r = fit_coupling(d, Coupling{-kappa_c}, defaults::hybrid_model());
    REQUIRE(r.coupling.kappa.real() > 0.0);
    REQUIRE(std::abs(r.coupling.kappa - kappa_c) < 1e-9);
}

TEST_CASE("noisy fits stay near the truth", "[fitting]") {
    const BranchData clean = clean_data(kappa_c);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 1.0);
    BranchData d = clean;
    for (auto* br : {&d.upper, &d.lower})
        for (cplx& w : *br) w += 0.001 * std::abs(w) * cplx(g(rng), g(rng)) / std::sqrt(2.0);
    const FitResult r = fit_coupling(d, std::nullopt, defaults::hybrid_model());
    REQUIRE(std::abs(r.coupling.kappa - kappa_c) / std::abs(kappa_c) < 0.05);
}

TEST_CASE("weights suppress an outlier", "[fitting]") {
    BranchData d = clean_data(kappa_c, 51);
    // A common shift of both branches leaves their kappa-independent sum
    // unchanged, so only one branch is corrupted.
    d.upper[25] += cplx(5e8, 5e8);
    const HybridModel bare = defaults::hybrid_model();
    const double unweighted = std::abs(fit_coupling(d, std::nullopt, bare).coupling.kappa - kappa_c);
    d.weights.assign(51, 1.0);
    d.weights[25] = 1e-12;
    const double weighted = std::abs(fit_coupling(d, std::nullopt, bare).coupling.kappa - kappa_c);
    REQUIRE(weighted < 1e-6);
    REQUIRE(unweighted > 100.0 * weighted);
}

TEST_CASE("unlabeled data prefers the matching conjugate", "[fitting]") {
    const BranchData d = clean_data(std::conj(kappa_c));
    const UnlabeledFit u = fit_coupling_unlabeled(d, {kappa_c}, defaults::hybrid_model());
    REQUIRE(std::abs(u.best().coupling.kappa - std::conj(kappa_c)) < 1e-9);
    REQUIRE(u.conjugate.residual_norm <= u.kappa.residual_norm);
}

TEST_CASE("branch data validation", "[fitting]") {
    BranchData d = clean_data(kappa_c, 4);
    REQUIRE_THROWS_AS(d.validate(), DataError);
    d = clean_data(kappa_c, 10);
    d.upper.pop_back();
    REQUIRE_THROWS_AS(d.validate(), DataError);
    d = clean_data(kappa_c, 10);
    d.weights.assign(10, 1.0);
    d.weights[3] = -1.0;
    REQUIRE_THROWS_AS(fit_coupling(d, std::nullopt, defaults::hybrid_model()), DataError);
}

TEST_CASE("Lorentzian dip fit", "[fitting]") {
    const LorentzianDip truth{3.41e9, 12e6, 0.7, 0.95};
    const auto f = linspace(3.2e9, 3.6e9, 401);
    std::vector<double> y;
    for (double x : f) y.push_back(truth(x));
    const LorentzianDip fit = fit_lorentzian_dip(f, y);
    REQUIRE_THAT(fit.center, WithinRel(truth.center, 1e-7));
    REQUIRE_THAT(fit.half_width, WithinRel(truth.half_width, 1e-5));
    REQUIRE_THAT(fit.depth, WithinRel(truth.depth, 1e-5));
    const std::vector<double> flat(401, 1.0);
    REQUIRE_THROWS_AS(fit_lorentzian_dip(f, flat), DataError);
}

TEST_CASE("Kittel locus fit", "[fitting]") {
    const KittelParams truth = defaults::kittel();
    const auto h = linspace(0.02, 0.12, 11);
    std::vector<double> w;
    for (double x : h) w.push_back(kittel_frequency(x, truth));
    const KittelParams k = fit_kittel(h, w, truth.alpha);
    REQUIRE_THAT(k.gamma_mu0, WithinRel(truth.gamma_mu0, 1e-10));
    REQUIRE_THAT(k.mu0_Ms, WithinRel(truth.mu0_Ms, 1e-10));
    const std::vector<double> same{0.05, 0.05}, ws{1e10, 1e10};
    REQUIRE_THROWS_AS(fit_kittel(same, ws), DataError);
}

TEST_CASE("bare-mode fit excludes locus points near the ISRR", "[fitting]") {
    const KittelParams truth = defaults::kittel();
    BareModeData d;
    d.frequency = linspace(3.2e9, 3.6e9, 401);
    const LorentzianDip dip{3.4e9, 4e6, 0.8, 1.0};
    for (double x : d.frequency) d.magnitude.push_back(dip(x));
    SECTION("enough off-resonance points") {
        for (double h : {0.03, 0.04, 0.06, 0.09, 0.11}) {
            d.locus_field.push_back(h);
            d.locus_frequency.push_back(hertz(kittel_frequency(h, truth)));
        }
        const BareModeFit fit = fit_bare_modes(d);
        REQUIRE(fit.locus_points_used == 4);
        REQUIRE_THAT(hertz(fit.isrr.omega), WithinRel(3.4e9, 1e-7));
        REQUIRE_THAT(fit.kittel.mu0_Ms, WithinRel(truth.mu0_Ms, 1e-9));
    }
    SECTION("the error names the missing field range") {
        for (double h : {0.055, 0.06, 0.065}) {
            d.locus_field.push_back(h);
            d.locus_frequency.push_back(hertz(kittel_frequency(h, truth)));
        }
        REQUIRE_THROWS_WITH(fit_bare_modes(d), ContainsSubstring("add points below"));
    }
}

TEST_CASE("circuit calibration hits its targets", "[fitting]") {
    CircuitDesign design = defaults::circuit_design();
    design.Mc = {0.0093, -0.004};
    design.isrr_frequency = 3.3e9;
    const CircuitParams seed = design.params();
    CalibrationTargets t;
    t.omega_isrr = angular(3.4e9);
    t.kappa = kappa_c;
    t.crossing_field = 0.058;
    const CalibrationResult r = calibrate_circuit(t, seed);
    REQUIRE(r.converged);
    REQUIRE_THAT(r.params.isrr_omega(), WithinRel(t.omega_isrr, 1e-12));
    REQUIRE_THAT(kittel_field(t.omega_isrr, r.params.kittel), WithinRel(0.058, 1e-12));
    REQUIRE_THAT(std::abs(r.params.Mc.imag() / r.params.Mc.real()), WithinRel(0.0088 / 0.0296, 1e-12));
    REQUIRE(r.params.Mc.imag() < 0.0);
    REQUIRE_THAT(circuit_branch_gap(r.params), WithinRel(t.omega_isrr * kappa_c.real(), 1e-9));
}

TEST_CASE("calibration leaves a seed that already meets the targets untouched", "[fitting]") {
    const CircuitParams seed = defaults::circuit();
    CalibrationTargets t;
    t.omega_isrr = seed.isrr_omega();
    t.kappa = kappa_c;
    t.crossing_field = kittel_field(seed.isrr_omega(), seed.kittel);
    // Target the seed's own gap by choosing Re(kappa) to match it.
    t.kappa *= circuit_branch_gap(seed) / (t.omega_isrr * kappa_c.real());
    const CalibrationResult r = calibrate_circuit(t, seed);
    REQUIRE(r.params.L_isrr == seed.L_isrr);
    REQUIRE(r.params.kittel.mu0_Ms == seed.kittel.mu0_Ms);
    REQUIRE(r.params.Mc == seed.Mc);
    REQUIRE(r.params.mc_scale == seed.mc_scale);
}

TEST_CASE("calibration rejects unusable targets", "[fitting]") {
    CalibrationTargets t;
    t.kappa = {-0.01, 0.0};
    REQUIRE_THROWS_AS(calibrate_circuit(t, defaults::circuit()), DataError);
    CircuitParams p = defaults::circuit();
    p.Mc = 0.0;
    REQUIRE_THROWS_AS(calibrate_circuit({}, p), DataError);
}

TEST_CASE("simplex minimizes the Rosenbrock valley", "[fitting]") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    SimplexOptions o;
    o.initial_step = 0.5;
    const SimplexResult r = nelder_mead(rosen, {-1.2, 1.0}, o);
    REQUIRE_THAT(r.x[0], WithinAbs(1.0, 1e-5));
    REQUIRE_THAT(r.x[1], WithinAbs(1.0, 1e-5));
    REQUIRE_THROWS_AS(nelder_mead(rosen, {}), DataError);
}
