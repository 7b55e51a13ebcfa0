// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <pmnri/analysis.hpp>
#include <pmnri/cli.hpp>
#include <pmnri/defaults.hpp>
#include <pmnri/fitting.hpp>
#include <pmnri/grid_csv.hpp>
#include <pmnri/nrw_extraction.hpp>
#include <pmnri/touchstone.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pmnri;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("AC%d %s: %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

const char* dname(Direction d) { return d == Direction::forward ? "forward" : "reverse"; }

void ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> w(1e9, 1e11), g(0.0, 1e9), k(-0.2, 0.2);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const BareMode a{w(rng), g(rng)}, b{w(rng), g(rng)};
        const Coupling c{{k(rng), k(rng)}};
        const HybridPair p = hybrid_eigenvalues(a, b, c);
        const cplx A = a.complex_frequency(), B = b.complex_frequency(), K = a.omega * c.kappa;
        // w^2 - (A + B) w + A B - K^2/4 = 0
        worst = std::max(worst, rel(p.upper + p.lower, A + B));
        worst = std::max(worst, std::abs(p.upper * p.lower - (A * B - K * K / 4.0)) / std::abs(A * B));
    }
    const double secs = seconds_since(t0);
    report(1, worst < 1e-12 && secs < 1.0, fmt("worst relative residual %.2e over 1000 triples, %.3f s", worst, secs));
}

void ac2() {
    double worst = 0.0;
    for (double k : {0.001, 0.0296, 0.1, 0.3}) {
        const BareMode m{angular(3.4e9), 0.0};
        const HybridPair p = hybrid_eigenvalues(m, m, Coupling{k});
        worst = std::max(worst, std::abs((p.upper - p.lower).real() - m.omega * k) / (m.omega * k));
    }
    report(2, worst < 1e-12, fmt("worst relative splitting error %.2e", worst));
}

void ac3() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> f(1e9, 6e9), re(-8.0, 8.0), im(0.0, 2.0), zr(0.05, 5.0), zi(-2.0, 2.0);
    const double ls = 0.005;
    double worst = 0.0;
    int tested = 0;
    while (tested < 10000) {
        const double fr = f(rng), k0 = angular(fr) / constants::c0;
        const cplx n{re(rng), -im(rng)}, z{zr(rng), zi(rng)};
        if (std::abs(k0 * n * ls) >= constants::pi) continue;
        if (std::abs((z - 1.0) / (z + 1.0)) >= 0.999) continue;
        const SParams s = slab_sparams(n, z, k0, ls);
        const MaterialRow r = extract_point(fr, s.s11, s.s21, ls);
        worst = std::max({worst, rel(r.n, n), rel(r.z, z)});
        ++tested;
    }
    const double secs = seconds_since(t0);
    report(3, worst < 1e-9 && secs < 5.0, fmt("worst relative error %.2e over %d points, %.2f s", worst, tested, secs));
}

std::size_t sign_violations(const FieldFrequencyMap& m, std::size_t& checked) {
    const auto& n1 = m.layer(layers::n_prime);
    const auto& n2 = m.layer(layers::n_dprime);
    const auto& c = m.layer(layers::nri_condition);
    std::size_t bad = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (m.mask()[k] || !(n2[k] > 1e-9)) continue;
        ++checked;
        if ((n1[k] < 0.0) != (c[k] < 0.0)) ++bad;
    }
    return bad;
}

void ac4(const std::vector<const FieldFrequencyMap*>& maps) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> re(-10.0, 10.0), loss(0.0, 5.0);
    std::size_t bad = 0, checked = 0;
    for (int t = 0; t < 100000; ++t) {
        const cplx eps{re(rng), -loss(rng)}, mu{re(rng), -loss(rng)};
        cplx n = std::sqrt(eps * mu);
        if (n.imag() > 0.0) n = -n;
        if (!(-n.imag() > 1e-9)) continue;
        ++checked;
        if ((n.real() < 0.0) != (nri_condition(eps, mu).value < 0.0)) ++bad;
    }
    const std::size_t random_checked = checked;
    checked = 0;
    for (const auto* m : maps) bad += sign_violations(*m, checked);
    report(4, bad == 0,
           fmt("%zu violations; %zu random pairs and %zu grid points with n'' > 1e-9 on %zu maps", bad, random_checked,
               checked, maps.size()));
}

}  // namespace

int main() {
    ac1();
    ac2();
    ac3();

    const AnalysisSetup setup = [] {
        AnalysisSetup s;
        s.circuit = defaults::circuit();
        s.model = defaults::hybrid_model();
        return s;
    }();
    const auto axis = setup.damping_axis();
    const FieldFrequencyMap fwd = build_maps(setup.circuit, setup.grid, Direction::forward, setup.map);
    const FieldFrequencyMap rev = build_maps(setup.circuit, setup.grid, Direction::reverse, setup.map);
    CircuitParams herm_p = setup.circuit;
    herm_p.Mc = cplx(0.0093, 0.0);
    const FieldFrequencyMap herm = build_maps(herm_p, setup.grid, Direction::forward, setup.map);

    ac4({&fwd, &rev, &herm});

    {
        double lo = INFINITY;
        for (double v : herm.layer(layers::n_prime))
            if (!std::isnan(v)) lo = std::min(lo, v);
        report(5, lo >= 0.0, fmt("min n' with Mc = 0.0093 + 0i is %.4f", lo));
    }

    // Coupling sweep over 0.1..1.5 in both directions.
    std::vector<double> ratios;
    for (int k = 1; k <= 15; ++k) ratios.push_back(0.1 * k);
    bool ac6 = true, ac7 = true;
    std::string d6, d7;
    for (Direction d : {Direction::forward, Direction::reverse}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = coupling_sweep(ratios, setup, d);
        const double secs = seconds_since(t0);
        std::string present;
        for (const auto& r : res) {
            present += r.nri_present ? '1' : '0';
            const double q = std::round(r.ratio * 10.0) / 10.0;
            if (q <= 0.5 && r.nri_present) ac6 = false;
            if (q >= 0.7 && !r.nri_present) ac6 = false;
            if (q >= 0.7 && !(r.peak_n >= -10.4 * 1.3 && r.peak_n <= -8.7 * 0.7)) {
                ac7 = false;
                d7 += fmt(" %s r=%.1f peak %.2f;", dname(d), r.ratio, r.peak_n);
            }
        }
        if (secs >= 120.0) ac6 = false;
        d6 += fmt("%s presence 0.1..1.5 = %s (%.1f s); ", dname(d), present.c_str(), secs);
        double lo = 0.0, hi = -INFINITY;
        for (const auto& r : res)
            if (r.ratio >= 0.65) {
                lo = std::min(lo, r.peak_n);
                hi = std::max(hi, r.peak_n);
            }
        d7 += fmt(" %s peak n' over 0.7..1.5 in [%.2f, %.2f];", dname(d), lo, hi);
    }
    report(6, ac6, d6);
    report(7, ac7, fmt("band [%.2f, %.2f];", -10.4 * 1.3, -8.7 * 0.7) + d7);

    const HybridModel model = setup.model;
    const auto fwd_regions = detect_nri_regions(fwd, setup.regions);
    const auto rev_regions = detect_nri_regions(rev, setup.regions);
    const NriRegion* fr = dominant_region(fwd_regions);
    const NriRegion* rr = dominant_region(rev_regions);

    if (fr && rr) {
        const auto fb = classify_branch(*fr, fwd, directional_model(model, Direction::forward));
        const auto rb = classify_branch(*rr, rev, directional_model(model, Direction::reverse));
        const double w = hertz(model.isrr.omega);
        const bool flips = (fr->argmin_frequency - w) * (rr->argmin_frequency - w) < 0.0;
        report(8, fb.branch == Branch::upper && rb.branch == Branch::lower && flips,
               fmt("forward %s (upper fraction %.2f, argmin %.3f GHz), reverse %s (upper fraction %.2f, argmin %.3f GHz)",
                   to_string(fb.branch), fb.upper_fraction, fr->argmin_frequency / 1e9, to_string(rb.branch),
                   rb.upper_fraction, rr->argmin_frequency / 1e9));
    } else {
        report(8, false, "no dominant NRI region in one direction");
    }

    {
        const auto fi = antidamping_interval(model, Direction::forward, axis);
        const auto ri = antidamping_interval(model, Direction::reverse, axis);
        const auto fc = correlate_antidamping(fr, fi), rc = correlate_antidamping(rr, ri);
        const bool ok = fc.has_region && fc.has_interval && rc.has_region && rc.has_interval && fc.fraction >= 0.95 &&
                        rc.fraction >= 0.95;
        std::string d;
        if (fr && fi)
            d += fmt("forward region %.1f-%.1f mT in [%.1f, %.1f]: %.3f; ", fr->field_lo * 1e3, fr->field_hi * 1e3,
                     fi->lower * 1e3, fi->upper * 1e3, fc.fraction);
        if (rr && ri)
            d += fmt("reverse region %.1f-%.1f mT in [%.1f, %.1f]: %.3f", rr->field_lo * 1e3, rr->field_hi * 1e3,
                     ri->lower * 1e3, ri->upper * 1e3, rc.fraction);
        report(9, ok, d.empty() ? "missing region or interval" : d);
    }

    {
        const cplx kc{0.0296, 0.0088};
        const HybridModel m = model.with_coupling({kc});
        const auto h = linspace(0.040, 0.080, 16001);
        const BranchData clean = branch_data_from_model(m, h);
        const double noiseless = std::abs(fit_coupling(clean, std::nullopt, model).coupling.kappa - kc);
        int within = 0;
        for (int seed = 1; seed <= 100; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g(0.0, 1.0);
            BranchData d = clean;
            for (auto* br : {&d.upper, &d.lower})
                for (cplx& w : *br) w += 0.01 * std::abs(w) * cplx(g(rng), g(rng)) / std::sqrt(2.0);
            if (rel(fit_coupling(d, std::nullopt, model).coupling.kappa, kc) < 0.05) ++within;
        }
        report(10, noiseless < 1e-6 && within >= 95,
               fmt("noiseless error %.2e; %d/100 noisy fits within 5%%", noiseless, within));
    }

    {
        const cplx mc = setup.circuit.Mc;
        const double target = 0.0088 / 0.0296;
        const double ratio = std::abs(mc.imag() / mc.real());
        report(11, std::abs(ratio / target - 1.0) < 0.01 && mc.imag() < 0.0,
               fmt("Mc = %.6g%+.6gi, |Im/Re| = %.6f vs %.6f", mc.real(), mc.imag(), ratio, target));
    }

    if (fr && rr) {
        auto within = [](double x, double t) { return x >= 0.6 * t && x <= 1.4 * t; };
        const double ff = fr->field_span() * 1e3, fq = fr->freq_span() / 1e6;
        const double rf = rr->field_span() * 1e3, rq = rr->freq_span() / 1e6;
        const bool ok = within(ff, 19.9) && within(fq, 412.0) && within(rf, 22.3) && within(rq, 498.0) && rf > ff &&
                        rq > fq;
        report(12, ok,
               fmt("forward %.1f mT / %.0f MHz (targets 19.9 / 412), reverse %.1f mT / %.0f MHz (targets 22.3 / 498)", ff,
                   fq, rf, rq));
    } else {
        report(12, false, "no dominant NRI region in one direction");
    }

    {
        bool ok = true;
        std::string d;
        std::istringstream ri("# GHz S RI R 50\n3.4 0 0 1 0 1 0 0 0\n");
        const auto a = parse_touchstone(ri).spectrum;
        ok &= a.s11[0] == cplx(0.0, 0.0) && a.s21[0] == cplx(1.0, 0.0);
        std::istringstream db("# GHz S DB R 50\n3.4 -6.0206 0 0 0 0 0 -6.0206 0\n");
        ok &= std::abs(parse_touchstone(db).spectrum.s11[0] - 0.5) < 1e-5;
        std::istringstream ma("# GHz S MA R 50\n3.4 1 90 0 0 0 0 1 0\n");
        ok &= std::abs(parse_touchstone(ma).spectrum.s11[0] - I) < 1e-15;
        d += ok ? "Touchstone goldens ok; " : "Touchstone goldens FAILED; ";

        GridSpec g;
        g.field_points = 11;
        g.freq_points = 21;
        const auto m = build_maps(setup.circuit, g, Direction::forward);
        std::ostringstream o1, o2;
        write_grid_csv(o1, m);
        std::istringstream in(o1.str());
        write_grid_csv(o2, read_grid_csv(in));
        const bool grid_ok = o1.str() == o2.str();
        ok &= grid_ok;
        d += grid_ok ? "grid CSV round trip exact; " : "grid CSV round trip differs; ";

        bool same = true;
        for (const std::vector<std::string>& args :
             {std::vector<std::string>{"synth", "-s", "grid.field_points=9", "grid.freq_points=9"},
              std::vector<std::string>{"synth", "--field-mt", "58", "-s", "grid.freq_points=51"},
              std::vector<std::string>{"eigen"},
              std::vector<std::string>{"report", "-s", "grid.field_points=41", "grid.freq_points=71"}}) {
            std::ostringstream a1, a2, e1, e2;
            const int c1 = run_cli(args, a1, e1), c2 = run_cli(args, a2, e2);
            same &= c1 == 0 && c2 == 0 && a1.str() == a2.str() && !a1.str().empty();
        }
        ok &= same;
        d += same ? "CLI outputs byte-identical" : "CLI outputs differ";
        report(13, ok, d);
    }

    std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
