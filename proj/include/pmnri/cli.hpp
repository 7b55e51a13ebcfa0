#pragma once

// Command-line front end. Every subcommand writes deterministic text to the
// output stream; errors go to the error stream as
//   pmnri: error[<usage|data|singular>]: <message>
// and map to exit codes 1, 2 and 3.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "fitting.hpp"
#include "grid_csv.hpp"
#include "nrw_extraction.hpp"
#include "touchstone.hpp"

namespace pmnri {

/// "start:step:stop" (inclusive) or a comma-separated list.
inline std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> out;
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw UsageError("bad number '" + s + "' in list '" + text + "'");
        }
        if (used != s.size()) throw UsageError("bad number '" + s + "' in list '" + text + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::istringstream is(text);
        std::string p;
        while (std::getline(is, p, ':')) parts.push_back(p);
        if (parts.size() != 3) throw UsageError("range must be start:step:stop, got '" + text + "'");
        const double a = num(parts[0]), step = num(parts[1]), b = num(parts[2]);
        if (!(step > 0.0) || b < a) throw UsageError("range needs a positive step and stop >= start: '" + text + "'");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            // Snap to 1e-12 so 0.1 steps land on 0.3, not 0.30000000000000004.
            out.push_back(std::round((a + step * double(i)) * 1e12) / 1e12);
        }
        return out;
    }
    std::istringstream is(text);
    std::string p;
    while (std::getline(is, p, ',')) out.push_back(num(detail::trim(p)));
    if (out.empty()) throw UsageError("empty value list");
    return out;
}

inline Direction parse_direction(const std::string& s) {
    if (s == "forward" || s == "s21") return Direction::forward;
    if (s == "reverse" || s == "s12") return Direction::reverse;
    throw UsageError("direction must be forward or reverse, got '" + s + "'");
}

namespace cli_detail {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
};

inline RunConfig load(const Common& c) {
    RunConfig cfg;
    if (!c.config.empty()) load_config_file(cfg, c.config);
    for (const auto& o : c.overrides) apply_override(cfg, o);
    return cfg;
}

/// Writes through a file when a path is given, else to the fallback stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw DataError("cannot write " + path);
            out_ = file_.get();
        }
    }
    std::ostream& operator*() { return *out_; }
    void finish() {
        out_->flush();
        if (!*out_) throw DataError("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

inline void kv(std::ostream& o, const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; }
inline void kv(std::ostream& o, const std::string& k, double v) { kv(o, k, csv::number(v)); }

inline TwoPortSpectrum two_port_at_field(const CircuitParams& p, std::span<const double> freq, double h,
                                         BranchPolicy policy, bool line_only) {
    CircuitParams q = p;
    if (line_only) {
        q.M0 = 0.0;
        q.Mc = 0.0;
    }
    TwoPortSpectrum out;
    if (line_only) {
        // The bare line: no ISRR and no YIG.
        for (double f : freq) {
            const double w = angular(f);
            const cplx z = I * w * q.L0, y = I * w * q.C0;
            const MaterialPoint m = material_from_immittance(w, z, y, bloch_phase(z, y), q);
            out.push_back(f, slab_sparams(m.n, m.z, w / constants::c0, q.ls));
        }
        return out;
    }
    const auto fwd = material_sweep(freq, h, q, Direction::forward, policy);
    const auto rev = material_sweep(freq, h, q, Direction::reverse, policy);
    for (std::size_t i = 0; i < freq.size(); ++i) {
        const double k0 = angular(freq[i]) / constants::c0;
        const SParams a = slab_sparams(fwd[i].n, fwd[i].z, k0, q.ls);
        const SParams b = slab_sparams(rev[i].n, rev[i].z, k0, q.ls);
        out.push_back(freq[i], {a.s11, a.s21, b.s21, b.s11});
    }
    return out;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"Photon-magnon NRI toolkit: circuit synthesis, NRW extraction, two-mode analysis"};
    app.name("pmnri");
    app.require_subcommand(1);
    // Global options may follow the subcommand.
    app.fallthrough();
    Common common;
    app.add_option("-c,--config", common.config, "Configuration file");
    app.add_option("-s,--set", common.overrides, "Override a config key, section.key=value")->take_all();
    app.add_option("-o,--output", common.output, "Output file (default standard output)");

    std::string direction = "forward";
    std::string layers_text;
    double field_mt = -1.0;
    bool line_only = false;
    auto* synth = app.add_subcommand("synth", "Synthesize field-frequency maps (or a two-port at one field)");
    synth->add_option("-d,--direction", direction, "forward or reverse");
    synth->add_option("-l,--layers", layers_text, "Comma-separated layers (default all)");
    synth->add_option("--field-mt", field_mt, "Emit a Touchstone two-port at this field instead of a map");
    synth->add_flag("--line-only", line_only, "With --field-mt: the bare line without ISRR and YIG");

    std::string input, background, deembed = "subtract";
    auto* extract_cmd = app.add_subcommand("extract", "Retrieve n, z, eps, mu from a Touchstone file");
    extract_cmd->add_option("-i,--input", input, "Touchstone v1 two-port file")->required();
    extract_cmd->add_option("-b,--background", background, "Empty-fixture file to de-embed");
    extract_cmd->add_option("--deembed", deembed, "subtract or ratio");
    extract_cmd->add_option("-d,--direction", direction, "forward (S11,S21) or reverse (S22,S12)");

    std::string kappa_text, curves_path;
    std::size_t points = 4001;
    auto* eigen = app.add_subcommand("eigen", "Hybrid branches and zero-damping fields of the two-mode model");
    eigen->add_option("-k,--kappa", kappa_text, "Coupling, e.g. 0.0296+0.0088i");
    eigen->add_option("-d,--direction", direction, "forward (kappa) or reverse (conj kappa)");
    eigen->add_option("--points", points, "Field samples across the grid field range");
    eigen->add_option("--curves", curves_path, "Also write the branch curves to this CSV file");

    std::string ratios_text = "0:0.1:1.5";
    auto* sweep = app.add_subcommand("sweep", "NRI presence and peak n' against coupling ratio");
    sweep->add_option("-r,--ratios", ratios_text, "start:step:stop or a comma list");
    sweep->add_option("-d,--direction", direction, "forward or reverse");

    std::string im_text = "-0.0028,-0.0024,-0.002,0";
    std::optional<double> re_mc;
    auto* ablate = app.add_subcommand("ablate", "NRI area against Im(Mc) at fixed Re(Mc)");
    ablate->add_option("--im", im_text, "Im(Mc) values");
    ablate->add_option("--re", re_mc, "Re(Mc) (default from the configuration)");

    std::string init_text;
    bool unlabeled = false;
    auto* fit = app.add_subcommand("fit", "Fit the complex coupling to branch data");
    fit->add_option("-i,--input", input, "Branch CSV (field_mT, upper_GHz, upper_linewidth_MHz, ...)")->required();
    fit->add_option("--init", init_text, "Starting coupling (default closed-form seed)");
    fit->add_flag("--unlabeled", unlabeled, "Direction unknown: fit kappa and conj(kappa)");

    auto* report = app.add_subcommand("report", "NRI regions, branch association and anti-damping containment");

    if (args.empty()) {
        out << app.help();
        return static_cast<int>(ErrorKind::usage);
    }
    try {
        try {
            std::reverse(args.begin(), args.end());
            app.parse(std::move(args));
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            throw UsageError(e.what());
        }
        const RunConfig cfg = load(common);
        Sink sink(common.output, out);
        std::ostream& o = *sink;

        if (synth->parsed()) {
            const CircuitParams p = cfg.circuit_params();
            if (field_mt >= 0.0) {
                const auto freq = cfg.grid.frequencies();
                write_touchstone(o, two_port_at_field(p, freq, field_mt * 1e-3, cfg.map.branch, line_only));
            } else {
                std::vector<std::string> names;
                if (synth->count("--layers")) {
                    std::istringstream is(layers_text);
                    std::string n;
                    while (std::getline(is, n, ','))
                        if (!detail::trim(n).empty()) names.push_back(detail::trim(n));
                    if (names.empty()) throw UsageError("synth: zero layers requested");
                    for (const auto& n2 : names) {
                        const auto& all = layers::all();
                        if (std::find(all.begin(), all.end(), n2) == all.end()) throw UsageError("unknown layer '" + n2 + "'");
                    }
                }
                const auto m = build_maps(p, cfg.grid, parse_direction(direction), cfg.map);
                write_grid_csv(o, m, names);
            }
        } else if (extract_cmd->parsed()) {
            TwoPortSpectrum s = read_touchstone(input).spectrum;
            if (!background.empty()) {
                if (deembed != "subtract" && deembed != "ratio") throw UsageError("--deembed must be subtract or ratio");
                s = de_embed(s, read_touchstone(background).spectrum,
                             deembed == "ratio" ? DeembedMode::ratio : DeembedMode::subtract);
            }
            const auto ms = extract(s, cfg.extraction, parse_direction(direction));
            csv::write_row(o, {"freq_GHz", "n_re", "n_im", "z_re", "z_im", "eps_re", "eps_im", "mu_re", "mu_im",
                               "nri_condition", "nri", "branch", "valid"});
            for (const auto& r : ms.rows) {
                csv::write_row(o, {csv::number(r.frequency / 1e9), csv::number(r.n.real()), csv::number(r.n.imag()),
                                   csv::number(r.z.real()), csv::number(r.z.imag()), csv::number(r.eps.real()),
                                   csv::number(r.eps.imag()), csv::number(r.mu.real()), csv::number(r.mu.imag()),
                                   csv::number(r.nri_value), r.valid && r.nri_value < 0.0 ? "1" : "0",
                                   std::to_string(r.branch), r.valid ? "1" : "0"});
            }
            for (std::size_t i : ms.jumps)
                err << "pmnri: warning: n jumps by more than " << csv::number(cfg.extraction.jump_threshold) << " at "
                    << csv::number(ms.rows[i].frequency / 1e9) << " GHz\n";
        } else if (eigen->parsed()) {
            HybridModel m = cfg.model;
            if (!kappa_text.empty()) m.coupling.kappa = parse_complex(kappa_text);
            const Direction d = parse_direction(direction);
            m = directional_model(m, d);
            if (points < 2) throw UsageError("--points must be at least 2");
            const auto axis = linspace(cfg.grid.field_min, cfg.grid.field_max, points);
            csv::write_row(o, {"branch", "h_minus_mT", "h_plus_mT", "width_mT"});
            for (Branch b : {Branch::upper, Branch::lower}) {
                const auto iv = m.anti_damping_interval(axis, b);
                const double nan = std::nan("");
                csv::write_row(o, {to_string(b), csv::number(iv ? iv->lower * 1e3 : nan),
                                   csv::number(iv ? iv->upper * 1e3 : nan), csv::number(iv ? iv->width() * 1e3 : 0.0)});
            }
            if (!curves_path.empty()) {
                std::ofstream cf(curves_path, std::ios::binary);
                if (!cf) throw DataError("cannot write " + curves_path);
                const auto curves = m.sweep(axis);
                csv::write_row(cf, {"field_mT", "upper_GHz", "upper_linewidth_MHz", "lower_GHz", "lower_linewidth_MHz"});
                for (std::size_t i = 0; i < axis.size(); ++i) {
                    csv::write_row(cf, {csv::number(axis[i] * 1e3), csv::number(hertz(curves.upper[i].real()) / 1e9),
                                        csv::number(hertz(-curves.upper[i].imag()) / 1e6),
                                        csv::number(hertz(curves.lower[i].real()) / 1e9),
                                        csv::number(hertz(-curves.lower[i].imag()) / 1e6)});
                }
                if (!cf) throw DataError("write failed: " + curves_path);
            }
        } else if (sweep->parsed()) {
            const auto ratios = parse_value_list(ratios_text);
            const auto res = coupling_sweep(ratios, cfg.setup(), parse_direction(direction));
            csv::write_row(o, {"ratio", "nri_present", "peak_n", "delta_h_nd_mT", "nri_pixels"});
            for (const auto& r : res)
                csv::write_row(o, {csv::number(r.ratio), r.nri_present ? "true" : "false", csv::number(r.peak_n),
                                   csv::number(r.delta_h_nd * 1e3), std::to_string(r.nri_pixels)});
        } else if (ablate->parsed()) {
            const auto ims = parse_value_list(im_text);
            const auto res = im_coupling_ablation(ims, cfg.setup(), re_mc);
            csv::write_row(o, {"im_mc", "nri_pixels", "area_mT_MHz", "peak_n", "branch"});
            for (const auto& a : res)
                csv::write_row(o, {csv::number(a.im_mc), std::to_string(a.pixels), csv::number(a.area * 1e3 / 1e6),
                                   csv::number(a.peak_n), a.branch ? to_string(*a.branch) : "none"});
        } else if (fit->parsed()) {
            std::ifstream in(input);
            if (!in) throw DataError("cannot open " + input);
            csv::Table t;
            try {
                t = csv::read_table(in);
            } catch (const ParseError& e) {
                throw ParseError(e.line(), e.detail(), input);
            }
            BranchData d;
            const std::size_t cf = t.column("field_mT");
            const bool has_up = t.has_column("upper_GHz"), has_lo = t.has_column("lower_GHz");
            for (const auto& r : t.rows) {
                d.field.push_back(r[cf] * 1e-3);
                auto branch = [&](const std::string& name, std::vector<cplx>& dst) {
                    const double f = r[t.column(name + "_GHz")];
                    const double lw = t.has_column(name + "_linewidth_MHz") ? r[t.column(name + "_linewidth_MHz")] : 0.0;
                    dst.emplace_back(angular(f * 1e9), -angular(lw * 1e6));
                };
                if (has_up) branch("upper", d.upper);
                if (has_lo) branch("lower", d.lower);
                if (t.has_column("weight")) d.weights.push_back(r[t.column("weight")]);
            }
            const HybridModel& bare = cfg.model;
            std::optional<Coupling> init;
            if (!init_text.empty()) init = Coupling{parse_complex(init_text)};
            auto print = [&](const std::string& prefix, const FitResult& r) {
                kv(o, prefix + "kappa_re", r.coupling.kappa.real());
                kv(o, prefix + "kappa_im", r.coupling.kappa.imag());
                kv(o, prefix + "residual_norm_MHz", hertz(r.residual_norm) / 1e6);
                kv(o, prefix + "iterations", std::to_string(r.iterations));
                kv(o, prefix + "converged", r.converged ? "true" : "false");
            };
            if (unlabeled) {
                const Coupling start = init.value_or(kappa_seed(d, bare));
                const auto u = fit_coupling_unlabeled(d, start, bare);
                print("kappa.", u.kappa);
                print("conjugate.", u.conjugate);
                kv(o, "best", &u.best() == &u.kappa ? "kappa" : "conjugate");
            } else {
                print("", fit_coupling(d, init, bare));
            }
        } else if (report->parsed()) {
            const AnalysisSetup s = cfg.setup();
            const auto axis = s.damping_axis();
            kv(o, "grid", std::to_string(s.grid.field_points) + " x " + std::to_string(s.grid.freq_points));
            {
                CircuitParams h = s.circuit;
                h.Mc = cplx(h.Mc.real(), 0.0);
                const auto mh = build_maps(h, s.grid, Direction::forward, s.map);
                double lo = INFINITY;
                for (double v : mh.layer(layers::n_prime))
                    if (!std::isnan(v)) lo = std::min(lo, v);
                kv(o, "hermitian.min_n", lo);
            }
            for (Direction d : {Direction::forward, Direction::reverse}) {
                const std::string p = std::string(to_string(d)) + ".";
                const auto m = build_maps(s.circuit, s.grid, d, s.map);
                const auto regions = detect_nri_regions(m, s.regions);
                const auto iv = antidamping_interval(s.model, d, axis);
                kv(o, p + "baseline_n", baseline_index(m));
                kv(o, p + "regions", std::to_string(regions.size()));
                kv(o, p + "antidamping_branch", to_string(antidamped_branch(d)));
                kv(o, p + "h_minus_mT", iv ? iv->lower * 1e3 : std::nan(""));
                kv(o, p + "h_plus_mT", iv ? iv->upper * 1e3 : std::nan(""));
                const NriRegion* r = dominant_region(regions);
                if (!r) {
                    kv(o, p + "nri", "absent");
                    continue;
                }
                const auto assoc = classify_branch(*r, m, directional_model(s.model, d));
                const auto c = correlate_antidamping(r, iv);
                kv(o, p + "nri", "present");
                kv(o, p + "pixels", std::to_string(r->pixels()));
                kv(o, p + "min_n", r->min_n);
                kv(o, p + "argmin_field_mT", r->argmin_field * 1e3);
                kv(o, p + "argmin_freq_GHz", r->argmin_frequency / 1e9);
                kv(o, p + "field_lo_mT", r->field_lo * 1e3);
                kv(o, p + "field_hi_mT", r->field_hi * 1e3);
                kv(o, p + "field_span_mT", r->field_span() * 1e3);
                kv(o, p + "freq_lo_GHz", r->freq_lo / 1e9);
                kv(o, p + "freq_hi_GHz", r->freq_hi / 1e9);
                kv(o, p + "freq_span_MHz", r->freq_span() / 1e6);
                kv(o, p + "branch", to_string(assoc.branch));
                kv(o, p + "upper_fraction", assoc.upper_fraction);
                kv(o, p + "containment", c.has_interval ? csv::number(c.fraction) : std::string("no interval"));
            }
        }
        sink.finish();
        return 0;
    } catch (const Error& e) {
        err << "pmnri: error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "pmnri: error[data]: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args), out, err);
}

}  // namespace pmnri
