#pragma once

// Command-line front end. `run_cli` is kept separate from main() so the test
// suite can drive it in-process.

#include "qgraph/compare.hpp"
#include "qgraph/io.hpp"
#include "qgraph/oracles.hpp"
#include "qgraph/paths.hpp"
#include "qgraph/resonance.hpp"
#include "qgraph/scattering.hpp"
#include "qgraph/spectral_stats.hpp"
#include "qgraph/time_domain.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qgraph::cli {

inline constexpr std::uint64_t default_seed = 20240601;

enum ExitCode : int { ok = 0, defect = 1, usage = 2 };

/// Bad input from the user: unreadable files, invalid documents, bad values.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lengths are plain meters or a multiple of the reference length, e.g. "7l".
inline double parse_length(const std::string& text, double l) {
    if (text.empty()) throw UsageError("empty length");
    try {
        if (text.back() == 'l' || text.back() == 'L') {
            const auto head = text.substr(0, text.size() - 1);
            return (head.empty() ? 1.0 : io::parse_double(head)) * l;
        }
        return io::parse_double(text);
    } catch (const io::ParseError&) {
        throw UsageError("cannot parse length '" + text + "'");
    }
}

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("QGRAPH_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("QGRAPH_SEED is not an unsigned integer: '") + env + "'");
        }
    }
    return default_seed;
}

inline MetricGraph load_graph(const std::string& path) {
    try {
        return io::parse_graph_file(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

inline double reference_length(const MetricGraph& g, double flag) { return flag > 0.0 ? flag : g.min_edge_length(); }

struct Common {
    std::string graph;
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    double l = 0.0;
};

inline void emit(const Common& c, const std::string& content, std::ostream& out) {
    if (c.out.empty()) {
        out << content;
    } else {
        io::atomic_write(c.out, content);
    }
}

inline UnfoldedSpectrum closed_levels(const MetricGraph& g, std::size_t levels, std::size_t& unresolved) {
    ClosedSpectrumOptions opt;
    opt.target_count = levels;
    auto ev = closed_eigenvalues(g, opt);
    unresolved = ev.unresolved.size();
    if (ev.k.size() < levels) throw std::runtime_error("eigenvalue search returned too few levels");
    return unfold_wavenumbers(ev.k, total_length(without_leads(g)), "closed graph");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wave transport on open metric graphs", "qgraph"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    Common c;
    auto common = [&](CLI::App* sub, bool needs_graph) {
        auto* g = sub->add_option("--graph", c.graph, "Graph description (JSON)");
        if (needs_graph) g->required();
        sub->add_option("--out", c.out, "Output file (default: stdout)");
        sub->add_option("--format", c.format, "Export format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--l", c.l, "Reference length in meters (default: shortest edge)")->check(CLI::PositiveNumber);
    };

    // spectrum
    double kl_min = 0.01, kl_max = 2 * std::numbers::pi, beta = 0.0;
    std::optional<double> k_min, k_max;
    std::size_t points = 2000;
    std::string plot;
    auto* spectrum = app.add_subcommand("spectrum", "Transmission spectrum |S12| over a k grid");
    common(spectrum, true);
    spectrum->add_option("--kl-min", kl_min, "Lower end of the scan in kl");
    spectrum->add_option("--kl-max", kl_max, "Upper end of the scan in kl");
    spectrum->add_option("--k-min", k_min, "Lower end in rad/m (overrides --kl-min)");
    spectrum->add_option("--k-max", k_max, "Upper end in rad/m (overrides --kl-max)");
    spectrum->add_option("--points", points, "Grid points")->check(CLI::Range(2, 100000000));
    spectrum->add_option("--beta", beta, "Absorption coefficient, m^-1/2")->check(CLI::NonNegativeNumber);
    spectrum->add_option("--plot", plot, "SVG plot file");

    // eigs
    std::size_t levels = 0;
    double eig_kmax = 0.0;
    auto* eigs = app.add_subcommand("eigs", "Closed-graph eigenvalues (leads removed)");
    common(eigs, true);
    eigs->add_option("--levels", levels, "Number of levels");
    eigs->add_option("--k-max", eig_kmax, "Upper wave number in rad/m");

    // stats
    std::size_t stat_levels = 1811, bootstrap = 1000;
    auto* stats = app.add_subcommand("stats", "Spacing statistics and Berry-Robnik fit");
    common(stats, true);
    stats->add_option("--levels", stat_levels, "Number of levels")->check(CLI::Range(101, 100000000));
    stats->add_option("--bootstrap", bootstrap, "Bootstrap resamples");
    stats->add_option("--seed", c.seed, "Random seed (default: $QGRAPH_SEED)");

    // delta3
    std::size_t d3_levels = 1811;
    double lmin = 1.0, lmax = 20.0, lstep = 1.0;
    std::optional<double> rho1_flag;
    auto* delta3 = app.add_subcommand("delta3", "Spectral rigidity against Poisson, GOE and Berry-Robnik");
    common(delta3, true);
    delta3->add_option("--levels", d3_levels, "Number of levels")->check(CLI::Range(101, 100000000));
    delta3->add_option("--L-min", lmin, "Smallest window")->check(CLI::PositiveNumber);
    delta3->add_option("--L-max", lmax, "Largest window")->check(CLI::PositiveNumber);
    delta3->add_option("--L-step", lstep, "Window increment")->check(CLI::PositiveNumber);
    delta3->add_option("--rho1", rho1_flag, "Berry-Robnik parameter (default: fitted)")->check(CLI::Range(0.0, 1.0));
    delta3->add_option("--seed", c.seed, "Random seed (default: $QGRAPH_SEED)");

    // pulse
    PulseSpec pulse;
    pulse.t0 = 1e-9;
    double dt = 0.0, duration = 40e-9;
    auto* pulse_cmd = app.add_subcommand("pulse", "Gaussian pulse transmitted through the graph");
    common(pulse_cmd, true);
    pulse_cmd->add_option("--fwhm", pulse.fwhm, "Pulse FWHM in seconds")->check(CLI::PositiveNumber);
    pulse_cmd->add_option("--amplitude", pulse.amplitude, "Pulse amplitude in volts");
    pulse_cmd->add_option("--t0", pulse.t0, "Pulse centre in seconds");
    pulse_cmd->add_option("--dt", dt, "Time step in seconds (default: FWHM/25)")->check(CLI::PositiveNumber);
    pulse_cmd->add_option("--duration", duration, "Initial record length in seconds")->check(CLI::PositiveNumber);
    pulse_cmd->add_option("--beta", beta, "Absorption coefficient, m^-1/2")->check(CLI::NonNegativeNumber);
    pulse_cmd->add_option("--plot", plot, "SVG plot file");

    // paths
    std::string max_length = "7l";
    auto* paths = app.add_subcommand("paths", "Lead-to-lead path enumeration");
    common(paths, true);
    paths->add_option("--max-length", max_length, "Length bound: meters or a multiple of l, e.g. 7l");
    PathOptions path_opt;
    paths->add_option("--node-budget", path_opt.node_budget, "Abort the search after this many steps");

    // compare
    std::string measured;
    double prominence = 0.1;
    auto* cmp = app.add_subcommand("compare", "Compare a Touchstone measurement with the simulation");
    common(cmp, true);
    cmp->add_option("--measured", measured, "Touchstone v1 .s2p file")->required();
    cmp->add_option("--beta", beta, "Absorption coefficient, m^-1/2")->check(CLI::NonNegativeNumber);
    cmp->add_option("--prominence", prominence, "Peak prominence threshold");

    // oracle
    std::string kind = "c3";
    std::size_t oracle_points = 10000;
    auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check the solver against independent references");
    common(oracle_cmd, false);
    oracle_cmd->add_option("--kind", kind, "c3, c4 or dual")->check(CLI::IsMember({"c3", "c4", "dual"}));
    oracle_cmd->add_option("--points", oracle_points, "Sample count")->check(CLI::Range(1, 100000000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage;
    }

    try {
        if (*spectrum) {
            const auto g = load_graph(c.graph);
            const double l = reference_length(g, c.l);
            const double lo = k_min ? *k_min : kl_min / l;
            const double hi = k_max ? *k_max : kl_max / l;
            if (!(lo > 0.0) || !(hi > lo)) throw UsageError("scan range must satisfy 0 < min < max");
            const auto scan = transmission_scan(g, lo, hi, points, beta);
            emit(c, c.format == "json" ? io::spectrum_json(scan, l).dump(2) + "\n" : io::spectrum_csv(scan, l), out);
            if (!plot.empty()) {
                io::Series s{"T", {}, scan.transmission()};
                for (double k : scan.k) s.x.push_back(k * l / std::numbers::pi);
                io::atomic_write(plot, io::svg_line_chart({s}, "Transmission", "kl / pi", "|S12|"));
            }
            for (const auto& d : scan.defects) err << "defect at k = " << io::fmt(d.k) << ": " << d.message << "\n";
            return scan.defects.empty() ? ok : defect;
        }
        if (*eigs) {
            if (levels == 0 && !(eig_kmax > 0.0)) throw UsageError("eigs needs --levels or --k-max");
            const auto g = load_graph(c.graph);
            ClosedSpectrumOptions opt;
            opt.target_count = levels;
            opt.k_max = eig_kmax;
            const auto ev = closed_eigenvalues(g, opt);
            const auto u = unfold_wavenumbers(ev.k, total_length(without_leads(g)));
            std::vector<char> flag(ev.k.size(), 0);
            for (auto i : ev.unresolved) flag[i] = 1;
            if (c.format == "json") {
                io::json j;
                j["k_rad_per_m"] = ev.k;
                j["epsilon"] = u.levels;
                j["unresolved"] = ev.unresolved;
                j["k_max_scanned"] = ev.k_max_scanned;
                emit(c, j.dump(2) + "\n", out);
            } else {
                std::string s = "index,k_rad_per_m,nu_hz,epsilon,unresolved\n";
                for (std::size_t i = 0; i < ev.k.size(); ++i)
                    s += std::to_string(i + 1) + ',' + io::fmt(ev.k[i]) + ',' +
                         io::fmt(frequency_from_wavenumber(ev.k[i])) + ',' + io::fmt(u.levels[i]) + ',' +
                         (flag[i] ? "1" : "0") + '\n';
                emit(c, s, out);
            }
            if (!ev.unresolved.empty()) err << ev.unresolved.size() << " level(s) flagged as unresolved degeneracies\n";
            return ok;
        }
        if (*stats) {
            const auto g = load_graph(c.graph);
            std::size_t unresolved = 0;
            const auto u = closed_levels(g, stat_levels, unresolved);
            const auto sp = spacings(u);
            FitOptions fo;
            fo.bootstrap = bootstrap;
            fo.seed = resolve_seed(c.seed);
            const auto fit = fit_rho1(sp, fo);
            const auto hist = spacing_histogram(sp);
            const double weyl = u.levels.back();
            io::json j;
            j["levels"] = u.size();
            j["total_length_m"] = u.total_length;
            j["k_last_rad_per_m"] = u.levels.back() * std::numbers::pi / u.total_length;
            j["mean_spacing"] = sp.mean();
            j["weyl_deviation"] = static_cast<double>(u.size()) - weyl;
            j["unresolved"] = unresolved;
            j["rho1"] = fit.rho1;
            j["rho2"] = fit.rho2();
            j["rho1_standard_error"] = fit.standard_error;
            j["log_likelihood"] = fit.log_likelihood;
            j["bootstrap"] = fit.bootstrap_samples;
            j["seed"] = fo.seed;
            j["histogram"] = {{"bin_width", hist.bin_width}, {"centers", hist.centers}, {"density", hist.density}};
            if (c.format == "json") {
                emit(c, j.dump(2) + "\n", out);
            } else {
                std::string s = "quantity,value\n";
                for (const char* key : {"levels", "total_length_m", "k_last_rad_per_m", "mean_spacing",
                                        "weyl_deviation", "unresolved", "rho1", "rho2", "rho1_standard_error",
                                        "log_likelihood", "bootstrap", "seed"})
                    s += std::string(key) + ',' + j[key].dump() + '\n';
                emit(c, s, out);
            }
            return ok;
        }
        if (*delta3) {
            if (lmax < lmin) throw UsageError("--L-max must be >= --L-min");
            const auto g = load_graph(c.graph);
            std::size_t unresolved = 0;
            const auto u = closed_levels(g, d3_levels, unresolved);
            double rho1 = 0.0;
            if (rho1_flag) {
                rho1 = *rho1_flag;
            } else {
                FitOptions fo;
                fo.bootstrap = 0;
                fo.seed = resolve_seed(c.seed);
                rho1 = fit_rho1(spacings(u), fo).rho1;
            }
            io::json rows = io::json::array();
            std::string s = "L,delta3,uncertainty,poisson,goe,berry_robnik\n";
            for (double L = lmin; L <= lmax + 1e-9; L += lstep) {
                const auto p = delta3_empirical(u, L);
                const double vp = delta3_poisson(L), vg = delta3_goe(L), vb = delta3_br(L, rho1);
                rows.push_back({{"L", L}, {"delta3", p.value}, {"uncertainty", p.uncertainty}, {"poisson", vp},
                                {"goe", vg}, {"berry_robnik", vb}});
                s += io::fmt(L) + ',' + io::fmt(p.value) + ',' + io::fmt(p.uncertainty) + ',' + io::fmt(vp) + ',' +
                     io::fmt(vg) + ',' + io::fmt(vb) + '\n';
            }
            if (c.format == "json") {
                emit(c, io::json{{"rho1", rho1}, {"levels", u.size()}, {"rows", rows}}.dump(2) + "\n", out);
            } else {
                emit(c, s, out);
            }
            return ok;
        }
        if (*pulse_cmd) {
            const auto g = load_graph(c.graph);
            if (dt <= 0.0) dt = pulse.fwhm / 25.0;
            pulse.validate();
            const auto res = synthesize_output_auto(g, pulse, beta, dt, duration);
            if (c.format == "json") {
                auto j = io::trace_json(res.output);
                j["input_amplitude"] = pulse.amplitude;
                j["fwhm_seconds"] = pulse.fwhm;
                j["pulse_center_seconds"] = pulse.t0;
                j["peaks"] = io::json::array();
                for (const auto& p : trace_peaks(res.output, 1e-3 * std::abs(pulse.amplitude)))
                    j["peaks"].push_back({{"t_seconds", p.time}, {"volts", p.volts}});
                emit(c, j.dump() + "\n", out);
            } else {
                emit(c, io::trace_csv(res.output), out);
            }
            if (!plot.empty()) {
                io::Series in{"input", {}, res.input.volts, "#999999"};
                io::Series o{"output", {}, res.output.volts, "#d62728"};
                const double horizon = first_arrival(g, pulse) + 40.0 * reference_length(g, c.l) / speed_of_light;
                for (std::size_t i = 0; i < res.output.size(); ++i) {
                    in.x.push_back(res.output.time(i) * 1e9);
                    o.x.push_back(res.output.time(i) * 1e9);
                }
                std::size_t keep = 0;
                while (keep < o.x.size() && res.output.time(keep) <= horizon) ++keep;
                for (auto* s : {&in, &o}) {
                    s->x.resize(keep);
                    s->y.resize(keep);
                }
                io::atomic_write(plot, io::svg_line_chart({in, o}, "Pulse response", "t (ns)", "U (V)"));
            }
            return ok;
        }
        if (*paths) {
            const auto g = load_graph(c.graph);
            const double l = reference_length(g, c.l);
            const double bound = parse_length(max_length, l);
            const auto en = enumerate_paths(g, bound, path_opt);
            const auto groups = group_paths(en.paths);
            if (c.format == "json") {
                io::json j;
                j["reference_length_m"] = l;
                j["partial"] = en.partial;
                j["paths"] = io::json::array();
                for (const auto& p : en.paths)
                    j["paths"].push_back({{"path", p.label(g)}, {"length_m", p.length}, {"amplitude", p.amplitude}});
                j["groups"] = io::json::array();
                for (const auto& gr : groups)
                    j["groups"].push_back({{"length_m", gr.length},
                                           {"length_over_l", gr.length / l},
                                           {"paths", gr.members.size()},
                                           {"amplitude", gr.amplitude}});
                emit(c, j.dump(2) + "\n", out);
            } else {
                std::string s = "length_m,length_over_l,amplitude,path\n";
                for (const auto& p : en.paths)
                    s += io::fmt(p.length) + ',' + io::fmt(p.length / l) + ',' + io::fmt(p.amplitude) + ',' +
                         p.label(g) + '\n';
                emit(c, s, out);
            }
            if (en.partial) {
                err << "node budget exhausted; the path list is incomplete\n";
                return defect;
            }
            return ok;
        }
        if (*cmp) {
            const auto g = load_graph(c.graph);
            io::MeasuredTwoPort m;
            try {
                m = io::read_touchstone(io::read_file(measured));
            } catch (const std::exception& e) {
                throw UsageError(measured + ": " + e.what());
            }
            CompareOptions co;
            co.prominence = prominence;
            const auto r = compare(m, g, beta, co);
            if (c.format == "json") {
                io::json j;
                j["rms"] = r.rms;
                j["max_abs"] = r.max_abs;
                j["points"] = r.residual.size();
                j["peaks"] = io::json::array();
                for (const auto& p : r.peaks)
                    j["peaks"].push_back(
                        {{"measured_hz", p.measured_hz}, {"simulated_hz", p.simulated_hz}, {"offset_hz", p.offset_hz}});
                j["nu_hz"] = r.frequency_hz;
                j["residual"] = r.residual;
                emit(c, j.dump(2) + "\n", out);
            } else {
                std::string s = "nu_hz,measured_T,simulated_T,residual\n";
                for (std::size_t i = 0; i < r.residual.size(); ++i)
                    s += io::fmt(r.frequency_hz[i]) + ',' + io::fmt(r.measured_t[i]) + ',' +
                         io::fmt(r.simulated_t[i]) + ',' + io::fmt(r.residual[i]) + '\n';
                emit(c, s, out);
            }
            err << "rms residual " << io::fmt(r.rms) << " over " << r.residual.size() << " points, " << r.peaks.size()
                << " matched peaks\n";
            return ok;
        }
        if (*oracle_cmd) {
            const double l = c.l > 0.0 ? c.l : 0.25;
            double worst = 0.0, tol = 1e-10;
            if (kind == "dual") {
                if (c.graph.empty()) throw UsageError("--kind dual needs --graph");
                const auto g = load_graph(c.graph);
                const TwoPortSolver engine(g);
                const double kmax = 2.0 * std::numbers::pi / reference_length(g, c.l);
                tol = 1e-8;
                std::size_t used = 0;
                for (std::size_t i = 0; i < oracle_points; ++i) {
                    const double k = kmax * (static_cast<double>(i) + 0.5) / static_cast<double>(oracle_points);
                    try {
                        const auto ref = oracle::independent_solver(g, k);
                        const auto s = engine(k);
                        worst = std::max({worst, std::abs(s.s11 - ref.s11), std::abs(s.s12 - ref.s12),
                                          std::abs(s.s21 - ref.s21), std::abs(s.s22 - ref.s22)});
                        ++used;
                    } catch (const std::domain_error&) {
                    }
                }
                out << "dual-solver samples " << used << "\n";
            } else {
                const int n = kind == "c3" ? 3 : 4;
                const TwoPortSolver engine(build_polygon_chain({{n}, {l}, 0.0}));
                const double period = kind == "c3" ? 2 * std::numbers::pi : std::numbers::pi;
                for (std::size_t i = 0; i < oracle_points; ++i) {
                    const double kl = 2 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(oracle_points);
                    double r = std::fmod(kl, period);
                    if (std::min(r, period - r) <= oracle::guard_band) continue;
                    const cplx t = kind == "c3" ? oracle::t_c3(kl) : oracle::t_c4(kl);
                    worst = std::max(worst, std::abs(engine(kl / l).s21 + t));
                }
            }
            out << "max deviation " << io::fmt(worst) << " (tolerance " << io::fmt(tol) << ")\n";
            return worst < tol ? ok : defect;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const io::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        err << "computation failed: " << e.what() << "\n";
        return defect;
    }
    return usage;
}

}  // namespace qgraph::cli
