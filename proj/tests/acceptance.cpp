// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include "fixtures.hpp"
#include "qgraph/ensembles.hpp"
#include "qgraph/oracles.hpp"
#include "qgraph/paths.hpp"
#include "qgraph/resonance.hpp"
#include "qgraph/scattering.hpp"
#include "qgraph/spectral_stats.hpp"
#include "qgraph/time_domain.hpp"

#include <boost/math/tools/minima.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qgraph;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double l = 0.25;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("%s  [%2d] %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string str(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// interior grid of (lo, hi), endpoints excluded
std::vector<double> open_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return g;
}

void oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t used = 0;
    for (int n : {3, 4}) {
        const TwoPortSolver solver(fixtures::single_polygon(n, l));
        for (double kl : open_grid(0.0, 2 * pi, 10000)) {
            cplx ref;
            try {
                ref = n == 3 ? oracle::t_c3(kl) : oracle::t_c4(kl);
            } catch (const std::domain_error&) {
                continue;  // guard band
            }
            worst = std::max(worst, std::abs(solver(kl / l, 0.0).s21 + ref));
            ++used;
        }
    }
    const double secs = seconds_since(t0);
    report(1, worst < 1e-10 && secs < 10.0, "oracle equivalence",
           "max |dS21| = " + str(worst) + " over " + std::to_string(used) + " points in " + str(secs, 3) + " s");
}

void unitarity_reciprocity() {
    double unit = 0.0, recip = 0.0;
    for (double div : {1.0, 3.0, pi}) {
        for (const auto& g : {fixtures::c3c4c3(l, l / div), fixtures::c4c3c4(l, l / div)}) {
            const TwoPortSolver solver(g);
            for (double kl : open_grid(0.0, 8 * pi, 10000)) {
                const auto s = solver(kl / l, 0.0);
                unit = std::max(unit, s.unitarity_defect());
                recip = std::max(recip, std::abs(s.s12 - s.s21));
            }
        }
    }
    report(2, unit < 1e-10 && recip < 1e-12, "unitarity and reciprocity",
           "max |S'S - I| = " + str(unit) + ", max |S12 - S21| = " + str(recip));
}

double asymmetry(const MetricGraph& g, double axis_kl, double beta) {
    const TwoPortSolver solver(g);
    double worst = 0.0;
    for (double x : open_grid(0.0, pi, 2000))
        worst = std::max(worst, std::abs(solver((axis_kl + x) / l, beta).transmission() -
                                         solver((axis_kl - x) / l, beta).transmission()));
    return worst;
}

void symmetry_axes() {
    double lossless = 0.0, lossy = std::numeric_limits<double>::infinity();
    for (const auto& [g, axis] : std::vector<std::pair<MetricGraph, double>>{{fixtures::c3c4c3(l, l), pi},
                                                                             {fixtures::c4c3c4(l, l), pi},
                                                                             {fixtures::c3c4c3(l, l / 3), 3 * pi},
                                                                             {fixtures::c4c3c4(l, l / 3), 3 * pi}}) {
        lossless = std::max(lossless, asymmetry(g, axis, 0.0));
        lossy = std::min(lossy, asymmetry(g, axis, 0.009));
    }
    report(3, lossless < 1e-9 && lossy > 0.0, "symmetry axes",
           "max asymmetry at beta=0: " + str(lossless) + ", min at beta=0.009: " + str(lossy));
}

struct BandPeak {
    double k;
    double height;
};

// peaks of T in the suppression band kl in [pi/2, 3pi/2], refined to the maximum
std::vector<BandPeak> band_peaks(const MetricGraph& g, double beta) {
    const TwoPortSolver solver(g);
    const auto scan = transmission_scan(g, 0.5 * pi / l, 1.5 * pi / l, 20001, beta);
    std::vector<double> t(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i) t[i] = scan.values[i].transmission();
    std::vector<BandPeak> out;
    for (const auto& p : find_peaks(scan.k, t, 0.1)) {
        const double h = scan.k[1] - scan.k[0];
        const auto best = boost::math::tools::brent_find_minima(
            [&](double k) { return -solver(k, beta).transmission(); }, scan.k[p.index] - h, scan.k[p.index] + h, 52);
        out.push_back({best.first, -best.second});
    }
    return out;
}

void full_transmission() {
    const auto g = fixtures::c3c4c3(l, l);
    const auto peaks = band_peaks(g, 0.0);
    const TwoPortSolver solver(g);
    double best = 0.0, best_k = 0.0;
    for (const auto& p : peaks)
        if (p.height > best) best = p.height, best_k = p.k;
    const double lossy = best_k > 0.0 ? solver(best_k, 0.009).transmission() : 1.0;
    report(4, best >= 0.999 && lossy < best, "full-transmission peaks",
           std::to_string(peaks.size()) + " band peaks, highest T = " + str(best, 12) + " at kl/pi = " +
               str(best_k * l / pi, 6) + ", T(beta=0.009) there = " + str(lossy));
}

void peak_width() {
    const auto g = fixtures::c3c4c3(l, l);
    const auto scan = transmission_scan(g, 0.5 * pi / l, 1.5 * pi / l, 40001, 0.0);
    const auto res = peak_analysis(scan, 0.5);
    bool ok = !res.empty();
    std::string widths;
    for (const auto& r : res) {
        ok = ok && r.fwhm_hz >= 1e6 && r.fwhm_hz <= 6e6 && !r.under_resolved;
        widths += (widths.empty() ? "" : ", ") + str(r.fwhm_hz / 1e6, 4) + " MHz @ " + str(r.center_hz / 1e6, 5) + " MHz";
    }
    report(5, ok, "peak width", "FWHM " + widths);
}

void closed_graph_statistics() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = fixtures::c3c4c3prime(l);
    const double total = total_length(without_leads(g));
    ClosedSpectrumOptions opt;
    opt.target_count = 1811;
    const auto ev = closed_eigenvalues(without_leads(g), opt);
    const double search = seconds_since(t0);
    if (ev.k.size() < 1811) {
        report(6, false, "Berry-Robnik regime", "only " + std::to_string(ev.k.size()) + " levels found");
        report(7, false, "Weyl count", "only " + std::to_string(ev.k.size()) + " levels found");
        return;
    }
    const std::vector<double> k(ev.k.begin(), ev.k.begin() + 1811);

    const auto u = unfold_wavenumbers(k, total, "C3C4C3'");
    const auto fit = fit_rho1(spacings(u));
    const bool rho_ok = fit.rho1 >= 0.436 && fit.rho1 <= 0.556;

    // Monte-Carlo spread of Delta3 for Berry-Robnik spectra of the same size
    constexpr int realisations = 100;
    std::vector<double> Ls;
    for (double L = 2.0; L <= 20.0 + 1e-9; L += 1.0) Ls.push_back(L);
    std::vector<std::vector<double>> mc(Ls.size());
    ensembles::Rng rng(20240601);
    for (int r = 0; r < realisations; ++r) {
        const auto s = ensembles::as_spectrum(ensembles::berry_robnik_levels(1811, fit.rho1, rng), "mc");
        for (std::size_t i = 0; i < Ls.size(); ++i) mc[i].push_back(delta3_empirical(s, Ls[i]).value);
    }
    int outside = 0;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        double m = 0.0, v = 0.0;
        for (double x : mc[i]) m += x;
        m /= realisations;
        for (double x : mc[i]) v += (x - m) * (x - m);
        const double sigma = std::sqrt(v / (realisations - 1));
        const double z = std::abs(delta3_empirical(u, Ls[i]).value - delta3_br(Ls[i], fit.rho1)) / sigma;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) ++outside;
    }
    std::ostringstream d;
    d << "rho1 = " << str(fit.rho1) << " +/- " << str(fit.standard_error, 2) << " (band [0.436, 0.556]"
      << (rho_ok ? "" : ", outside") << "); Delta3 L=2..20: " << outside << " of " << Ls.size()
      << " points beyond 3 sigma (max " << str(worst_z, 3) << " sigma); " << str(seconds_since(t0), 3) << " s ("
      << str(search, 3) << " s eigenvalue search)";
    report(6, rho_ok && outside == 0 && seconds_since(t0) < 600.0, "Berry-Robnik regime", d.str());

    // Weyl: N(k) ~ (2L/c) nu = L k / pi
    const double weyl = total * k.back() / pi;
    const double dev = 1811.0 - weyl;
    report(7, std::abs(dev) <= 10.0, "Weyl count",
           "1811 levels up to k = " + str(k.back(), 7) + " rad/m, smooth count " + str(weyl, 6) +
               ", deviation " + str(dev, 3));
}

void time_domain() {
    PulseSpec pulse;
    pulse.amplitude = 0.41;
    pulse.fwhm = 125e-12;
    pulse.t0 = 1e-9;
    const double dt = 5e-12;
    const auto a = synthesize_output_auto(fixtures::c3c4c3(l, l), pulse, 0.0, dt, 40e-9);
    const auto b = synthesize_output_auto(fixtures::c4c3c4(l, l), pulse, 0.0, dt, 40e-9);
    const auto pa = trace_peaks(a.output, 1e-2 * pulse.amplitude);
    const auto pb = trace_peaks(b.output, 1e-2 * pulse.amplitude);
    if (pa.size() < 3 || pb.size() < 3) {
        report(8, false, "time-domain structure", "fewer than three output peaks");
        return;
    }
    double delay_err = 0.0;
    for (const auto* p : {&pa, &pb})
        for (int i = 0; i < 3; ++i)
            delay_err = std::max(delay_err, std::abs((*p)[i].time - pulse.t0 - (5 + i) * l / speed_of_light));
    const double r5 = pa[0].volts / pb[0].volts;
    const double r6 = pa[1].volts / pb[1].volts;
    const double r7 = pa[2].volts / pb[2].volts;
    const double out7 = pa[2].volts / pulse.amplitude;
    const bool ok = delay_err <= dt && std::abs(r6 - 2.0) <= 0.1 && std::abs(r5 - 1.0) <= 0.02 &&
                    std::abs(r7 - 1.0) <= 0.02;
    report(8, ok, "time-domain structure",
           "max delay error " + str(delay_err / dt, 3) + " dt; 6l ratio " + str(r6, 5) + ", 5l ratio " + str(r5, 5) +
               ", 7l ratio " + str(r7, 5) + "; 7l output/input " + str(out7, 4) + " (reference 0.224, " +
               (std::abs(out7 - 0.224) <= 0.05 ? "within" : "outside") + " +/-0.05)");
}

void statistics_self_tests() {
    ensembles::Rng rng(7);
    SpacingSample s{ensembles::berry_robnik_spacings(100000, 0.5, rng)};
    FitOptions fo;
    fo.bootstrap = 100;
    const auto fit = fit_rho1(s, fo);
    const bool fit_ok = std::abs(fit.rho1 - 0.5) <= 0.02;

    constexpr int R = 40;
    bool poisson_ok = true;
    double worst_z = 0.0;
    for (double L : {2.0, 5.0, 10.0, 20.0}) {
        std::vector<double> v;
        for (int r = 0; r < R; ++r)
            v.push_back(delta3_empirical(ensembles::as_spectrum(ensembles::poisson_levels(2000, rng), "p"), L).value);
        double m = 0.0, var = 0.0;
        for (double x : v) m += x;
        m /= R;
        for (double x : v) var += (x - m) * (x - m);
        const double se = std::sqrt(var / (R - 1) / R);
        const double z = std::abs(m - delta3_poisson(L)) / se;
        worst_z = std::max(worst_z, z);
        poisson_ok = poisson_ok && z <= 3.0;
    }

    std::vector<double> fence(2000);
    for (std::size_t i = 0; i < fence.size(); ++i) fence[i] = static_cast<double>(i);
    const double pf = delta3_empirical(ensembles::as_spectrum(fence, "fence"), 200.0, 3.3).value;
    const bool pf_ok = std::abs(pf - 1.0 / 12.0) <= 0.002 / 12.0;

    report(9, fit_ok && poisson_ok && pf_ok, "statistical machinery",
           "rho1 from 1e5 spacings = " + str(fit.rho1, 5) + "; Poisson Delta3 max deviation " + str(worst_z, 3) +
               " sigma; picket fence " + str(pf, 6) + " (1/12 = " + str(1.0 / 12.0, 6) + ")");
}

void property_suite() {
    std::mt19937_64 rng(5);
    const std::vector<MetricGraph> geometries{fixtures::c3c4c3(l, l), fixtures::c4c3c4(l, l / 3),
                                              fixtures::c3c4c3prime(l)};

    double split = 0.0;
    std::uniform_real_distribution<double> kd(0.1, 200.0), fd(0.05, 0.95);
    for (const auto& g : geometries) {
        const TwoPortSolver base(g);
        for (const auto& e : g.edges()) {
            const TwoPortSolver other(split_edge(g, e.id, fd(rng) * e.length));
            for (int i = 0; i < 10; ++i) {
                const double k = kd(rng);
                for (double beta : {0.0, 0.009})
                    split = std::max(split, (base(k, beta).matrix() - other(k, beta).matrix()).cwiseAbs().maxCoeff());
            }
        }
    }

    double dual = 0.0;
    for (const auto& g : geometries) {
        const TwoPortSolver solver(g);
        for (int n = 0; n < 100;) {
            const double k = kd(rng);
            TwoPortScattering ref;
            try {
                ref = oracle::independent_solver(g, k);
            } catch (const std::domain_error&) {
                continue;
            }
            dual = std::max(dual, (solver(k, 0.0).matrix() - ref.matrix()).cwiseAbs().maxCoeff());
            ++n;
        }
    }

    PulseSpec pulse;
    pulse.t0 = 1e-9;
    double gain = 0.0;
    for (double beta : {0.0, 0.009}) {
        const auto r = synthesize_output_auto(geometries[0], pulse, beta, 5e-12, 40e-9);
        gain = std::max(gain, r.output.energy() / r.input.energy());
    }
    report(10, split < 1e-10 && dual < 1e-8 && gain <= 1.0, "property suite",
           "split invariance " + str(split) + ", dual solver " + str(dual) + ", max output/input energy " +
               str(gain, 5));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::function<void()>> steps{oracle_equivalence, unitarity_reciprocity, symmetry_axes,
                                                   full_transmission,  peak_width,            closed_graph_statistics,
                                                   time_domain,        statistics_self_tests, property_suite};
    for (const auto& step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  error: %s\n", e.what());
        }
    }
    std::printf("%d criteria failed, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
