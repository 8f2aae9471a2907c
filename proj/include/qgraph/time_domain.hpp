#pragma once

// Gaussian pulse propagation by frequency-domain synthesis.

#include "qgraph/graph.hpp"
#include "qgraph/parallel.hpp"
#include "qgraph/scattering.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

struct PulseSpec {
    double amplitude = 0.41;  ///< volts
    double fwhm = 125e-12;    ///< seconds
    double t0 = 0.0;          ///< seconds

    double sigma() const { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

    void validate() const {
        if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw std::invalid_argument("pulse FWHM must be positive");
        if (amplitude == 0.0 || !std::isfinite(amplitude)) throw std::invalid_argument("pulse amplitude must be non-zero");
    }
};

struct TimeGrid {
    double start = 0.0;  ///< seconds
    double dt = 0.0;     ///< seconds
    std::size_t size = 0;

    double time(std::size_t i) const { return start + dt * static_cast<double>(i); }
    double end() const { return size == 0 ? start : time(size - 1); }
};

struct TimeTrace {
    TimeGrid grid;
    std::vector<double> volts;

    double time(std::size_t i) const { return grid.time(i); }
    std::size_t size() const { return volts.size(); }

    double energy() const {
        double e = 0.0;
        for (double v : volts) e += v * v;
        return e * grid.dt;
    }
};

class RecordLengthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_sampling(const PulseSpec& pulse, const TimeGrid& grid) {
    pulse.validate();
    if (!(grid.dt > 0.0) || grid.size < 2) throw std::invalid_argument("time grid needs a positive step and >= 2 samples");
    if (grid.dt > pulse.fwhm / 10.0 * (1.0 + 1e-12))
        throw std::invalid_argument("under-sampled grid: need at least 10 samples per pulse FWHM");
    if (grid.start > pulse.t0 - 5.0 * pulse.sigma() + 1e-18)
        throw std::invalid_argument("grid must start at least 5 sigma before the pulse centre");
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

inline TimeTrace gaussian_pulse(const PulseSpec& pulse, const TimeGrid& grid) {
    detail::check_sampling(pulse, grid);
    TimeTrace tr{grid, std::vector<double>(grid.size)};
    const double s = pulse.sigma();
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double x = (grid.time(i) - pulse.t0) / s;
        tr.volts[i] = pulse.amplitude * std::exp(-0.5 * x * x);
    }
    return tr;
}

/// Relative pulse-spectrum level below which frequencies are dropped.
inline constexpr double spectral_truncation = 1e-6;
/// The final fraction of the record that must have decayed.
inline constexpr double tail_fraction = 0.05;
/// Decay level, relative to |A|, required in that tail.
inline constexpr double tail_level = 1e-4;

struct SynthesisResult {
    TimeTrace input;
    TimeTrace output;
    std::size_t frequencies_evaluated = 0;
    double tail_max = 0.0;  ///< largest |output| in the tail window, volts
};

namespace detail {

inline double tail_max(const std::vector<double>& v) {
    const auto n = v.size();
    const auto first = n - std::max<std::size_t>(1, static_cast<std::size_t>(tail_fraction * static_cast<double>(n)));
    double m = 0.0;
    for (std::size_t i = first; i < n; ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

inline SynthesisResult synthesize_unchecked(const TwoPortSolver& solver, const PulseSpec& pulse, double beta,
                                            const TimeGrid& grid) {
    SynthesisResult res;
    res.input = gaussian_pulse(pulse, grid);
    const std::size_t n = grid.size;
    const std::size_t nf = n / 2 + 1;

    std::unique_ptr<double, FftwFree> real(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nf)));
    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spec.get(), FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.get(), real.get(), FFTW_ESTIMATE);
    std::copy(res.input.volts.begin(), res.input.volts.end(), real.get());
    fftw_execute(fwd);

    std::vector<cplx> x(nf);
    double peak = 0.0;
    for (std::size_t j = 0; j < nf; ++j) {
        x[j] = {spec.get()[j][0], spec.get()[j][1]};
        peak = std::max(peak, std::abs(x[j]));
    }
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < nf; ++j)
        if (std::abs(x[j]) >= spectral_truncation * peak) active.push_back(j);

    const double df = 1.0 / (static_cast<double>(n) * grid.dt);
    std::vector<cplx> h(nf, 0.0);
    parallel_for(active.size(), [&](std::size_t a) {
        const std::size_t j = active[a];
        // k = 0 is degenerate; its limit is taken a thousandth of a bin away
        const double nu = j == 0 ? 1e-3 * df : static_cast<double>(j) * df;
        // S is defined for exp(-i omega t) time dependence; FFTW's inverse
        // transform uses exp(+i omega t), hence the conjugate
        h[j] = std::conj(solver(wavenumber_from_frequency(nu), beta).s21);
    });
    if (n % 2 == 0) h[nf - 1] = h[nf - 1].real();  // Nyquist bin must stay real
    h[0] = h[0].real();

    for (std::size_t j = 0; j < nf; ++j) {
        const cplx y = h[j] * x[j] / static_cast<double>(n);
        spec.get()[j][0] = y.real();
        spec.get()[j][1] = y.imag();
    }
    fftw_execute(bwd);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);

    res.output = TimeTrace{grid, std::vector<double>(real.get(), real.get() + n)};
    res.frequencies_evaluated = active.size();
    res.tail_max = tail_max(res.output.volts);
    return res;
}

}  // namespace detail

/// Output voltage at lead 2 for a Gaussian pulse injected on lead 1.
/// Throws RecordLengthError if the response has not decayed to
/// 1e-4 |A| over the last 5% of the record.
inline SynthesisResult synthesize_output(const MetricGraph& graph, const PulseSpec& pulse, double beta,
                                         const TimeGrid& grid) {
    detail::check_sampling(pulse, grid);
    const TwoPortSolver solver(graph);
    auto res = detail::synthesize_unchecked(solver, pulse, beta, grid);
    if (res.tail_max > tail_level * std::abs(pulse.amplitude))
        throw RecordLengthError("record too short: output tail is " + std::to_string(res.tail_max) +
                                " V, above the decay threshold");
    return res;
}

/// Same as synthesize_output but doubles the record length until the tail
/// criterion is met.
inline SynthesisResult synthesize_output_auto(const MetricGraph& graph, const PulseSpec& pulse, double beta,
                                              double dt, double initial_duration, std::size_t max_samples = 1u << 24) {
    const TwoPortSolver solver(graph);
    const double start = pulse.t0 - 6.0 * pulse.sigma();
    auto samples = static_cast<std::size_t>(std::ceil(initial_duration / dt));
    samples = std::max<std::size_t>(samples, 16);
    for (;;) {
        const TimeGrid grid{start, dt, samples};
        detail::check_sampling(pulse, grid);
        auto res = detail::synthesize_unchecked(solver, pulse, beta, grid);
        if (res.tail_max <= tail_level * std::abs(pulse.amplitude)) return res;
        if (samples * 2 > max_samples)
            throw RecordLengthError("record length limit reached before the output decayed");
        samples *= 2;
    }
}

/// Earliest time at which a pulse can reach the output: t0 plus the shortest
/// lead-to-lead distance over c.
inline double first_arrival(const MetricGraph& graph, const PulseSpec& pulse) {
    const auto& leads = graph.leads();
    if (leads.size() != 2) throw std::invalid_argument("need exactly 2 leads");
    const std::size_t nv = graph.vertex_count();
    std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
    std::vector<bool> done(nv, false);
    dist[leads[0].vertex] = 0.0;
    for (std::size_t it = 0; it < nv; ++it) {
        std::size_t u = nv;
        for (std::size_t v = 0; v < nv; ++v)
            if (!done[v] && (u == nv || dist[v] < dist[u])) u = v;
        if (u == nv || !std::isfinite(dist[u])) break;
        done[u] = true;
        for (const auto& e : graph.edges()) {
            if (e.u == u && dist[u] + e.length < dist[e.v]) dist[e.v] = dist[u] + e.length;
            if (e.v == u && dist[u] + e.length < dist[e.u]) dist[e.u] = dist[u] + e.length;
        }
    }
    return pulse.t0 + dist[leads[1].vertex] / speed_of_light;
}

struct TracePeak {
    std::size_t index = 0;
    double time = 0.0;   ///< seconds
    double volts = 0.0;  ///< signed sample value
};

/// Local extrema of |v| above `threshold` volts, in time order.
inline std::vector<TracePeak> trace_peaks(const TimeTrace& tr, double threshold) {
    std::vector<TracePeak> out;
    const auto& v = tr.volts;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a >= threshold && a > std::abs(v[i - 1]) && a >= std::abs(v[i + 1])) out.push_back({i, tr.time(i), v[i]});
    }
    return out;
}

}  // namespace qgraph
