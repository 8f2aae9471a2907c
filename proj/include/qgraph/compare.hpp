#pragma once

// Measured-versus-simulated two-port comparison.

#include "qgraph/io.hpp"
#include "qgraph/resonance.hpp"
#include "qgraph/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qgraph {

struct PeakOffset {
    double measured_hz = 0.0;
    double simulated_hz = 0.0;
    double offset_hz = 0.0;  ///< measured - simulated
};

struct ComparisonReport {
    std::vector<double> frequency_hz;
    std::vector<double> measured_t;
    std::vector<double> simulated_t;
    std::vector<double> residual;  ///< |S21| measured - simulated
    double rms = 0.0;
    double max_abs = 0.0;
    std::vector<PeakOffset> peaks;
};

struct CompareOptions {
    double prominence = 0.1;
};

/// Compares |S21| of a measurement with the simulation at the measured
/// frequencies inside the overlap, and pairs each measured peak with the
/// nearest simulated one.
inline ComparisonReport compare(const io::MeasuredTwoPort& measured, const MetricGraph& graph, double beta,
                                const CompareOptions& opt = {}) {
    std::vector<double> k;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured.frequency_hz[i] > 0.0) {
            k.push_back(wavenumber_from_frequency(measured.frequency_hz[i]));
            idx.push_back(i);
        }
    }
    if (k.size() < 2) throw std::invalid_argument("measured and simulated frequency ranges do not overlap");
    const auto scan = scan_grid(graph, k, beta);
    if (scan.size() < 2) throw std::invalid_argument("simulation failed across the measured range");

    ComparisonReport r;
    std::size_t j = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (j >= scan.size() || scan.k[j] != k[i]) continue;  // defect point
        const double tm = std::abs(measured.s21[idx[i]]);
        const double ts = scan.values[j].transmission();
        r.frequency_hz.push_back(measured.frequency_hz[idx[i]]);
        r.measured_t.push_back(tm);
        r.simulated_t.push_back(ts);
        r.residual.push_back(tm - ts);
        ++j;
    }
    double ss = 0.0;
    for (double d : r.residual) {
        ss += d * d;
        r.max_abs = std::max(r.max_abs, std::abs(d));
    }
    r.rms = std::sqrt(ss / static_cast<double>(r.residual.size()));

    const auto pm = find_peaks(r.frequency_hz, r.measured_t, opt.prominence);
    const auto ps = find_peaks(r.frequency_hz, r.simulated_t, opt.prominence);
    for (const auto& a : pm) {
        double best = std::numeric_limits<double>::infinity();
        double at = 0.0;
        for (const auto& b : ps)
            if (std::abs(b.center - a.center) < std::abs(best)) {
                best = a.center - b.center;
                at = b.center;
            }
        if (std::isfinite(best)) r.peaks.push_back({a.center, at, best});
    }
    return r;
}

}  // namespace qgraph
