#pragma once

#include "qgraph/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qgraph {

/// A transmission peak located on a sampled curve.
struct Resonance {
    double center_k = 0.0;     ///< rad/m
    double center_hz = 0.0;
    double fwhm_k = 0.0;       ///< rad/m
    double fwhm_hz = 0.0;      ///< = 2 * delta nu
    double height = 0.0;
    double prominence = 0.0;
    std::size_t index = 0;     ///< grid index of the sampled maximum
    bool under_resolved = false;
};

struct PeakOnCurve {
    std::size_t index = 0;
    double center = 0.0;
    double height = 0.0;
    double prominence = 0.0;
    double width = 0.0;        ///< full width at half the peak height, in x units
    bool width_defined = false;
    bool under_resolved = false;
};

/// Local maxima of y(x) with at least the given prominence. Prominence is the
/// drop to the higher of the two lowest points reached before meeting a
/// higher sample (or the curve end) on either side. The width is measured at
/// half the peak height with linear interpolation between samples.
inline std::vector<PeakOnCurve> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                                           double min_prominence) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y must have equal length");
    std::vector<PeakOnCurve> peaks;
    const std::size_t n = y.size();
    if (n < 3) return peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        PeakOnCurve p;
        p.index = i;
        p.height = y[i];

        double left_min = y[i];
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] > y[i]) break;
            left_min = std::min(left_min, y[j]);
        }
        double right_min = y[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] > y[i]) break;
            right_min = std::min(right_min, y[j]);
        }
        p.prominence = y[i] - std::max(left_min, right_min);
        if (p.prominence < min_prominence) continue;

        // parabolic vertex through the three samples around the maximum
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        double offset = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        const double step = offset >= 0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
        p.center = x[i] + offset * step;

        const double half = 0.5 * y[i];
        std::optional<double> xl, xr;
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] < half) {
                xl = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);
                break;
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] < half) {
                xr = x[j - 1] + (y[j - 1] - half) * (x[j] - x[j - 1]) / (y[j - 1] - y[j]);
                break;
            }
        }
        if (xl && xr) {
            p.width = *xr - *xl;
            p.width_defined = true;
            const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
            p.under_resolved = p.width < 3.0 * dx;
        }
        peaks.push_back(p);
    }
    return peaks;
}

/// Resonances of |S12| in a scan. Peaks whose half-height width cannot be
/// bracketed inside the scan are skipped.
inline std::vector<Resonance> peak_analysis(const SpectrumScan& scan, double min_prominence) {
    const auto t = scan.transmission();
    std::vector<Resonance> out;
    for (const auto& p : find_peaks(scan.k, t, min_prominence)) {
        if (!p.width_defined) continue;
        Resonance r;
        r.center_k = p.center;
        r.center_hz = frequency_from_wavenumber(p.center);
        r.fwhm_k = p.width;
        r.fwhm_hz = frequency_from_wavenumber(p.width);
        r.height = p.height;
        r.prominence = p.prominence;
        r.index = p.index;
        r.under_resolved = p.under_resolved;
        out.push_back(r);
    }
    return out;
}

}  // namespace qgraph
