#pragma once

// Unfolding, nearest-neighbour spacing distributions and spectral rigidity.

#include "qgraph/parallel.hpp"
#include "qgraph/scattering.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <complex>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

struct UnfoldedSpectrum {
    std::vector<double> levels;  ///< dimensionless, ascending
    double total_length = 0.0;   ///< meters
    std::string source;

    std::size_t size() const { return levels.size(); }
    double span() const { return levels.empty() ? 0.0 : levels.back() - levels.front(); }
};

struct SpacingSample {
    std::vector<double> s;

    double mean() const {
        if (s.empty()) return 0.0;
        return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    }
};

/// Weyl unfolding of resonance frequencies: eps = (2 L / c) nu.
inline UnfoldedSpectrum unfold(const std::vector<double>& frequencies_hz, double total_length,
                               std::string source = {}) {
    if (!(total_length > 0.0)) throw std::invalid_argument("total length must be positive");
    if (!std::is_sorted(frequencies_hz.begin(), frequencies_hz.end()))
        throw std::invalid_argument("frequencies must be sorted ascending");
    UnfoldedSpectrum u;
    u.total_length = total_length;
    u.source = std::move(source);
    u.levels.reserve(frequencies_hz.size());
    const double scale = 2.0 * total_length / speed_of_light;
    for (double nu : frequencies_hz) u.levels.push_back(scale * nu);
    return u;
}

/// Same unfolding expressed in wave numbers: eps = L k / pi.
inline UnfoldedSpectrum unfold_wavenumbers(const std::vector<double>& k, double total_length,
                                           std::string source = {}) {
    std::vector<double> nu(k.size());
    std::transform(k.begin(), k.end(), nu.begin(), frequency_from_wavenumber);
    return unfold(nu, total_length, std::move(source));
}

inline SpacingSample spacings(const UnfoldedSpectrum& u) {
    SpacingSample out;
    if (u.levels.size() < 2) return out;
    out.s.reserve(u.levels.size() - 1);
    for (std::size_t i = 1; i < u.levels.size(); ++i) out.s.push_back(u.levels[i] - u.levels[i - 1]);
    return out;
}

// ---------------------------------------------------------------------------
// Spacing distributions
// ---------------------------------------------------------------------------

inline double pdf_poisson(double s) {
    if (s < 0.0) throw std::invalid_argument("spacing must be non-negative");
    return std::exp(-s);
}

inline double pdf_goe(double s) {
    if (s < 0.0) throw std::invalid_argument("spacing must be non-negative");
    const double pi = std::numbers::pi;
    return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

/// Berry-Robnik mixture of a Poisson fraction rho1 and a GOE fraction 1 - rho1.
inline double pdf_berry_robnik(double s, double rho1) {
    if (s < 0.0) throw std::invalid_argument("spacing must be non-negative");
    if (!(rho1 >= 0.0 && rho1 <= 1.0)) throw std::invalid_argument("rho1 must lie in [0, 1]");
    const double pi = std::numbers::pi;
    const double rho2 = 1.0 - rho1;
    return rho1 * rho1 * std::exp(-rho1 * s) * std::erfc(0.5 * std::sqrt(pi) * rho2 * s) +
           (2.0 * rho1 * rho2 + 0.5 * pi * rho2 * rho2 * rho2 * s) *
               std::exp(-rho1 * s - 0.25 * pi * rho2 * rho2 * s * s);
}

/// Cumulative distribution of the Berry-Robnik spacing density,
/// 1 - exp(-rho1 s) [rho1 erfc(sqrt(pi) rho2 s / 2) + rho2 exp(-pi rho2^2 s^2 / 4)].
inline double cdf_berry_robnik(double s, double rho1) {
    if (s <= 0.0) return 0.0;
    const double pi = std::numbers::pi;
    const double rho2 = 1.0 - rho1;
    return 1.0 - std::exp(-rho1 * s) * (rho1 * std::erfc(0.5 * std::sqrt(pi) * rho2 * s) +
                                        rho2 * std::exp(-0.25 * pi * rho2 * rho2 * s * s));
}

struct Histogram {
    double bin_width = 0.25;
    std::vector<double> centers;
    std::vector<double> density;
};

/// Normalised spacing histogram (display only; fitting uses the raw sample).
inline Histogram spacing_histogram(const SpacingSample& sample, double bin_width = 0.25, double s_max = 5.0) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    const auto bins = static_cast<std::size_t>(std::ceil(s_max / bin_width));
    std::vector<double> counts(bins, 0.0);
    const double mean = sample.mean();
    for (double s : sample.s) {
        const double x = mean > 0 ? s / mean : s;
        const auto b = static_cast<std::size_t>(x / bin_width);
        if (b < bins) counts[b] += 1.0;
    }
    const double norm = static_cast<double>(sample.s.size()) * bin_width;
    for (std::size_t b = 0; b < bins; ++b) {
        h.centers.push_back((static_cast<double>(b) + 0.5) * bin_width);
        h.density.push_back(norm > 0 ? counts[b] / norm : 0.0);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Fitting rho1
// ---------------------------------------------------------------------------

struct FitResult {
    double rho1 = 0.0;
    double standard_error = 0.0;
    double log_likelihood = 0.0;
    std::size_t bootstrap_samples = 0;

    double rho2() const { return 1.0 - rho1; }
};

struct FitOptions {
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 20240601;
    double tolerance = 1e-6;
    std::size_t min_spacings = 100;
};

/// splitmix64 step; used to derive independent per-task seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace detail {

inline double br_log_likelihood(const std::vector<double>& s, double rho1) {
    double ll = 0.0;
    for (double x : s) ll += std::log(std::max(pdf_berry_robnik(x, rho1), std::numeric_limits<double>::min()));
    return ll;
}

/// Golden-section maximisation of f on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    // the interior optimum may sit on the boundary
    const double mid = 0.5 * (a + b);
    double best = mid, fbest = f(mid);
    for (double edge : {lo, hi}) {
        const double fe = f(edge);
        if (fe > fbest) {
            best = edge;
            fbest = fe;
        }
    }
    return best;
}

inline double mle_rho1(const std::vector<double>& normalised, double tol) {
    return golden_max([&](double r) { return br_log_likelihood(normalised, r); }, 0.0, 1.0, tol);
}

inline std::vector<double> normalise_mean(const std::vector<double>& s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [mean](double x) { return x / mean; });
    return out;
}

}  // namespace detail

/// Maximum-likelihood fit of the Berry-Robnik parameter. Spacings are
/// rescaled to unit mean first; the standard error comes from a seeded
/// nonparametric bootstrap.
inline FitResult fit_rho1(const SpacingSample& sample, const FitOptions& opt = {}) {
    if (sample.s.size() < opt.min_spacings)
        throw std::invalid_argument("need at least " + std::to_string(opt.min_spacings) + " spacings");
    for (double x : sample.s)
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("spacings must be finite and non-negative");
    const auto [lo, hi] = std::minmax_element(sample.s.begin(), sample.s.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi)))
        throw std::invalid_argument("degenerate spacing sample: all spacings are equal");

    const auto s = detail::normalise_mean(sample.s);
    FitResult r;
    r.rho1 = detail::mle_rho1(s, opt.tolerance);
    r.log_likelihood = detail::br_log_likelihood(s, r.rho1);
    r.bootstrap_samples = opt.bootstrap;

    if (opt.bootstrap > 1) {
        std::vector<double> estimates(opt.bootstrap);
        parallel_for(opt.bootstrap, [&](std::size_t b) {
            std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(b)));
            std::uniform_int_distribution<std::size_t> pick(0, sample.s.size() - 1);
            std::vector<double> resample(sample.s.size());
            for (auto& x : resample) x = sample.s[pick(rng)];
            estimates[b] = detail::mle_rho1(detail::normalise_mean(resample), opt.tolerance);
        });
        const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(opt.bootstrap);
        double var = 0.0;
        for (double e : estimates) var += (e - mean) * (e - mean);
        r.standard_error = std::sqrt(var / static_cast<double>(opt.bootstrap - 1));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Spectral rigidity
// ---------------------------------------------------------------------------

/// Least-squares deviation of the staircase from its best straight line over
/// [start, start + L], divided by L. Uses exact integrals of the
/// piecewise-constant staircase; `first`/`last` delimit the levels in the window.
inline double delta3_window(const double* first, const double* last, double start, double L) {
    // with x_i the level positions relative to the window start, N(x) counts
    // levels at or below x, and
    //   I0 = int N = sum (L - x_i),  I2 = int N^2 = sum (2i - 1)(L - x_i),
    //   I1 = int x N = sum (L^2 - x_i^2) / 2.
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    std::size_t i = 1;
    for (const double* p = first; p != last; ++p, ++i) {
        const double x = *p - start;
        i0 += L - x;
        i1 += 0.5 * (L * L - x * x);
        i2 += static_cast<double>(2 * i - 1) * (L - x);
    }
    const double centred = i1 - 0.5 * L * i0;
    const double value = i2 - i0 * i0 / L - 12.0 * centred * centred / (L * L * L);
    return std::max(0.0, value / L);
}

struct RigidityPoint {
    double L = 0.0;
    double value = 0.0;
    double uncertainty = 0.0;  ///< standard error from the spread of window values
    std::size_t windows = 0;
};

/// Local average of the windowed rigidity over the unfolded spectrum; windows
/// advance by `window_step` (L/4 when <= 0).
inline RigidityPoint delta3_empirical(const UnfoldedSpectrum& u, double L, double window_step = 0.0) {
    if (!(L > 0.0)) throw std::invalid_argument("window length must be positive");
    if (u.levels.size() < 2 || L > u.span()) throw std::invalid_argument("window length exceeds the spectrum span");
    const double step = window_step > 0.0 ? window_step : 0.25 * L;
    const auto& e = u.levels;
    std::vector<double> values;
    for (double start = e.front(); start + L <= e.back() + 1e-12; start += step) {
        const auto lo = std::upper_bound(e.begin(), e.end(), start);
        const auto hi = std::upper_bound(lo, e.end(), start + L);
        values.push_back(delta3_window(e.data() + (lo - e.begin()), e.data() + (hi - e.begin()), start, L));
    }
    RigidityPoint p;
    p.L = L;
    p.windows = values.size();
    p.value = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - p.value) * (v - p.value);
    var /= static_cast<double>(std::max<std::size_t>(1, values.size() - 1));
    // roughly span / L independent windows
    const double independent = std::max(1.0, u.span() / L);
    p.uncertainty = std::sqrt(var / independent);
    return p;
}

inline std::vector<RigidityPoint> delta3_curve(const UnfoldedSpectrum& u, const std::vector<double>& Ls,
                                               double window_step = 0.0) {
    std::vector<RigidityPoint> out;
    out.reserve(Ls.size());
    for (double L : Ls) out.push_back(delta3_empirical(u, L, window_step));
    return out;
}

inline double delta3_poisson(double L) { return L <= 0.0 ? 0.0 : L / 15.0; }

/// Large-L GOE rigidity, (1/pi^2) [ln(2 pi L) + gamma - 5/4 - pi^2/8].
inline double delta3_goe_asymptotic(double L) {
    const double pi = std::numbers::pi;
    return (std::log(2.0 * pi * L) + std::numbers::egamma - 1.25 - pi * pi / 8.0) / (pi * pi);
}

namespace detail {

/// Si(x): power series below 2, continued fraction for E1(ix) above.
inline double sine_integral(double x) {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    const double eps = 1e-16;
    double si = 0.0;
    if (ax < 2.0) {
        double term = ax, sum = ax;
        for (int n = 1; n < 100; ++n) {
            term *= -ax * ax / static_cast<double>((2 * n) * (2 * n + 1));
            const double add = term / static_cast<double>(2 * n + 1);
            sum += add;
            if (std::abs(add) < eps * std::abs(sum)) break;
        }
        si = sum;
    } else {
        // modified Lentz evaluation of E1(i x)
        using C = std::complex<double>;
        C b{1.0, ax};
        C c = 1.0 / 1e-300;
        C d = 1.0 / b;
        C h = d;
        for (int n = 1; n < 1000; ++n) {
            const double a = -static_cast<double>(n * n);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            const C del = c * d;
            h *= del;
            if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
        }
        h *= C{std::cos(ax), -std::sin(ax)};
        si = 0.5 * std::numbers::pi + h.imag();
    }
    return x < 0 ? -si : si;
}

/// GOE two-level cluster function Y2(r) = s(r)^2 + s'(r) int_r^inf s(t) dt,
/// s(r) = sin(pi r)/(pi r).
inline double goe_cluster(double r) {
    const double pi = std::numbers::pi;
    if (r < 1e-8) return 1.0;
    const double x = pi * r;
    const double s = std::sin(x) / x;
    const double ds = (x * std::cos(x) - std::sin(x)) / (pi * r * r);
    const double tail = 0.5 - sine_integral(x) / pi;
    return s * s + ds * tail;
}

}  // namespace detail

/// Exact GOE rigidity from the two-level cluster function,
/// L/15 - 1/(15 L^4) int_0^L (L - r)^3 (2L^2 - 9Lr - 3r^2) Y2(r) dr.
inline double delta3_goe(double L) {
    if (L <= 0.0) return 0.0;
    auto f = [L](double r) { return std::pow(L - r, 3) * (2 * L * L - 9 * L * r - 3 * r * r) * detail::goe_cluster(r); };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, L, 20, 1e-12);
    return L / 15.0 - integral / (15.0 * std::pow(L, 4));
}

/// Rigidity of independent Poisson (fraction rho1) and GOE (1 - rho1) components.
inline double delta3_br(double L, double rho1) {
    if (!(rho1 >= 0.0 && rho1 <= 1.0)) throw std::invalid_argument("rho1 must lie in [0, 1]");
    return delta3_poisson(rho1 * L) + delta3_goe((1.0 - rho1) * L);
}

}  // namespace qgraph
