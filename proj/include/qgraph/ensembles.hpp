#pragma once

// Random level sequences with unit mean spacing: Poisson, GOE and
// Berry-Robnik superpositions.

#include "qgraph/spectral_stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace qgraph::ensembles {

using Rng = std::mt19937_64;

/// n levels with independent exponential spacings of mean `mean_spacing`.
inline std::vector<double> poisson_levels(std::size_t n, Rng& rng, double mean_spacing = 1.0) {
    std::exponential_distribution<double> gap(1.0 / mean_spacing);
    std::vector<double> out(n);
    double x = 0.0;
    for (auto& e : out) e = (x += gap(rng));
    return out;
}

/// n unfolded GOE levels with unit mean spacing, taken from the bulk of a
/// tridiagonal beta = 1 Hermite matrix and unfolded with the semicircle law.
inline std::vector<double> goe_levels(std::size_t n, Rng& rng) {
    if (n == 0) return {};
    // keep the central 60% where the semicircle unfolding is accurate
    const auto dim = static_cast<Eigen::Index>(std::ceil(static_cast<double>(n) / 0.6)) + 2;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd diag(dim);
    Eigen::VectorXd sub(dim - 1);
    for (Eigen::Index i = 0; i < dim; ++i) diag(i) = normal(rng);  // N(0, 2) / sqrt(2)
    for (Eigen::Index i = 0; i < dim - 1; ++i) {
        std::chi_squared_distribution<double> chi2(static_cast<double>(dim - 1 - i));
        sub(i) = std::sqrt(chi2(rng) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& lambda = solver.eigenvalues();

    const double nd = static_cast<double>(dim);
    const double r2 = 2.0 * nd;
    const double r = std::sqrt(r2);
    auto staircase = [&](double x) {
        x = std::clamp(x, -r, r);
        return nd * (0.5 + (x * std::sqrt(r2 - x * x) + r2 * std::asin(x / r)) / (std::numbers::pi * r2));
    };
    const auto first = (dim - static_cast<Eigen::Index>(n)) / 2;
    std::vector<double> out(n);
    const double origin = staircase(lambda(first));
    for (std::size_t i = 0; i < n; ++i) out[i] = staircase(lambda(first + static_cast<Eigen::Index>(i))) - origin;
    return out;
}

/// Independent superposition of a Poisson sequence with density rho1 and a
/// GOE sequence with density 1 - rho1; about n levels on [0, n).
inline std::vector<double> berry_robnik_levels(std::size_t n, double rho1, Rng& rng) {
    if (!(rho1 >= 0.0 && rho1 <= 1.0)) throw std::invalid_argument("rho1 must lie in [0, 1]");
    const double span = static_cast<double>(n);
    std::vector<double> out;
    if (rho1 > 0.0) {
        std::exponential_distribution<double> gap(rho1);
        for (double x = gap(rng); x < span; x += gap(rng)) out.push_back(x);
    }
    const double rho2 = 1.0 - rho1;
    if (rho2 > 0.0) {
        const auto m = static_cast<std::size_t>(std::ceil(rho2 * span)) + 1;
        const auto g = goe_levels(m, rng);
        std::uniform_real_distribution<double> shift(0.0, 1.0);
        const double offset = shift(rng);
        for (double e : g) {
            const double x = (e + offset) / rho2;
            if (x < span) out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Independent spacings drawn from the Berry-Robnik density by inverting its
/// cumulative distribution.
inline std::vector<double> berry_robnik_spacings(std::size_t n, double rho1, Rng& rng) {
    if (!(rho1 >= 0.0 && rho1 <= 1.0)) throw std::invalid_argument("rho1 must lie in [0, 1]");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& s : out) {
        const double target = u(rng);
        double lo = 0.0, hi = 1.0;
        while (cdf_berry_robnik(hi, rho1) < target) hi *= 2.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf_berry_robnik(mid, rho1) < target ? lo : hi) = mid;
        }
        s = 0.5 * (lo + hi);
    }
    return out;
}

inline UnfoldedSpectrum as_spectrum(std::vector<double> levels, std::string source) {
    UnfoldedSpectrum u;
    u.levels = std::move(levels);
    u.total_length = 0.0;
    u.source = std::move(source);
    return u;
}

}  // namespace qgraph::ensembles
