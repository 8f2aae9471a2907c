#pragma once

// Independent reference solutions used to cross-check the bond solver:
// closed-form polygon transmissions and a vertex-value formulation of the
// same Neumann boundary-value problem.

#include "qgraph/graph.hpp"
#include "qgraph/scattering.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qgraph::oracle {

/// Half-width of the band excluded around removable singularities, in kl.
inline constexpr double guard_band = 1e-6;

namespace detail {
inline void check_guard(double kl, double period) {
    double r = std::fmod(kl, period);
    if (r < 0) r += period;
    if (std::min(r, period - r) <= guard_band)
        throw std::domain_error("kl is within the guard band of a removable singularity");
}
}  // namespace detail

/// Closed-form transmission amplitude of a triangle with two leads on
/// neighbouring vertices, z = exp(i kl). This expression carries the
/// opposite overall phase to the lead convention used by TwoPortSolver,
/// so S21 = -t_c3.
inline cplx t_c3(double kl) {
    detail::check_guard(kl, 2.0 * std::numbers::pi);
    const cplx z = std::exp(cplx{0.0, kl});
    const cplx z2 = z * z, z3 = z2 * z, z4 = z3 * z, z6 = z3 * z3;
    return 4.0 * z * (z3 - 1.0) * (z + 1.0) / (9.0 - z2 - 8.0 * z3 - z4 + z6);
}

/// Square counterpart of t_c3; S21 = -t_c4. Numerator and denominator also
/// vanish together at z = -1, so the guard applies at every multiple of pi.
inline cplx t_c4(double kl) {
    detail::check_guard(kl, std::numbers::pi);
    const cplx z = std::exp(cplx{0.0, kl});
    const cplx z2 = z * z, z4 = z2 * z2, z6 = z4 * z2, z8 = z4 * z4;
    return 4.0 * z * (z4 - 1.0) * (z2 + 1.0) / (9.0 - z2 - 8.0 * z4 - z6 + z8);
}

/// Minimum |sin(k l_e)| allowed by the vertex-value solver.
inline constexpr double excluded_set_margin = 1e-6;

/// Two-port S-matrix from vertex values.
///
/// On an edge of length l between u and v the field is
///   psi(x) = [psi_u sin(k(l - x)) + psi_v sin(kx)] / sin(kl),
/// and on a lead psi = in exp(-ikx) + out exp(ikx). Current conservation at
/// each vertex gives one equation per vertex value; out = psi_v - in.
inline TwoPortScattering independent_solver(const MetricGraph& graph, double k, double beta = 0.0) {
    if (graph.leads().size() != 2) throw std::invalid_argument("independent solver needs exactly 2 leads");
    if (!(k > 0.0)) throw std::invalid_argument("wave number must be positive");
    const cplx kt = complexify_wavenumber(k, beta);
    if (beta == 0.0) {
        for (const auto& e : graph.edges())
            if (std::abs(std::sin(k * e.length)) < excluded_set_margin)
                throw std::domain_error("k is too close to a zero of sin(k l) on edge '" + e.id + "'");
    }

    const auto nv = static_cast<Eigen::Index>(graph.vertex_count());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nv, nv);
    for (const auto& e : graph.edges()) {
        const cplx s = std::sin(kt * e.length);
        const cplx c = std::cos(kt * e.length);
        const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
        // outgoing derivative at each end, divided by k
        a(u, u) -= c / s;
        a(u, v) += 1.0 / s;
        a(v, v) -= c / s;
        a(v, u) += 1.0 / s;
    }
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(nv, 2);
    for (std::size_t j = 0; j < 2; ++j) {
        const auto v = static_cast<Eigen::Index>(graph.leads()[j].vertex);
        a(v, v) += cplx{0.0, 1.0};
        rhs(v, static_cast<Eigen::Index>(j)) += cplx{0.0, 2.0};
    }
    Eigen::MatrixXcd psi = a.fullPivLu().solve(rhs);

    cplx s[2][2];
    for (int i = 0; i < 2; ++i) {
        const auto v = static_cast<Eigen::Index>(graph.leads()[static_cast<std::size_t>(i)].vertex);
        for (int j = 0; j < 2; ++j) s[i][j] = psi(v, j) - (i == j ? 1.0 : 0.0);
    }
    return {k, s[0][0], s[0][1], s[1][0], s[1][1]};
}

}  // namespace qgraph::oracle
