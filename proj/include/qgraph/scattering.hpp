#pragma once

// Two-port scattering matrix of an open graph and the closed-graph spectrum.
//
// Waves on bond b are a_b exp(i k x) with x measured from the bond's origin,
// so the amplitude arriving at the terminal vertex is a_b exp(i k L_b). Every
// vertex scatters its incoming channels (bonds and leads) with the Neumann
// matrix sigma = 2/d - delta.

#include "qgraph/graph.hpp"
#include "qgraph/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0;  // m/s

inline double frequency_from_wavenumber(double k) { return speed_of_light * k / (2.0 * std::numbers::pi); }
inline double wavenumber_from_frequency(double nu) { return 2.0 * std::numbers::pi * nu / speed_of_light; }

/// Neumann vertex scattering matrix for a vertex of degree d.
struct VertexScattering {
    int degree = 0;
    Eigen::MatrixXd sigma;
};

inline VertexScattering neumann_sigma(int d) {
    if (d < 1) throw std::invalid_argument("vertex degree must be at least 1");
    VertexScattering vs;
    vs.degree = d;
    vs.sigma = Eigen::MatrixXd::Constant(d, d, 2.0 / d) - Eigen::MatrixXd::Identity(d, d);
    return vs;
}

namespace detail {
inline double sigma_entry(std::size_t degree, bool same_channel) {
    return 2.0 / static_cast<double>(degree) - (same_channel ? 1.0 : 0.0);
}
}  // namespace detail

/// Absorption model k -> k + i beta sqrt(k), beta in m^(-1/2).
inline cplx complexify_wavenumber(double k, double beta) {
    if (beta < 0.0) throw std::invalid_argument("absorption coefficient must be non-negative");
    if (k < 0.0) throw std::invalid_argument("wave number must be non-negative");
    return {k, beta * std::sqrt(k)};
}

struct TwoPortScattering {
    double k = 0.0;  ///< rad/m
    cplx s11, s12, s21, s22;

    double frequency() const { return frequency_from_wavenumber(k); }
    double transmission() const { return std::abs(s12); }

    Eigen::Matrix2cd matrix() const {
        Eigen::Matrix2cd m;
        m << s11, s12, s21, s22;
        return m;
    }

    /// max |(S^dagger S - I)_ij|
    double unitarity_defect() const {
        Eigen::Matrix2cd m = matrix();
        return (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    }
};

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(double k, double condition)
        : std::runtime_error("bond system is singular at k = " + std::to_string(k) +
                             " (condition estimate " + std::to_string(condition) + ")"),
          k_(k), condition_(condition) {}
    double k() const { return k_; }
    double condition() const { return condition_; }

private:
    double k_;
    double condition_;
};

/// Reusable per-graph solver for the two-port S-matrix.
///
/// The unknowns are the 2E outgoing bond amplitudes. Near bound states in the
/// continuum the system becomes rank deficient but stays consistent (the
/// trapped mode vanishes at lead vertices); those points are solved with a
/// rank-revealing factorisation, and only an inconsistent system is reported
/// as singular.
class TwoPortSolver {
public:
    static constexpr double condition_limit = 1e12;

    explicit TwoPortSolver(const MetricGraph& graph) : bonds_(directed_bonds(graph)) {
        if (graph.leads().size() != 2)
            throw std::invalid_argument("two-port scattering needs exactly 2 leads, graph has " +
                                        std::to_string(graph.leads().size()));
        lead_vertex_ = {graph.leads()[0].vertex, graph.leads()[1].vertex};
    }

    const BondSystem& bonds() const { return bonds_; }

    TwoPortScattering operator()(double k, double beta = 0.0) const {
        if (!(k > 0.0)) throw std::invalid_argument("wave number must be positive");
        const cplx kt = complexify_wavenumber(k, beta);
        const auto nb = static_cast<Eigen::Index>(bonds_.size());

        Eigen::VectorXcd phase(nb);
        for (Eigen::Index b = 0; b < nb; ++b)
            phase(b) = std::exp(cplx{0.0, 1.0} * kt * bonds_.bonds[static_cast<std::size_t>(b)].length);

        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nb, nb);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(nb, 2);
        for (std::size_t v = 0; v < bonds_.incoming.size(); ++v) {
            const auto d = bonds_.degree[v];
            for (auto b : bonds_.outgoing[v]) {
                for (auto bin : bonds_.incoming[v]) {
                    const double s = detail::sigma_entry(d, bin == BondSystem::reverse(b));
                    m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(bin)) -=
                        s * phase(static_cast<Eigen::Index>(bin));
                }
                for (auto j : bonds_.leads_at[v])
                    rhs(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) += 2.0 / static_cast<double>(d);
            }
        }

        Eigen::MatrixXcd x;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
        const double rcond = lu.rcond();
        if (rcond * condition_limit >= 1.0) {
            x = lu.solve(rhs);
        } else {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod;
            cod.setThreshold(1e-10);
            cod.compute(m);
            x = cod.solve(rhs);
            const double residual = (m * x - rhs).norm();
            if (!(residual <= 1e-9 * rhs.norm()))
                throw SingularSystemError(k, rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
        }

        cplx s[2][2];
        for (int i = 0; i < 2; ++i) {
            const auto v = lead_vertex_[static_cast<std::size_t>(i)];
            const double w = 2.0 / static_cast<double>(bonds_.degree[v]);
            for (int j = 0; j < 2; ++j) {
                cplx out = 0.0;
                for (auto bin : bonds_.incoming[v])
                    out += w * phase(static_cast<Eigen::Index>(bin)) * x(static_cast<Eigen::Index>(bin), j);
                // direct lead-to-lead term at the vertex
                for (auto lj : bonds_.leads_at[v])
                    if (static_cast<int>(lj) == j) out += w - (i == j ? 1.0 : 0.0);
                s[i][j] = out;
            }
        }
        return {k, s[0][0], s[0][1], s[1][0], s[1][1]};
    }

private:
    BondSystem bonds_;
    std::array<std::size_t, 2> lead_vertex_{};
};

inline TwoPortScattering two_port_smatrix(const MetricGraph& graph, double k, double beta = 0.0) {
    return TwoPortSolver(graph)(k, beta);
}

struct ScanDefect {
    double k = 0.0;
    std::string message;
};

/// Uniform-grid transmission scan. Points that fail are listed in `defects`
/// and left out of `k`/`values`, which always have equal length.
struct SpectrumScan {
    std::vector<double> k;
    std::vector<TwoPortScattering> values;
    double beta = 0.0;
    std::vector<ScanDefect> defects;

    std::size_t size() const { return k.size(); }

    std::vector<double> transmission() const {
        std::vector<double> t(values.size());
        std::transform(values.begin(), values.end(), t.begin(), [](const auto& s) { return s.transmission(); });
        return t;
    }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> g(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

inline SpectrumScan scan_grid(const MetricGraph& graph, const std::vector<double>& grid, double beta) {
    if (beta < 0.0) throw std::invalid_argument("absorption coefficient must be non-negative");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("k grid must be strictly increasing");
    const TwoPortSolver solver(graph);
    std::vector<std::optional<TwoPortScattering>> out(grid.size());
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            out[i] = solver(grid[i], beta);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    SpectrumScan scan;
    scan.beta = beta;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (out[i]) {
            scan.k.push_back(grid[i]);
            scan.values.push_back(*out[i]);
        } else {
            scan.defects.push_back({grid[i], errors[i]});
        }
    }
    return scan;
}

inline SpectrumScan transmission_scan(const MetricGraph& graph, double kmin, double kmax, std::size_t points,
                                      double beta = 0.0) {
    if (!(kmin > 0.0) || !(kmax > kmin)) throw std::invalid_argument("need 0 < kmin < kmax");
    return scan_grid(graph, uniform_grid(kmin, kmax, points), beta);
}

// ---------------------------------------------------------------------------
// Closed graph: U(k) = S_B D(k)
// ---------------------------------------------------------------------------

/// Bond evolution operator of the closed graph (leads ignored).
class BondEvolution {
public:
    explicit BondEvolution(const MetricGraph& graph) : bonds_(directed_bonds(graph, false)) {
        const auto nb = static_cast<Eigen::Index>(bonds_.size());
        if (nb == 0) throw std::invalid_argument("closed graph needs at least one edge");
        sb_ = Eigen::MatrixXd::Zero(nb, nb);
        lengths_.resize(nb);
        for (std::size_t v = 0; v < bonds_.incoming.size(); ++v)
            for (auto b : bonds_.outgoing[v])
                for (auto bin : bonds_.incoming[v])
                    sb_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(bin)) =
                        detail::sigma_entry(bonds_.degree[v], bin == BondSystem::reverse(b));
        for (Eigen::Index b = 0; b < nb; ++b) lengths_(b) = bonds_.bonds[static_cast<std::size_t>(b)].length;
    }

    const Eigen::MatrixXd& bond_scattering() const { return sb_; }
    double max_length() const { return lengths_.maxCoeff(); }
    double min_length() const { return lengths_.minCoeff(); }
    std::size_t size() const { return bonds_.size(); }

    Eigen::MatrixXcd matrix(double k) const {
        Eigen::VectorXcd d(lengths_.size());
        for (Eigen::Index b = 0; b < d.size(); ++b) d(b) = std::exp(cplx{0.0, k * lengths_(b)});
        return sb_.cast<cplx>() * d.asDiagonal();
    }

    /// Eigenphases in (-pi, pi], ascending.
    std::vector<double> phases(double k) const {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(matrix(k), false);
        std::vector<double> p(static_cast<std::size_t>(es.eigenvalues().size()));
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::arg(es.eigenvalues()(static_cast<Eigen::Index>(i)));
        std::sort(p.begin(), p.end());
        return p;
    }

private:
    BondSystem bonds_;
    Eigen::MatrixXd sb_;
    Eigen::VectorXd lengths_;
};

inline std::vector<double> eigenphases(const MetricGraph& graph, double k) { return BondEvolution(graph).phases(k); }

struct EigenvalueList {
    std::vector<double> k;                        ///< ascending, repeated for multiplicity
    std::vector<std::size_t> unresolved;          ///< indices of roots closer than the tolerance to a neighbour
    double k_max_scanned = 0.0;
};

struct ClosedSpectrumOptions {
    double k_min = 1e-6;
    double k_max = 0.0;               ///< 0 => derived from target_count
    std::size_t target_count = 0;     ///< 0 => everything up to k_max
    double rel_tol = 1e-12;
    double phase_step = 0.02;         ///< max eigenphase advance per scan step, radians
    std::size_t chunks = 64;          ///< independent subintervals
};

namespace detail {

// Roots in [a, b] where eigenphases cross zero. Eigenphases of S_B D(k)
// advance monotonically at speeds between min and max bond length, so with a
// window (0, W] whose top edge is clear of phases at k = a, the count of
// phases inside the window can only grow across [a, b] and every increment
// is one zero crossing.
inline void roots_in_step(const BondEvolution& u, double a, double b, double delta, double rel_tol,
                          std::vector<double>& roots, std::vector<char>& multiple) {
    const auto p0 = u.phases(a);
    double window = -1.0;
    for (double w = 1.01 * delta; w <= 1.5; w += 0.25 * delta) {
        bool clear = std::none_of(p0.begin(), p0.end(), [&](double p) { return p > w - delta && p <= w; });
        if (clear) {
            window = w;
            break;
        }
    }
    if (window < 0.0) {
        const double m = 0.5 * (a + b);
        roots_in_step(u, a, m, delta, rel_tol, roots, multiple);
        roots_in_step(u, m, b, delta, rel_tol, roots, multiple);
        return;
    }
    auto count = [&](const std::vector<double>& p) {
        return static_cast<long>(std::count_if(p.begin(), p.end(), [&](double x) { return x > 0.0 && x <= window; }));
    };
    struct Span {
        double lo, hi;
        long nlo, nhi;
    };
    std::vector<Span> stack{{a, b, count(p0), count(u.phases(b))}};
    std::vector<std::pair<double, long>> found;
    while (!stack.empty()) {
        Span s = stack.back();
        stack.pop_back();
        if (s.nhi == s.nlo) continue;
        if (s.hi - s.lo <= rel_tol * s.hi) {
            found.emplace_back(0.5 * (s.lo + s.hi), s.nhi - s.nlo);
            continue;
        }
        const double mid = 0.5 * (s.lo + s.hi);
        const long nm = count(u.phases(mid));
        stack.push_back({mid, s.hi, nm, s.nhi});
        stack.push_back({s.lo, mid, s.nlo, nm});
    }
    std::sort(found.begin(), found.end());
    for (auto& [k, mult] : found) {
        for (long i = 0; i < mult; ++i) {
            roots.push_back(k);
            multiple.push_back(mult > 1 ? 1 : 0);
        }
    }
}

inline void scan_closed(const BondEvolution& u, double lo, double hi, const ClosedSpectrumOptions& opt,
                        std::vector<double>& roots, std::vector<char>& multiple) {
    const double delta = opt.phase_step;
    const double h = delta / u.max_length();
    double a = lo;
    while (a < hi) {
        const double b = std::min(hi, a + h);
        roots_in_step(u, a, b, delta, opt.rel_tol, roots, multiple);
        a = b;
    }
}

}  // namespace detail

/// Closed-graph eigenvalues k_m > 0 found by scanning the eigenphases of the
/// bond evolution operator and bisecting every zero crossing.
inline EigenvalueList closed_eigenvalues(const MetricGraph& graph, ClosedSpectrumOptions opt = {}) {
    if (!(opt.rel_tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(opt.k_min > 0.0)) throw std::invalid_argument("k_min must be positive");
    if (!(opt.phase_step > 0.0) || opt.phase_step > 0.2) throw std::invalid_argument("phase_step must be in (0, 0.2]");
    const MetricGraph closed = without_leads(graph);
    const BondEvolution u(closed);
    const double ltot = total_length(closed);

    double k_hi = opt.k_max;
    if (k_hi <= 0.0) {
        if (opt.target_count == 0) throw std::invalid_argument("need k_max or a target count");
        const double n = static_cast<double>(opt.target_count);
        k_hi = (n + 10.0 + 3.0 * std::sqrt(n)) * std::numbers::pi / ltot;
    }
    if (!(k_hi > opt.k_min)) throw std::invalid_argument("need k_max > k_min");

    EigenvalueList out;
    double lo = opt.k_min;
    for (;;) {
        const std::size_t chunks = std::max<std::size_t>(1, opt.chunks);
        std::vector<std::vector<double>> roots(chunks);
        std::vector<std::vector<char>> multiple(chunks);
        const double width = (k_hi - lo) / static_cast<double>(chunks);
        parallel_for(chunks, [&](std::size_t c) {
            const double a = lo + width * static_cast<double>(c);
            const double b = (c + 1 == chunks) ? k_hi : lo + width * static_cast<double>(c + 1);
            detail::scan_closed(u, a, b, opt, roots[c], multiple[c]);
        });
        for (std::size_t c = 0; c < chunks; ++c) {
            for (std::size_t i = 0; i < roots[c].size(); ++i) {
                if (multiple[c][i]) out.unresolved.push_back(out.k.size());
                out.k.push_back(roots[c][i]);
            }
        }
        out.k_max_scanned = k_hi;
        if (opt.target_count == 0 || out.k.size() >= opt.target_count || opt.k_max > 0.0) break;
        lo = k_hi;
        k_hi += 20.0 * std::numbers::pi / ltot + 0.1 * (k_hi - opt.k_min);
    }
    if (opt.target_count > 0 && out.k.size() > opt.target_count) {
        out.k.resize(opt.target_count);
        std::erase_if(out.unresolved, [&](std::size_t i) { return i >= opt.target_count; });
    }
    // roots from adjacent steps closer than the tolerance
    for (std::size_t i = 1; i < out.k.size(); ++i) {
        if (out.k[i] - out.k[i - 1] <= opt.rel_tol * out.k[i] * 2.0) {
            if (std::find(out.unresolved.begin(), out.unresolved.end(), i) == out.unresolved.end())
                out.unresolved.push_back(i);
        }
    }
    std::sort(out.unresolved.begin(), out.unresolved.end());
    return out;
}

}  // namespace qgraph
