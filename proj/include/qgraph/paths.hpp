#pragma once

// Lead-to-lead walk enumeration with vertex-scattering amplitudes.

#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

struct PathRecord {
    std::vector<std::size_t> vertices;  ///< visited vertices, input lead vertex first
    std::vector<std::size_t> bonds;     ///< traversed directed bonds
    double length = 0.0;                ///< meters
    double amplitude = 0.0;

    std::string label(const MetricGraph& g) const {
        std::string s;
        for (auto v : vertices) s += g.vertices()[v];
        return s;
    }
};

struct PathEnumeration {
    std::vector<PathRecord> paths;
    bool partial = false;  ///< node budget exhausted
    std::uint64_t nodes_visited = 0;
};

struct PathOptions {
    std::uint64_t node_budget = 50'000'000;
    double length_tolerance = 1e-9;  ///< meters
};

/// All walks from the lead-1 vertex to the lead-2 vertex of total length
/// <= max_length. Each vertex passage contributes 2/d, minus 1 on
/// backscattering; walks with a zero factor are dropped. Sorted by length,
/// then by vertex-name sequence.
inline PathEnumeration enumerate_paths(const MetricGraph& g, double max_length, const PathOptions& opt = {}) {
    if (!std::isfinite(max_length) || max_length < 0.0) throw std::invalid_argument("path length bound must be finite");
    if (g.leads().size() != 2) throw std::invalid_argument("path enumeration needs exactly 2 leads");
    const auto bs = directed_bonds(g);
    const std::size_t in = g.leads()[0].vertex;
    const std::size_t out = g.leads()[1].vertex;
    const double bound = max_length + opt.length_tolerance;

    PathEnumeration res;
    PathRecord cur;
    cur.vertices.push_back(in);

    if (in == out) res.paths.push_back({{in}, {}, 0.0, 2.0 / static_cast<double>(bs.degree[in])});

    // depth-first over bonds leaving the current vertex; `arrived` is the
    // bond just traversed (none at the start)
    auto recurse = [&](auto&& self, std::size_t vertex, const std::size_t* arrived, double length,
                       double amplitude) -> void {
        const double d = static_cast<double>(bs.degree[vertex]);
        for (std::size_t b : bs.outgoing[vertex]) {
            if (res.partial) return;
            double factor = 2.0 / d;
            if (arrived && b == BondSystem::reverse(*arrived)) factor -= 1.0;
            if (factor == 0.0) continue;
            const auto& bond = bs.bonds[b];
            const double len = length + bond.length;
            if (len > bound) continue;
            if (++res.nodes_visited > opt.node_budget) {
                res.partial = true;
                return;
            }
            const double amp = amplitude * factor;
            cur.vertices.push_back(bond.terminal);
            cur.bonds.push_back(b);
            if (bond.terminal == out) {
                PathRecord rec = cur;
                rec.length = len;
                rec.amplitude = amp * 2.0 / static_cast<double>(bs.degree[out]);
                res.paths.push_back(std::move(rec));
            }
            self(self, bond.terminal, &b, len, amp);
            cur.vertices.pop_back();
            cur.bonds.pop_back();
        }
    };
    recurse(recurse, in, nullptr, 0.0, 1.0);

    const auto& names = g.vertices();
    std::sort(res.paths.begin(), res.paths.end(), [&](const PathRecord& a, const PathRecord& b) {
        if (std::abs(a.length - b.length) > opt.length_tolerance) return a.length < b.length;
        return std::lexicographical_compare(a.vertices.begin(), a.vertices.end(), b.vertices.begin(), b.vertices.end(),
                                            [&](std::size_t x, std::size_t y) { return names[x] < names[y]; });
    });
    return res;
}

struct PathGroup {
    double length = 0.0;  ///< meters
    std::vector<PathRecord> members;
    double amplitude = 0.0;  ///< summed member amplitudes
};

/// Groups sorted paths whose lengths agree within `tolerance` meters.
inline std::vector<PathGroup> group_paths(const std::vector<PathRecord>& paths, double tolerance = 1e-9) {
    std::vector<PathGroup> groups;
    for (const auto& p : paths) {
        if (groups.empty() || std::abs(p.length - groups.back().length) > tolerance) {
            groups.push_back({p.length, {}, 0.0});
        }
        groups.back().members.push_back(p);
        groups.back().amplitude += p.amplitude;
    }
    return groups;
}

struct PeakPrediction {
    double length = 0.0;      ///< meters
    std::size_t paths = 0;
    double ratio = 0.0;       ///< summed amplitude relative to the input
    double volts = 0.0;       ///< ratio times the input amplitude
};

inline std::vector<PeakPrediction> predict_peak_ratios(const std::vector<PathGroup>& groups, double input_amplitude) {
    if (groups.empty()) throw std::invalid_argument("no path groups");
    std::vector<PeakPrediction> out;
    for (const auto& g : groups) out.push_back({g.length, g.members.size(), g.amplitude, g.amplitude * input_amplitude});
    return out;
}

struct CrossRatio {
    double length = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
};

/// Group-amplitude ratios a/b at lengths present in both lists.
inline std::vector<CrossRatio> cross_network_ratios(const std::vector<PathGroup>& a, const std::vector<PathGroup>& b,
                                                    double tolerance = 1e-9) {
    if (a.empty() || b.empty()) throw std::invalid_argument("no path groups");
    std::vector<CrossRatio> out;
    for (const auto& ga : a)
        for (const auto& gb : b)
            if (std::abs(ga.length - gb.length) <= tolerance)
                out.push_back({ga.length, ga.amplitude, gb.amplitude, ga.amplitude / gb.amplitude});
    return out;
}

}  // namespace qgraph
