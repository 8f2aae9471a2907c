#pragma once

// Metric multigraphs with attached semi-infinite leads, the polygon-chain
// builders used for the filter geometries, and the directed-bond indexing
// shared by every solver in this library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qgraph {

struct Edge {
    std::string id;
    std::size_t u = 0;
    std::size_t v = 0;
    double length = 0.0;  ///< optical length in meters

    bool is_loop() const { return u == v; }
};

struct Lead {
    std::string id;
    std::size_t vertex = 0;
};

/// Immutable metric multigraph. Parallel edges and self-loops are allowed;
/// a self-loop contributes 2 to the degree of its vertex.
class MetricGraph {
public:
    MetricGraph() = default;

    MetricGraph(std::vector<std::string> vertices, std::vector<Edge> edges, std::vector<Lead> leads)
        : vertices_(std::move(vertices)), edges_(std::move(edges)), leads_(std::move(leads)) {
        validate();
    }

    const std::vector<std::string>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Lead>& leads() const { return leads_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    /// Number of edge ends at vertex `v` (leads excluded).
    std::size_t edge_degree(std::size_t v) const {
        std::size_t d = 0;
        for (const auto& e : edges_) {
            if (e.u == v) ++d;
            if (e.v == v) ++d;
        }
        return d;
    }

    std::size_t lead_count_at(std::size_t v) const {
        return static_cast<std::size_t>(
            std::count_if(leads_.begin(), leads_.end(), [v](const Lead& l) { return l.vertex == v; }));
    }

    /// Degree seen by the Neumann condition: incident edge ends plus leads.
    std::size_t degree(std::size_t v) const { return edge_degree(v) + lead_count_at(v); }

    std::size_t vertex_index(const std::string& name) const {
        auto it = std::find(vertices_.begin(), vertices_.end(), name);
        if (it == vertices_.end()) throw std::invalid_argument("unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - vertices_.begin());
    }

    std::size_t edge_index(const std::string& id) const {
        auto it = std::find_if(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.id == id; });
        if (it == edges_.end()) throw std::invalid_argument("unknown edge '" + id + "'");
        return static_cast<std::size_t>(it - edges_.begin());
    }

    double min_edge_length() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : edges_) m = std::min(m, e.length);
        return m;
    }

    double max_edge_length() const {
        double m = 0.0;
        for (const auto& e : edges_) m = std::max(m, e.length);
        return m;
    }

private:
    void validate() const {
        if (vertices_.empty()) throw std::invalid_argument("graph has no vertices");
        {
            std::vector<std::string> names = vertices_;
            std::sort(names.begin(), names.end());
            if (std::adjacent_find(names.begin(), names.end()) != names.end())
                throw std::invalid_argument("duplicate vertex identifier");
        }
        std::vector<std::string> ids;
        for (const auto& e : edges_) {
            if (e.u >= vertices_.size() || e.v >= vertices_.size())
                throw std::invalid_argument("edge '" + e.id + "' references a missing vertex");
            if (!(e.length > 0.0) || !std::isfinite(e.length))
                throw std::invalid_argument("edge '" + e.id + "' must have a positive finite length");
            ids.push_back(e.id);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw std::invalid_argument("duplicate edge identifier");
        for (const auto& l : leads_) {
            if (l.vertex >= vertices_.size())
                throw std::invalid_argument("lead '" + l.id + "' references a missing vertex");
        }

        // connectivity by BFS over edges
        std::vector<std::vector<std::size_t>> adj(vertices_.size());
        for (const auto& e : edges_) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
        std::vector<char> seen(vertices_.size(), 0);
        std::queue<std::size_t> q;
        std::size_t start = leads_.empty() ? 0 : leads_.front().vertex;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            auto x = q.front();
            q.pop();
            for (auto y : adj[x]) {
                if (!seen[y]) {
                    seen[y] = 1;
                    q.push(y);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw std::invalid_argument("graph is not connected");
    }

    std::vector<std::string> vertices_;
    std::vector<Edge> edges_;
    std::vector<Lead> leads_;
};

/// Sum of edge lengths; leads are semi-infinite and excluded.
inline double total_length(const MetricGraph& g) {
    double s = 0.0;
    for (const auto& e : g.edges()) s += e.length;
    return s;
}

/// A graph with every edge length multiplied by `factor`.
inline MetricGraph scale_lengths(const MetricGraph& g, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    auto edges = g.edges();
    for (auto& e : edges) e.length *= factor;
    return MetricGraph(g.vertices(), std::move(edges), g.leads());
}

/// Removes the leads, leaving the closed graph.
inline MetricGraph without_leads(const MetricGraph& g) {
    return MetricGraph(g.vertices(), g.edges(), {});
}

// ---------------------------------------------------------------------------
// Polygon chains
// ---------------------------------------------------------------------------

struct PolygonChainSpec {
    std::vector<int> polygon_sizes;
    std::vector<double> polygon_edge_lengths;  ///< one per polygon, meters
    double connector_length = 0.0;             ///< l', meters
};

namespace detail {

inline std::string vertex_label(std::size_t i, std::size_t total) {
    if (total <= 26) return std::string(1, static_cast<char>('a' + i));
    return "v" + std::to_string(i);
}

inline std::string edge_label(const std::string& a, const std::string& b, std::size_t total) {
    return total <= 26 ? a + b : a + "-" + b;
}

}  // namespace detail

/// Builds a chain of regular polygons joined by connector edges.
///
/// Polygon j has vertices p_0 ... p_{n-1} around its ring. The chain enters a
/// polygon at p_0 and leaves it at p_{n-1}, so the two attachment points are
/// neighbours: the short way across is one edge, the long way n-1 edges. The
/// input lead sits on p_0 of the first polygon and the output lead on p_{n-1}
/// of the last. Vertices are labelled a, b, c, ... in build order when there
/// are at most 26 of them.
inline MetricGraph build_polygon_chain(const PolygonChainSpec& spec) {
    const auto& sizes = spec.polygon_sizes;
    if (sizes.empty()) throw std::invalid_argument("polygon chain needs at least one polygon");
    if (spec.polygon_edge_lengths.size() != sizes.size())
        throw std::invalid_argument("one edge length is required per polygon");
    for (int n : sizes)
        if (n < 3) throw std::invalid_argument("polygon size must be at least 3");
    for (double l : spec.polygon_edge_lengths)
        if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("polygon edge length must be positive");
    if (sizes.size() > 1 && (!(spec.connector_length > 0.0) || !std::isfinite(spec.connector_length)))
        throw std::invalid_argument("connector length must be positive");

    const std::size_t nv = static_cast<std::size_t>(std::accumulate(sizes.begin(), sizes.end(), 0));
    std::vector<std::string> names;
    names.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) names.push_back(detail::vertex_label(i, nv));

    std::vector<Edge> edges;
    std::vector<std::pair<std::size_t, std::size_t>> ports;  // (entry, exit) per polygon
    std::size_t base = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const auto n = static_cast<std::size_t>(sizes[j]);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a = base + i, b = base + (i + 1) % n;
            edges.push_back({detail::edge_label(names[a], names[b], nv), a, b, spec.polygon_edge_lengths[j]});
        }
        ports.emplace_back(base, base + n - 1);
        base += n;
    }
    for (std::size_t j = 0; j + 1 < sizes.size(); ++j) {
        std::size_t a = ports[j].second, b = ports[j + 1].first;
        edges.push_back({detail::edge_label(names[a], names[b], nv), a, b, spec.connector_length});
    }
    std::vector<Lead> leads{{"L1", ports.front().first}, {"L2", ports.back().second}};
    return MetricGraph(std::move(names), std::move(edges), std::move(leads));
}

/// Replaces an edge by two edges meeting at a new degree-2 vertex placed
/// `position` meters from the edge's u end.
inline MetricGraph split_edge(const MetricGraph& g, const std::string& edge_id, double position) {
    const auto idx = g.edge_index(edge_id);
    const Edge old = g.edges()[idx];
    if (!(position > 0.0) || !(position < old.length))
        throw std::invalid_argument("split position must lie strictly inside the edge");

    auto vertices = g.vertices();
    std::string name = edge_id + "#split";
    while (std::find(vertices.begin(), vertices.end(), name) != vertices.end()) name += "'";
    const std::size_t mid = vertices.size();
    vertices.push_back(name);

    std::vector<Edge> edges;
    edges.reserve(g.edge_count() + 1);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        if (i == idx) {
            edges.push_back({edge_id + ".1", old.u, mid, position});
            edges.push_back({edge_id + ".2", mid, old.v, old.length - position});
        } else {
            edges.push_back(g.edges()[i]);
        }
    }
    return MetricGraph(std::move(vertices), std::move(edges), g.leads());
}

// ---------------------------------------------------------------------------
// Directed bonds
// ---------------------------------------------------------------------------

struct Bond {
    std::size_t edge = 0;
    std::size_t origin = 0;
    std::size_t terminal = 0;
    double length = 0.0;
};

/// Directed-bond view of a graph. Bond 2i runs u->v along edge i (in sorted
/// edge-id order) and bond 2i+1 runs v->u, so reversal is `b ^ 1`.
struct BondSystem {
    std::vector<Bond> bonds;
    std::vector<std::vector<std::size_t>> incoming;  ///< per vertex, bonds terminating there
    std::vector<std::vector<std::size_t>> outgoing;  ///< per vertex, bonds originating there
    std::vector<std::vector<std::size_t>> leads_at;  ///< per vertex, lead indices
    std::vector<std::size_t> degree;                 ///< per vertex, edge ends + leads

    std::size_t size() const { return bonds.size(); }
    static std::size_t reverse(std::size_t b) { return b ^ 1U; }
};

inline BondSystem directed_bonds(const MetricGraph& g, bool include_leads = true) {
    std::vector<std::size_t> order(g.edge_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.edges()[a].id < g.edges()[b].id; });

    BondSystem bs;
    const auto nv = g.vertex_count();
    bs.incoming.resize(nv);
    bs.outgoing.resize(nv);
    bs.leads_at.resize(nv);
    bs.degree.assign(nv, 0);
    bs.bonds.reserve(2 * g.edge_count());
    for (auto ei : order) {
        const auto& e = g.edges()[ei];
        bs.bonds.push_back({ei, e.u, e.v, e.length});
        bs.bonds.push_back({ei, e.v, e.u, e.length});
    }
    for (std::size_t b = 0; b < bs.bonds.size(); ++b) {
        bs.outgoing[bs.bonds[b].origin].push_back(b);
        bs.incoming[bs.bonds[b].terminal].push_back(b);
        ++bs.degree[bs.bonds[b].origin];
    }
    if (include_leads) {
        for (std::size_t j = 0; j < g.leads().size(); ++j) {
            auto v = g.leads()[j].vertex;
            bs.leads_at[v].push_back(j);
            ++bs.degree[v];
        }
    }
    return bs;
}

}  // namespace qgraph
