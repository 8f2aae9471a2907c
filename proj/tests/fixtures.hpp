#pragma once

// Graphs shared by the test suites.

#include "qgraph/graph.hpp"

#include <cmath>
#include <numbers>

namespace fixtures {

inline qgraph::MetricGraph c3c4c3(double l, double lc) {
    return qgraph::build_polygon_chain({{3, 4, 3}, {l, l, l}, lc});
}

inline qgraph::MetricGraph c4c3c4(double l, double lc) {
    return qgraph::build_polygon_chain({{4, 3, 4}, {l, l, l}, lc});
}

/// Triangle, square and triangle with edges l/e, l/sqrt3, l/sqrt5 joined by l/pi.
inline qgraph::MetricGraph c3c4c3prime(double l = 0.25) {
    return qgraph::build_polygon_chain(
        {{3, 4, 3}, {l / std::numbers::e, l / std::sqrt(3.0), l / std::sqrt(5.0)}, l / std::numbers::pi});
}

inline qgraph::MetricGraph single_polygon(int n, double l) { return qgraph::build_polygon_chain({{n}, {l}, 0.0}); }

/// Two lead vertices joined by one edge.
inline qgraph::MetricGraph delay_line(double length) {
    return qgraph::MetricGraph({"in", "out"}, {{"e", 0, 1, length}}, {{"L1", 0}, {"L2", 1}});
}

/// C3C4C3 with a dead-end stub of length `stub` hung off the middle of edge "ab".
inline qgraph::MetricGraph c3c4c3_with_stub(double l, double stub) {
    auto g = qgraph::split_edge(c3c4c3(l, l), "ab", 0.4 * l);
    auto vertices = g.vertices();
    auto edges = g.edges();
    const auto mid = g.vertex_index("ab#split");
    vertices.push_back("tip");
    edges.push_back({"stub", mid, vertices.size() - 1, stub});
    return qgraph::MetricGraph(vertices, edges, g.leads());
}

}  // namespace fixtures
