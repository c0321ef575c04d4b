#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tdmso/graph.hpp"

namespace tdmso {

using BigInt = boost::multiprecision::cpp_int;

/// Value of one variable: a vertex, an edge, a vertex set or an edge set.
using AssignmentValue = std::variant<NodeId, Edge, std::vector<NodeId>, std::vector<Edge>>;
using Assignment = std::map<std::string, AssignmentValue>;

/// A vertex set or an edge set, kept sorted.
struct Selection {
    std::vector<NodeId> vertices;
    std::vector<Edge> edges;

    bool empty() const { return vertices.empty() && edges.empty(); }
    friend bool operator==(const Selection&, const Selection&) = default;
};

inline Weight selection_weight(const Graph& g, const Selection& s) {
    Weight w = 0;
    for (NodeId x : s.vertices) w += g.vertex_weight(x);
    for (const Edge& e : s.edges) w += g.edge_weight(e);
    return w;
}

}  // namespace tdmso
