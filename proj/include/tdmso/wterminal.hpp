#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmso/assignment.hpp"
#include "tdmso/graph.hpp"

namespace tdmso {

class BadMatrix : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IncompatibleAssignment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Graph with an ascending list of distinguished terminals, plus the free-set assignment
/// restricted to it (one Selection per free variable, possibly none).
struct WTerminalGraph {
    Graph graph;
    std::vector<NodeId> terminals;
    std::vector<Selection> sets;

    std::size_t tau() const { return terminals.size(); }

    /// 0-based rank of x among the terminals, or -1.
    int rank_of(NodeId x) const {
        auto it = std::lower_bound(terminals.begin(), terminals.end(), x);
        return it != terminals.end() && *it == x ? static_cast<int>(it - terminals.begin()) : -1;
    }
};

/// Base graph: every vertex is a terminal.
inline WTerminalGraph make_base(const Graph& g, std::vector<Selection> sets = {}) {
    return WTerminalGraph{g, g.nodes(), std::move(sets)};
}

/// One row per terminal of the glued graph; entries are 1-based terminal ranks of the two
/// operands, 0 meaning "not present on that side".
struct GlueMatrix {
    std::vector<std::pair<int, int>> rows;

    std::size_t tau() const { return rows.size(); }
    friend auto operator<=>(const GlueMatrix&, const GlueMatrix&) = default;

    static GlueMatrix identity(std::size_t tau) {
        GlueMatrix m;
        for (std::size_t i = 1; i <= tau; ++i) m.rows.emplace_back(static_cast<int>(i), static_cast<int>(i));
        return m;
    }

    void validate(std::size_t tau1, std::size_t tau2) const {
        std::vector<char> seen1(tau1 + 1, 0), seen2(tau2 + 1, 0);
        for (const auto& [a, b] : rows) {
            if (a == 0 && b == 0) throw BadMatrix("glue matrix has an all-zero row");
            if (a < 0 || b < 0 || static_cast<std::size_t>(a) > tau1 || static_cast<std::size_t>(b) > tau2)
                throw BadMatrix("glue matrix entry out of range");
            if (a && seen1[a]++) throw BadMatrix("terminal " + std::to_string(a) + " repeated in column 1");
            if (b && seen2[b]++) throw BadMatrix("terminal " + std::to_string(b) + " repeated in column 2");
        }
    }
};

/// Matrix gluing a child (terminals child_bag) onto its parent's base graph (terminals parent_bag).
/// The result has terminals parent_bag.
inline GlueMatrix glue_matrix_for(const std::vector<NodeId>& child_bag, const std::vector<NodeId>& parent_bag) {
    GlueMatrix m;
    for (std::size_t r = 0; r < parent_bag.size(); ++r) {
        auto it = std::lower_bound(child_bag.begin(), child_bag.end(), parent_bag[r]);
        int a = it != child_bag.end() && *it == parent_bag[r] ? static_cast<int>(it - child_bag.begin()) + 1 : 0;
        m.rows.emplace_back(a, static_cast<int>(r) + 1);
    }
    return m;
}

/// Matrix whose result terminals are the sorted union of both terminal lists.
inline GlueMatrix union_matrix(const std::vector<NodeId>& t1, const std::vector<NodeId>& t2) {
    std::vector<NodeId> all;
    std::set_union(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(all));
    GlueMatrix m;
    for (NodeId x : all) {
        auto a = std::lower_bound(t1.begin(), t1.end(), x);
        auto b = std::lower_bound(t2.begin(), t2.end(), x);
        m.rows.emplace_back(a != t1.end() && *a == x ? static_cast<int>(a - t1.begin()) + 1 : 0,
                            b != t2.end() && *b == x ? static_cast<int>(b - t2.begin()) + 1 : 0);
    }
    return m;
}

inline std::vector<NodeId> sorted_union(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::vector<NodeId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Disjoint copies of g1 and g2 with terminals identified row-wise. Result ids: terminals 1..tau
/// in row order, then the remaining vertices of g1, then those of g2.
inline WTerminalGraph glue(const WTerminalGraph& g1, const WTerminalGraph& g2, const GlueMatrix& m) {
    m.validate(g1.tau(), g2.tau());
    if (g1.sets.size() != g2.sets.size()) throw IncompatibleAssignment("operands carry different variable counts");
    std::map<NodeId, NodeId> id1, id2;
    NodeId next = 1;
    for (const auto& [a, b] : m.rows) {
        NodeId x = next++;
        if (a) id1[g1.terminals[a - 1]] = x;
        if (b) id2[g2.terminals[b - 1]] = x;
    }
    for (NodeId x : g1.graph.nodes())
        if (!id1.count(x)) id1[x] = next++;
    for (NodeId x : g2.graph.nodes())
        if (!id2.count(x)) id2[x] = next++;

    for (const auto& [a, b] : m.rows) {
        if (!a || !b) continue;
        NodeId x = g1.terminals[a - 1], y = g2.terminals[b - 1];
        if (g1.graph.vertex_labels(x) != g2.graph.vertex_labels(y))
            throw IncompatibleAssignment("identified terminals carry different labels");
        if (g1.graph.vertex_weight(x) != g2.graph.vertex_weight(y))
            throw IncompatibleAssignment("identified terminals carry different weights");
    }

    GraphBuilder b;
    for (const auto& [x, nx] : id1) b.add_node(nx, g1.graph.vertex_labels(x), g1.graph.vertex_weight(x));
    for (const auto& [y, ny] : id2)
        if (!b.has_node(ny)) b.add_node(ny, g2.graph.vertex_labels(y), g2.graph.vertex_weight(y));

    std::map<Edge, Edge> side1_edge;  // new edge -> original g1 edge
    for (const Edge& e : g1.graph.edges()) {
        Edge ne(id1[e.u], id1[e.v]);
        b.add_edge(ne.u, ne.v, g1.graph.edge_labels(e), g1.graph.edge_weight(e));
        side1_edge[ne] = e;
    }
    std::map<Edge, Edge> side2_edge;
    for (const Edge& e : g2.graph.edges()) {
        Edge ne(id2[e.u], id2[e.v]);
        side2_edge[ne] = e;
        auto it = side1_edge.find(ne);
        if (it != side1_edge.end()) {
            if (g1.graph.edge_labels(it->second) != g2.graph.edge_labels(e) ||
                g1.graph.edge_weight(it->second) != g2.graph.edge_weight(e))
                throw IncompatibleAssignment("identified edge carries different labels or weights");
            continue;
        }
        b.add_edge(ne.u, ne.v, g2.graph.edge_labels(e), g2.graph.edge_weight(e));
    }

    WTerminalGraph out;
    out.graph = b.build(64);
    for (std::size_t i = 1; i <= m.tau(); ++i) out.terminals.push_back(static_cast<NodeId>(i));

    for (std::size_t k = 0; k < g1.sets.size(); ++k) {
        std::set<NodeId> vs;
        std::set<Edge> es;
        std::set<NodeId> v1, v2;
        std::set<Edge> e1, e2;
        for (NodeId x : g1.sets[k].vertices) v1.insert(id1.at(x));
        for (NodeId x : g2.sets[k].vertices) v2.insert(id2.at(x));
        for (const Edge& e : g1.sets[k].edges) e1.insert(Edge(id1.at(e.u), id1.at(e.v)));
        for (const Edge& e : g2.sets[k].edges) e2.insert(Edge(id2.at(e.u), id2.at(e.v)));
        for (const auto& [a, bb] : m.rows) {
            if (!a || !bb) continue;
            NodeId x = id1[g1.terminals[a - 1]];
            if (v1.count(x) != v2.count(x)) throw IncompatibleAssignment("assignments disagree on an identified terminal");
        }
        for (const auto& [ne, orig] : side1_edge)
            if (side2_edge.count(ne) && e1.count(ne) != e2.count(ne))
                throw IncompatibleAssignment("assignments disagree on an identified edge");
        vs.insert(v1.begin(), v1.end());
        vs.insert(v2.begin(), v2.end());
        es.insert(e1.begin(), e1.end());
        es.insert(e2.begin(), e2.end());
        out.sets.push_back(Selection{{vs.begin(), vs.end()}, {es.begin(), es.end()}});
    }
    return out;
}

/// Pair index of 0-based terminal ranks i < j among tau terminals.
inline int pair_index(int i, int j, int tau) {
    if (i > j) std::swap(i, j);
    return i * (2 * tau - i - 1) / 2 + (j - i - 1);
}

/// Inverse of pair_index.
inline std::pair<int, int> pair_of(int p, int tau) {
    for (int i = 0; i < tau; ++i) {
        int row = tau - i - 1;
        if (p < row) return {i, i + 1 + p};
        p -= row;
    }
    throw std::out_of_range("pair index out of range");
}

}  // namespace tdmso
