#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdmso {

/// Node identifiers are positive integers; they double as CONGEST identifiers.
using NodeId = std::uint32_t;
using Weight = std::int64_t;
using LabelSet = std::set<std::string>;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Undirected edge, always stored with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    Edge() = default;
    Edge(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}

    bool has(NodeId x) const { return x == u || x == v; }
    NodeId other(NodeId x) const { return x == u ? v : u; }

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple labeled weighted graph. Immutable once built through GraphBuilder.
class Graph {
public:
    Graph() = default;

    std::size_t n() const { return nodes_.size(); }
    std::size_t m() const { return edges_.size(); }
    bool empty() const { return nodes_.empty(); }

    const std::vector<NodeId>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_node(NodeId x) const { return std::binary_search(nodes_.begin(), nodes_.end(), x); }

    /// Dense position of a node in nodes(); throws for unknown ids.
    std::size_t index_of(NodeId x) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
        if (it == nodes_.end() || *it != x) throw GraphError("unknown node " + std::to_string(x));
        return static_cast<std::size_t>(it - nodes_.begin());
    }

    /// Neighbors in ascending id order.
    const std::vector<NodeId>& neighbors(NodeId x) const { return adjacency_[index_of(x)]; }
    std::size_t degree(NodeId x) const { return neighbors(x).size(); }

    bool has_edge(NodeId a, NodeId b) const {
        if (a == b || !has_node(a) || !has_node(b)) return false;
        const auto& nb = adjacency_[index_of(a)];
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    const LabelSet& vertex_labels(NodeId x) const { return vertex_labels_[index_of(x)]; }
    const LabelSet& edge_labels(const Edge& e) const { return edge_labels_.at(edge_position(e)); }
    bool vertex_has_label(NodeId x, const std::string& l) const { return vertex_labels(x).count(l) > 0; }
    bool edge_has_label(const Edge& e, const std::string& l) const { return edge_labels(e).count(l) > 0; }

    /// Missing weights default to 1.
    Weight vertex_weight(NodeId x) const { return vertex_weights_[index_of(x)]; }
    Weight edge_weight(const Edge& e) const { return edge_weights_.at(edge_position(e)); }

    std::size_t edge_position(const Edge& e) const {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e)
            throw GraphError("unknown edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "}");
        return static_cast<std::size_t>(it - edges_.begin());
    }

    /// Subgraph induced by `keep` (ids not in the graph are ignored). Labels and weights carry over.
    Graph induced(const std::vector<NodeId>& keep) const;

    /// Every vertex and edge label that occurs in the graph.
    std::set<std::string> all_vertex_labels() const {
        std::set<std::string> out;
        for (const auto& s : vertex_labels_) out.insert(s.begin(), s.end());
        return out;
    }
    std::set<std::string> all_edge_labels() const {
        std::set<std::string> out;
        for (const auto& s : edge_labels_) out.insert(s.begin(), s.end());
        return out;
    }

    bool is_connected() const;

    /// Largest admissible |weight| for an n-node graph: max(n,2)^c.
    static Weight weight_bound(std::size_t n, int c = 3) {
        Weight base = static_cast<Weight>(std::max<std::size_t>(n, 2));
        Weight r = 1;
        for (int i = 0; i < c; ++i) {
            if (r > std::numeric_limits<Weight>::max() / base) return std::numeric_limits<Weight>::max();
            r *= base;
        }
        return r;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend class GraphBuilder;

    std::vector<NodeId> nodes_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<Edge> edges_;
    std::vector<LabelSet> vertex_labels_;
    std::vector<LabelSet> edge_labels_;
    std::vector<Weight> vertex_weights_;
    std::vector<Weight> edge_weights_;
};

/// Incremental construction with validation of simplicity and endpoint existence.
class GraphBuilder {
public:
    GraphBuilder& add_node(NodeId id, LabelSet labels = {}, Weight w = 1) {
        if (id == 0) throw GraphError("node ids must be positive");
        if (!nodes_.emplace(id, NodeData{std::move(labels), w}).second)
            throw GraphError("duplicate node " + std::to_string(id));
        return *this;
    }

    GraphBuilder& add_edge(NodeId a, NodeId b, LabelSet labels = {}, Weight w = 1) {
        if (a == b) throw GraphError("self-loop on node " + std::to_string(a));
        if (!nodes_.count(a) || !nodes_.count(b))
            throw GraphError("edge {" + std::to_string(a) + "," + std::to_string(b) + "} has an undeclared endpoint");
        if (!edges_.emplace(Edge(a, b), EdgeData{std::move(labels), w}).second)
            throw GraphError("duplicate edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
        return *this;
    }

    bool has_node(NodeId id) const { return nodes_.count(id) > 0; }
    bool has_edge(NodeId a, NodeId b) const { return a != b && edges_.count(Edge(a, b)) > 0; }

    /// Builds the graph; rejects weights outside +-max(n,2)^weight_exponent.
    Graph build(int weight_exponent = 3) const {
        Graph g;
        const Weight bound = Graph::weight_bound(nodes_.size(), weight_exponent);
        for (const auto& [id, data] : nodes_) {
            if (data.weight > bound || data.weight < -bound)
                throw GraphError("weight of node " + std::to_string(id) + " exceeds the O(log n)-bit bound");
            g.nodes_.push_back(id);
            g.vertex_labels_.push_back(data.labels);
            g.vertex_weights_.push_back(data.weight);
        }
        g.adjacency_.resize(g.nodes_.size());
        for (const auto& [e, data] : edges_) {
            if (data.weight > bound || data.weight < -bound)
                throw GraphError("weight of edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                 "} exceeds the O(log n)-bit bound");
            g.edges_.push_back(e);
            g.edge_labels_.push_back(data.labels);
            g.edge_weights_.push_back(data.weight);
            g.adjacency_[g.index_of(e.u)].push_back(e.v);
            g.adjacency_[g.index_of(e.v)].push_back(e.u);
        }
        for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
        return g;
    }

private:
    struct NodeData {
        LabelSet labels;
        Weight weight;
    };
    struct EdgeData {
        LabelSet labels;
        Weight weight;
    };
    std::map<NodeId, NodeData> nodes_;
    std::map<Edge, EdgeData> edges_;
};

inline Graph Graph::induced(const std::vector<NodeId>& keep) const {
    std::vector<NodeId> ks;
    for (NodeId x : keep)
        if (has_node(x)) ks.push_back(x);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    Graph g;
    g.nodes_ = ks;
    g.adjacency_.resize(ks.size());
    for (NodeId x : ks) {
        g.vertex_labels_.push_back(vertex_labels(x));
        g.vertex_weights_.push_back(vertex_weight(x));
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        for (NodeId y : neighbors(ks[i])) {
            if (y <= ks[i] || !std::binary_search(ks.begin(), ks.end(), y)) continue;
            Edge e(ks[i], y);
            g.edges_.push_back(e);
            g.edge_labels_.push_back(edge_labels(e));
            g.edge_weights_.push_back(edge_weight(e));
            g.adjacency_[i].push_back(y);
            g.adjacency_[g.index_of(y)].push_back(ks[i]);
        }
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    // edge labels/weights were pushed in discovery order, which is already sorted by (u, v)
    for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());
    return g;
}

inline bool Graph::is_connected() const {
    if (nodes_.empty()) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (NodeId y : adjacency_[i]) {
            std::size_t j = index_of(y);
            if (!seen[j]) {
                seen[j] = 1;
                ++count;
                stack.push_back(j);
            }
        }
    }
    return count == nodes_.size();
}

}  // namespace tdmso
