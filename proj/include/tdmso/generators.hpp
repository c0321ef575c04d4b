#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tdmso/treedepth.hpp"

namespace tdmso {

class UnknownGenerator : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline Graph make_path(std::size_t n) {
    GraphBuilder b;
    for (NodeId i = 1; i <= n; ++i) b.add_node(i);
    for (NodeId i = 1; i < n; ++i) b.add_edge(i, i + 1);
    return b.build();
}

inline Graph make_cycle(std::size_t n) {
    if (n < 3) throw GraphError("a cycle needs at least 3 nodes");
    GraphBuilder b;
    for (NodeId i = 1; i <= n; ++i) b.add_node(i);
    for (NodeId i = 1; i <= n; ++i) b.add_edge(i, i % n + 1);
    return b.build();
}

inline Graph make_complete(std::size_t n) {
    GraphBuilder b;
    for (NodeId i = 1; i <= n; ++i) b.add_node(i);
    for (NodeId i = 1; i <= n; ++i)
        for (NodeId j = i + 1; j <= n; ++j) b.add_edge(i, j);
    return b.build();
}

/// K_{1,n}: centre 1, leaves 2..n+1.
inline Graph make_star(std::size_t n) {
    GraphBuilder b;
    for (NodeId i = 1; i <= n + 1; ++i) b.add_node(i);
    for (NodeId i = 2; i <= n + 1; ++i) b.add_edge(1, i);
    return b.build();
}

struct GeneratedTd {
    Graph graph;
    /// The generating tree; an elimination forest of `graph` of depth at most d.
    EliminationForest forest;
};

/// Random tree of depth at most d on n nodes, all tree edges, plus each other ancestor-descendant
/// edge with probability 1/2. Ids are a random permutation of 1..n.
inline GeneratedTd random_td_with_forest(int d, std::size_t n, std::uint64_t seed) {
    if (d < 1 || n < 1) throw std::invalid_argument("random_td needs d >= 1 and n >= 1");
    std::mt19937_64 rng(seed);
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::size_t> parent(n, 0);
    std::vector<int> depth(n, 1);
    std::vector<std::size_t> open;  // positions whose depth is below d
    if (d > 1) open.push_back(0);
    for (std::size_t k = 1; k < n; ++k) {
        if (open.empty()) throw std::invalid_argument("depth 1 allows only a single node");
        std::size_t p = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        parent[k] = p;
        depth[k] = depth[p] + 1;
        if (depth[k] < d) open.push_back(k);
    }
    GraphBuilder b;
    for (std::size_t k = 0; k < n; ++k) b.add_node(ids[k]);
    std::bernoulli_distribution coin(0.5);
    GeneratedTd out;
    for (std::size_t k = 0; k < n; ++k) {
        out.forest.parent[ids[k]] = k == 0 ? ids[0] : ids[parent[k]];
        if (k == 0) continue;
        b.add_edge(ids[k], ids[parent[k]]);
        for (std::size_t a = parent[parent[k]], prev = parent[k]; prev != 0; prev = a, a = parent[a])
            if (coin(rng)) b.add_edge(ids[k], ids[a]);
    }
    out.forest.recompute_depths();
    out.graph = b.build();
    return out;
}

inline Graph random_td(int d, std::size_t n, std::uint64_t seed) { return random_td_with_forest(d, n, seed).graph; }

/// G(n, q) on ids 1..n.
inline Graph random_gnp(std::size_t n, double q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(q);
    GraphBuilder b;
    for (NodeId i = 1; i <= n; ++i) b.add_node(i);
    for (NodeId i = 1; i <= n; ++i)
        for (NodeId j = i + 1; j <= n; ++j)
            if (coin(rng)) b.add_edge(i, j);
    return b.build();
}

/// Copy of g with vertex and edge weights drawn uniformly from [lo, hi].
inline Graph with_random_weights(const Graph& g, Weight lo, Weight hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Weight> dist(lo, hi);
    GraphBuilder b;
    for (NodeId x : g.nodes()) b.add_node(x, g.vertex_labels(x), dist(rng));
    for (const Edge& e : g.edges()) b.add_edge(e.u, e.v, g.edge_labels(e), dist(rng));
    return b.build();
}

/// Generator by name: path, cycle, complete, star take n; random_td takes d, n and the seed.
inline Graph generate(const std::string& name, const std::vector<long long>& params, std::uint64_t seed) {
    auto need = [&](std::size_t k) {
        if (params.size() != k)
            throw std::invalid_argument("generator " + name + " takes " + std::to_string(k) + " parameter(s)");
        for (long long v : params)
            if (v < 0) throw std::invalid_argument("generator parameters must be non-negative");
    };
    if (name == "path") return need(1), make_path(params[0]);
    if (name == "cycle") return need(1), make_cycle(params[0]);
    if (name == "complete") return need(1), make_complete(params[0]);
    if (name == "star") return need(1), make_star(params[0]);
    if (name == "random_td") return need(2), random_td(static_cast<int>(params[0]), params[1], seed);
    throw UnknownGenerator("unknown generator '" + name + "'");
}

}  // namespace tdmso
