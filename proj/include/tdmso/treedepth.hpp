#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <stdexcept>
#include <vector>

#include "tdmso/graph.hpp"

namespace tdmso {

class SizeLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidForest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rooted forest over graph nodes. Roots are their own parent; root depth is 1.
struct EliminationForest {
    std::map<NodeId, NodeId> parent;
    std::map<NodeId, int> depth;

    bool is_root(NodeId x) const { return parent.at(x) == x; }

    int height() const {
        int h = 0;
        for (const auto& [x, d] : depth) h = std::max(h, d);
        return h;
    }

    std::vector<NodeId> roots() const {
        std::vector<NodeId> r;
        for (const auto& [x, p] : parent)
            if (x == p) r.push_back(x);
        return r;
    }

    /// Children of every node, ascending by id.
    std::map<NodeId, std::vector<NodeId>> children() const {
        std::map<NodeId, std::vector<NodeId>> c;
        for (const auto& [x, p] : parent) {
            c[x];
            if (x != p) c[p].push_back(x);
        }
        for (auto& [x, ch] : c) std::sort(ch.begin(), ch.end());
        return c;
    }

    /// Strict ancestors of x, nearest first.
    std::vector<NodeId> ancestors(NodeId x) const {
        std::vector<NodeId> out;
        NodeId cur = x;
        for (std::size_t guard = 0; guard <= parent.size(); ++guard) {
            NodeId p = parent.at(cur);
            if (p == cur) return out;
            out.push_back(p);
            cur = p;
        }
        throw InvalidForest("parent relation has a cycle");
    }

    bool is_ancestor(NodeId a, NodeId x) const {
        for (NodeId y : ancestors(x))
            if (y == a) return true;
        return false;
    }

    /// Recomputes depths from the parent map.
    void recompute_depths() {
        depth.clear();
        for (const auto& [x, p] : parent) depth[x] = static_cast<int>(ancestors(x).size()) + 1;
    }
};

/// Tree decomposition: a rooted forest over bag indices and one sorted bag per index.
struct TreeDecomposition {
    std::map<NodeId, NodeId> tree;
    std::map<NodeId, std::vector<NodeId>> bags;

    int width() const {
        std::size_t w = 0;
        for (const auto& [i, b] : bags) w = std::max(w, b.size());
        return static_cast<int>(w) - 1;
    }

    std::vector<NodeId> roots() const {
        std::vector<NodeId> r;
        for (const auto& [i, p] : tree)
            if (i == p) r.push_back(i);
        return r;
    }

    std::map<NodeId, std::vector<NodeId>> children() const {
        std::map<NodeId, std::vector<NodeId>> c;
        for (const auto& [i, p] : tree) {
            c[i];
            if (i != p) c[p].push_back(i);
        }
        for (auto& [i, ch] : c) std::sort(ch.begin(), ch.end());
        return c;
    }

    /// Bag indices ordered so that every child precedes its parent.
    std::vector<NodeId> post_order() const {
        auto ch = children();
        std::vector<NodeId> out;
        std::vector<std::pair<NodeId, bool>> stack;
        for (auto it = tree.rbegin(); it != tree.rend(); ++it)
            if (it->first == it->second) stack.emplace_back(it->first, false);
        while (!stack.empty()) {
            auto [x, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                out.push_back(x);
                continue;
            }
            stack.emplace_back(x, true);
            const auto& c = ch[x];
            for (auto it = c.rbegin(); it != c.rend(); ++it) stack.emplace_back(*it, false);
        }
        return out;
    }
};

/// Maximal connected subsets of g[restrict], each sorted, listed by smallest member.
inline std::vector<std::vector<NodeId>> connected_components(const Graph& g, const std::vector<NodeId>& restrict) {
    std::set<NodeId> allowed(restrict.begin(), restrict.end());
    std::set<NodeId> seen;
    std::vector<std::vector<NodeId>> out;
    for (NodeId s : allowed) {
        if (seen.count(s)) continue;
        std::vector<NodeId> comp{s}, stack{s};
        seen.insert(s);
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            for (NodeId y : g.neighbors(x)) {
                if (allowed.count(y) && seen.insert(y).second) {
                    comp.push_back(y);
                    stack.push_back(y);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

inline std::vector<std::vector<NodeId>> connected_components(const Graph& g) {
    return connected_components(g, g.nodes());
}

/// True iff f is a well-formed forest on exactly g's nodes with the ancestor property on every edge.
inline bool check_elimination_forest(const Graph& g, const EliminationForest& f) {
    if (f.parent.size() != g.n()) return false;
    for (NodeId x : g.nodes()) {
        auto it = f.parent.find(x);
        if (it == f.parent.end() || !g.has_node(it->second)) return false;
    }
    try {
        for (NodeId x : g.nodes()) {
            auto d = f.depth.find(x);
            if (d == f.depth.end() || d->second != static_cast<int>(f.ancestors(x).size()) + 1) return false;
        }
    } catch (const InvalidForest&) {
        return false;
    }
    for (const Edge& e : g.edges())
        if (!f.is_ancestor(e.u, e.v) && !f.is_ancestor(e.v, e.u)) return false;
    return true;
}

namespace detail {

// Bitmask treedepth over at most 12 vertices; memo[mask] caches td(G[mask]).
class TreedepthSolver {
public:
    explicit TreedepthSolver(const Graph& g) : g_(g), n_(g.n()), adj_(n_, 0) {
        for (const Edge& e : g.edges()) {
            auto a = g.index_of(e.u), b = g.index_of(e.v);
            adj_[a] |= 1u << b;
            adj_[b] |= 1u << a;
        }
    }

    int td(std::uint32_t mask) {
        if (mask == 0) return 0;
        if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
        int result;
        auto comps = components(mask);
        if (comps.size() > 1) {
            result = 0;
            for (auto c : comps) result = std::max(result, td(c));
        } else if ((mask & (mask - 1)) == 0) {
            result = 1;
            best_root_[mask] = __builtin_ctz(mask);
        } else {
            result = std::numeric_limits<int>::max();
            for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
                int v = __builtin_ctz(rest);
                int cand = 1 + td(mask & ~(1u << v));
                if (cand < result) {
                    result = cand;
                    best_root_[mask] = v;
                }
            }
        }
        memo_[mask] = result;
        return result;
    }

    // Attach an optimal elimination forest of G[mask] below `above` (or as roots).
    void build(std::uint32_t mask, int above, EliminationForest& f) {
        if (mask == 0) return;
        auto comps = components(mask);
        if (comps.size() > 1) {
            for (auto c : comps) build(c, above, f);
            return;
        }
        td(mask);
        int v = best_root_.at(mask);
        NodeId id = g_.nodes()[v];
        f.parent[id] = above < 0 ? id : g_.nodes()[above];
        build(mask & ~(1u << v), v, f);
    }

    std::vector<std::uint32_t> components(std::uint32_t mask) const {
        std::vector<std::uint32_t> out;
        std::uint32_t left = mask;
        while (left) {
            std::uint32_t comp = left & (~left + 1), frontier = comp;
            while (frontier) {
                std::uint32_t next = 0;
                for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj_[__builtin_ctz(f)];
                next &= mask & ~comp;
                comp |= next;
                frontier = next;
            }
            out.push_back(comp);
            left &= ~comp;
        }
        return out;
    }

private:
    const Graph& g_;
    std::size_t n_;
    std::vector<std::uint32_t> adj_;
    std::unordered_map<std::uint32_t, int> memo_;
    std::unordered_map<std::uint32_t, int> best_root_;
};

}  // namespace detail

inline constexpr std::size_t kExactTreedepthLimit = 12;

struct TreedepthResult {
    int depth = 0;
    EliminationForest forest;
};

/// Exact treedepth by vertex-removal recursion memoised on connected subsets. Refuses graphs above
/// `max_nodes` (at most 32); sparse graphs such as long paths stay cheap under a raised limit.
inline TreedepthResult exact_treedepth(const Graph& g, std::size_t max_nodes = kExactTreedepthLimit) {
    if (g.empty()) throw std::invalid_argument("exact_treedepth needs a nonempty graph");
    if (max_nodes > 32) throw std::invalid_argument("exact_treedepth works on at most 32 nodes");
    if (g.n() > max_nodes)
        throw SizeLimit("exact_treedepth limited to " + std::to_string(max_nodes) + " nodes, got " + std::to_string(g.n()));
    detail::TreedepthSolver solver(g);
    std::uint32_t all = static_cast<std::uint32_t>((std::uint64_t{1} << g.n()) - 1);
    TreedepthResult r;
    r.depth = solver.td(all);
    solver.build(all, -1, r.forest);
    r.forest.recompute_depths();
    return r;
}

/// Bag of u is u plus all its ancestors, sorted by id.
inline TreeDecomposition canonical_decomposition(const Graph& g, const EliminationForest& f) {
    if (!check_elimination_forest(g, f)) throw InvalidForest("forest is not an elimination forest of the graph");
    TreeDecomposition td;
    td.tree = f.parent;
    for (NodeId x : g.nodes()) {
        auto bag = f.ancestors(x);
        bag.push_back(x);
        std::sort(bag.begin(), bag.end());
        td.bags[x] = std::move(bag);
    }
    return td;
}

/// Vertex coverage, edge coverage, and connected occurrence subtrees.
inline bool validate_tree_decomposition(const Graph& g, const TreeDecomposition& td) {
    if (td.tree.size() != td.bags.size()) return false;
    for (const auto& [i, p] : td.tree)
        if (!td.bags.count(i) || !td.tree.count(p)) return false;
    // the index structure must be a forest
    for (const auto& [i, p] : td.tree) {
        NodeId cur = i;
        std::size_t steps = 0;
        while (td.tree.at(cur) != cur) {
            cur = td.tree.at(cur);
            if (++steps > td.tree.size()) return false;
        }
    }
    std::map<NodeId, std::vector<NodeId>> occurs;
    for (const auto& [i, bag] : td.bags) {
        if (!std::is_sorted(bag.begin(), bag.end())) return false;
        for (NodeId x : bag) {
            if (!g.has_node(x)) return false;
            occurs[x].push_back(i);
        }
    }
    for (NodeId x : g.nodes())
        if (!occurs.count(x)) return false;
    for (const Edge& e : g.edges()) {
        bool found = false;
        for (const auto& [i, bag] : td.bags)
            if (std::binary_search(bag.begin(), bag.end(), e.u) && std::binary_search(bag.begin(), bag.end(), e.v)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    // occurrences of x are connected iff exactly one occurrence has its parent outside the occurrence set
    for (const auto& [x, where] : occurs) {
        std::set<NodeId> s(where.begin(), where.end());
        int tops = 0;
        for (NodeId i : where) {
            NodeId p = td.tree.at(i);
            if (p == i || !s.count(p)) ++tops;
        }
        if (tops != 1) return false;
    }
    return true;
}

}  // namespace tdmso
