#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tdmso/predicate.hpp"

namespace tdmso {

namespace detail {

/// Union-find over small index ranges; unite reports whether the two sides were separate.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : p_(n) { std::iota(p_.begin(), p_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (p_[x] != x) x = p_[x] = p_[p_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> p_;
};

inline std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

/// Maps ranks of each side to result rows (or -1 for forgotten terminals).
struct RowMaps {
    std::vector<int> row1, row2;
    RowMaps(const GlueMatrix& m, std::size_t tau1, std::size_t tau2) : row1(tau1, -1), row2(tau2, -1) {
        for (std::size_t r = 0; r < m.rows.size(); ++r) {
            if (m.rows[r].first) row1[m.rows[r].first - 1] = static_cast<int>(r);
            if (m.rows[r].second) row2[m.rows[r].second - 1] = static_cast<int>(r);
        }
    }
};

inline bool merge_vertex_trace(std::uint64_t m1, std::uint64_t m2, const GlueMatrix& m, std::uint64_t& out) {
    out = 0;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        auto [a, b] = m.rows[r];
        bool in1 = a && (m1 >> (a - 1) & 1), in2 = b && (m2 >> (b - 1) & 1);
        if (a && b && in1 != in2) return false;
        if (in1 || in2) out |= bit(r);
    }
    return true;
}

/// Merges terminal adjacency and an edge trace over terminal pairs.
inline bool merge_edge_trace(std::uint64_t adj1, std::uint64_t m1, int tau1, std::uint64_t adj2, std::uint64_t m2,
                             int tau2, const GlueMatrix& m, std::uint64_t& adj, std::uint64_t& out) {
    adj = out = 0;
    int tau = static_cast<int>(m.rows.size());
    for (int r = 0; r < tau; ++r)
        for (int q = r + 1; q < tau; ++q) {
            auto [a1, b1] = m.rows[r];
            auto [a2, b2] = m.rows[q];
            int p1 = a1 && a2 ? pair_index(a1 - 1, a2 - 1, tau1) : -1;
            int p2 = b1 && b2 ? pair_index(b1 - 1, b2 - 1, tau2) : -1;
            bool e1 = p1 >= 0 && (adj1 >> p1 & 1), e2 = p2 >= 0 && (adj2 >> p2 & 1);
            bool in1 = e1 && (m1 >> p1 & 1), in2 = e2 && (m2 >> p2 & 1);
            if (e1 && e2 && in1 != in2) return false;
            int p = pair_index(r, q, tau);
            if (e1 || e2) adj |= bit(p);
            if (in1 || in2) out |= bit(p);
        }
    return true;
}

struct GraphView {
    const WTerminalGraph& wg;
    std::vector<int> rank;  // terminal rank per graph index, or -1

    explicit GraphView(const WTerminalGraph& w) : wg(w), rank(w.graph.n(), -1) {
        for (std::size_t r = 0; r < w.terminals.size(); ++r) rank.at(w.graph.index_of(w.terminals[r])) = static_cast<int>(r);
    }
    int tau() const { return static_cast<int>(wg.terminals.size()); }
    int rank_of(NodeId x) const { return rank[wg.graph.index_of(x)]; }
    std::uint64_t adjacency() const {
        std::uint64_t a = 0;
        for (const Edge& e : wg.graph.edges()) {
            int i = rank_of(e.u), j = rank_of(e.v);
            if (i >= 0 && j >= 0) a |= bit(pair_index(i, j, tau()));
        }
        return a;
    }
    std::uint64_t vertex_trace(const Selection& s) const {
        std::uint64_t m = 0;
        for (NodeId x : s.vertices)
            if (int r = rank_of(x); r >= 0) m |= bit(r);
        return m;
    }
    std::uint64_t edge_trace(const Selection& s) const {
        std::uint64_t m = 0;
        for (const Edge& e : s.edges) {
            int i = rank_of(e.u), j = rank_of(e.v);
            if (i >= 0 && j >= 0) m |= bit(pair_index(i, j, tau()));
        }
        return m;
    }
};

}  // namespace detail

/// Hand-written predicate whose classes are small integer payloads; payload[0] is tau and
/// payload[1] the trace of the free variable (0 when there is none).
class TablePredicate : public RegularPredicate {
public:
    using Payload = std::vector<std::uint64_t>;

    const std::vector<PredicateVar>& free_vars() const override { return vars_; }
    const std::vector<std::string>& label_vocabulary() const override { return labels_; }
    std::size_t class_count() const override { return payloads_.size(); }

    ClassId classify(const WTerminalGraph& g) override {
        check_tau(g.tau());
        if (g.sets.size() != vars_.size())
            throw std::invalid_argument("classify: expected " + std::to_string(vars_.size()) + " set assignments");
        return intern(from_graph(g));
    }

    std::optional<ClassId> try_compose(ClassId c1, ClassId c2, const GlueMatrix& m) override {
        const Payload& p1 = payloads_.at(c1);
        const Payload& p2 = payloads_.at(c2);
        m.validate(p1[0], p2[0]);
        check_tau(m.tau());
        auto key = std::make_tuple(c1, c2, m);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::optional<ClassId> r;
        if (auto p = combine(payloads_[c1], payloads_[c2], m)) r = intern(std::move(*p));
        memo_.emplace(std::move(key), r);
        return r;
    }

    bool is_accepting(ClassId c) override { return accept(payloads_.at(c)); }
    std::size_t tau(ClassId c) const override { return payloads_.at(c)[0]; }
    std::uint64_t trace(ClassId c, std::size_t) const override { return payloads_.at(c)[1]; }

    std::string describe(ClassId c) const override {
        std::string s;
        for (auto x : payloads_.at(c)) s += (s.empty() ? "" : ",") + std::to_string(x);
        return "[" + s + "]";
    }

protected:
    TablePredicate(std::size_t w, std::vector<PredicateVar> vars) : RegularPredicate(w), vars_(std::move(vars)) {}

    virtual Payload from_graph(const WTerminalGraph& g) const = 0;
    virtual std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const = 0;
    virtual bool accept(const Payload& p) const = 0;

private:
    ClassId intern(Payload&& p) {
        auto it = ids_.find(p);
        if (it != ids_.end()) return it->second;
        check_new_class(payloads_.size());
        auto id = static_cast<ClassId>(payloads_.size());
        ids_.emplace(p, id);
        payloads_.push_back(std::move(p));
        return id;
    }

    std::vector<PredicateVar> vars_;
    std::vector<std::string> labels_;
    std::vector<Payload> payloads_;
    std::map<Payload, ClassId> ids_;
    std::map<std::tuple<ClassId, ClassId, GlueMatrix>, std::optional<ClassId>> memo_;
};

/// Proper k-colorability. Class: the set of terminal colorings extendable to the whole graph.
class KColorable final : public TablePredicate {
public:
    KColorable(int k, std::size_t w) : TablePredicate(w, {}), k_(k) {
        if (k < 1 || k > 15) throw std::invalid_argument("k_colorable needs 1 <= k <= 15");
    }
    std::string name() const override { return "k_colorable(" + std::to_string(k_) + ")"; }

protected:
    Payload from_graph(const WTerminalGraph& wg) const override {
        const Graph& g = wg.graph;
        detail::GraphView view(wg);
        std::size_t n = g.n();
        std::set<std::uint64_t> found;
        std::vector<int> col(n, -1);
        // colors of terminals first so that each terminal pattern is searched once
        std::vector<std::size_t> order;
        for (NodeId t : wg.terminals) order.push_back(g.index_of(t));
        for (std::size_t i = 0; i < n; ++i)
            if (view.rank[i] < 0) order.push_back(i);
        std::vector<std::vector<std::size_t>> earlier(n);
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < p; ++q)
                if (g.has_edge(g.nodes()[order[p]], g.nodes()[order[q]])) earlier[p].push_back(order[q]);
        std::size_t tau = wg.tau();
        auto encode = [&] {
            std::uint64_t code = 0;
            for (std::size_t r = tau; r-- > 0;) code = code * k_ + col[order[r]];
            return code;
        };
        // returns true once the current terminal prefix is known to extend
        std::function<bool(std::size_t)> rec = [&](std::size_t p) -> bool {
            if (p == n) {
                found.insert(encode());
                return true;
            }
            for (int c = 0; c < k_; ++c) {
                bool ok = true;
                for (std::size_t q : earlier[p])
                    if (col[q] == c) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                col[order[p]] = c;
                bool done = rec(p + 1);
                col[order[p]] = -1;
                if (done && p >= tau) return true;
            }
            return false;
        };
        rec(0);
        Payload out{tau, 0};
        out.insert(out.end(), found.begin(), found.end());
        return out;
    }

    std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const override {
        std::size_t tau = m.rows.size();
        std::set<std::uint64_t> found;
        auto digit = [&](std::uint64_t code, int i) {
            for (int j = 0; j < i; ++j) code /= k_;
            return static_cast<int>(code % k_);
        };
        for (std::size_t i = 2; i < a.size(); ++i)
            for (std::size_t j = 2; j < b.size(); ++j) {
                bool ok = true;
                std::uint64_t code = 0;
                for (std::size_t r = tau; r-- > 0;) {
                    auto [x, y] = m.rows[r];
                    int c1 = x ? digit(a[i], x - 1) : -1, c2 = y ? digit(b[j], y - 1) : -1;
                    if (x && y && c1 != c2) {
                        ok = false;
                        break;
                    }
                    code = code * k_ + (x ? c1 : c2);
                }
                if (ok) found.insert(code);
            }
        Payload out{tau, 0};
        out.insert(out.end(), found.begin(), found.end());
        return out;
    }

    bool accept(const Payload& p) const override { return p.size() > 2; }

private:
    int k_;
};

/// Vertex-set predicates of the form "S is ok", with payload (tau, trace, ok).
class IndependentSet final : public TablePredicate {
public:
    explicit IndependentSet(std::size_t w) : TablePredicate(w, {{"S", Sort::VertexSet, false}}) {}
    std::string name() const override { return "independent_set"; }

protected:
    Payload from_graph(const WTerminalGraph& wg) const override {
        detail::GraphView v(wg);
        std::set<NodeId> s(wg.sets[0].vertices.begin(), wg.sets[0].vertices.end());
        bool ok = true;
        for (const Edge& e : wg.graph.edges())
            if (s.count(e.u) && s.count(e.v)) ok = false;
        return {wg.tau(), v.vertex_trace(wg.sets[0]), ok};
    }
    std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const override {
        std::uint64_t t;
        if (!detail::merge_vertex_trace(a[1], b[1], m, t)) return std::nullopt;
        return Payload{m.tau(), t, a[2] & b[2]};
    }
    bool accept(const Payload& p) const override { return p[2]; }
};

class VertexCover final : public TablePredicate {
public:
    explicit VertexCover(std::size_t w) : TablePredicate(w, {{"S", Sort::VertexSet, false}}) {}
    std::string name() const override { return "vertex_cover"; }

protected:
    Payload from_graph(const WTerminalGraph& wg) const override {
        detail::GraphView v(wg);
        std::set<NodeId> s(wg.sets[0].vertices.begin(), wg.sets[0].vertices.end());
        bool ok = true;
        for (const Edge& e : wg.graph.edges())
            if (!s.count(e.u) && !s.count(e.v)) ok = false;
        return {wg.tau(), v.vertex_trace(wg.sets[0]), ok};
    }
    std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const override {
        std::uint64_t t;
        if (!detail::merge_vertex_trace(a[1], b[1], m, t)) return std::nullopt;
        return Payload{m.tau(), t, a[2] & b[2]};
    }
    bool accept(const Payload& p) const override { return p[2]; }
};

/// Payload (tau, trace, dominated terminals, every non-terminal dominated).
class DominatingSet final : public TablePredicate {
public:
    explicit DominatingSet(std::size_t w) : TablePredicate(w, {{"S", Sort::VertexSet, false}}) {}
    std::string name() const override { return "dominating_set"; }

protected:
    Payload from_graph(const WTerminalGraph& wg) const override {
        const Graph& g = wg.graph;
        detail::GraphView v(wg);
        std::set<NodeId> s(wg.sets[0].vertices.begin(), wg.sets[0].vertices.end());
        std::uint64_t dom = 0;
        bool ok = true;
        for (NodeId x : g.nodes()) {
            bool d = s.count(x) > 0;
            for (NodeId y : g.neighbors(x)) d = d || s.count(y) > 0;
            int r = v.rank_of(x);
            if (r >= 0 && d) dom |= detail::bit(r);
            if (r < 0 && !d) ok = false;
        }
        return {wg.tau(), v.vertex_trace(wg.sets[0]), dom, ok};
    }
    std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const override {
        std::uint64_t t;
        if (!detail::merge_vertex_trace(a[1], b[1], m, t)) return std::nullopt;
        detail::RowMaps rm(m, a[0], b[0]);
        std::uint64_t dom = 0;
        bool ok = a[3] && b[3];
        for (std::size_t r = 0; r < m.rows.size(); ++r) {
            auto [x, y] = m.rows[r];
            if ((x && (a[2] >> (x - 1) & 1)) || (y && (b[2] >> (y - 1) & 1))) dom |= detail::bit(r);
        }
        for (std::size_t i = 0; i < a[0]; ++i)
            if (rm.row1[i] < 0 && !(a[2] >> i & 1)) ok = false;
        for (std::size_t i = 0; i < b[0]; ++i)
            if (rm.row2[i] < 0 && !(b[2] >> i & 1)) ok = false;
        return Payload{m.tau(), t, dom, ok};
    }
    bool accept(const Payload& p) const override { return p[3] && p[2] == (p[0] == 64 ? ~0ull : (1ull << p[0]) - 1); }
};

/// The free edge set S is acyclic (optionally: a spanning tree).
/// Payload (tau, trace, adjacency, ok, block labels of terminals, closed component count).
/// Blocks are the connected pieces of S without its terminal-terminal edges; those edges stay in
/// the trace until one of their endpoints is forgotten.
class EdgeForest : public TablePredicate {
public:
    EdgeForest(std::size_t w, bool spanning)
        : TablePredicate(w, {{"S", Sort::EdgeSet, false}}), spanning_(spanning) {}
    std::string name() const override { return spanning_ ? "spanning_tree_marked" : "acyclic_marked"; }

protected:
    static std::uint64_t pack_blocks(detail::UnionFind& uf, const std::vector<std::size_t>& nodes) {
        std::uint64_t code = 0;
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            std::size_t label = r;
            for (std::size_t q = 0; q < r; ++q)
                if (uf.find(nodes[q]) == uf.find(nodes[r])) {
                    label = q;
                    break;
                }
            code |= static_cast<std::uint64_t>(label) << (4 * r);
        }
        return code;
    }

    static std::size_t block_of(std::uint64_t code, std::size_t r) { return code >> (4 * r) & 15; }

    Payload from_graph(const WTerminalGraph& wg) const override {
        const Graph& g = wg.graph;
        detail::GraphView v(wg);
        std::set<Edge> s(wg.sets[0].edges.begin(), wg.sets[0].edges.end());
        detail::UnionFind uf(g.n());
        bool ok = true;
        for (const Edge& e : g.edges()) {
            if (!s.count(e) || (v.rank_of(e.u) >= 0 && v.rank_of(e.v) >= 0)) continue;
            if (!uf.unite(g.index_of(e.u), g.index_of(e.v))) ok = false;
        }
        std::vector<std::size_t> tnodes;
        for (NodeId t : wg.terminals) tnodes.push_back(g.index_of(t));
        std::set<std::size_t> touched;
        for (std::size_t t : tnodes) touched.insert(uf.find(t));
        std::set<std::size_t> closed;
        for (std::size_t i = 0; i < g.n(); ++i)
            if (!touched.count(uf.find(i))) closed.insert(uf.find(i));
        return {wg.tau(), v.edge_trace(wg.sets[0]), v.adjacency(), ok, pack_blocks(uf, tnodes),
                std::min<std::uint64_t>(2, closed.size())};
    }

    std::optional<Payload> combine(const Payload& a, const Payload& b, const GlueMatrix& m) const override {
        int tau1 = static_cast<int>(a[0]), tau2 = static_cast<int>(b[0]), tau = static_cast<int>(m.tau());
        std::uint64_t adj, t;
        if (!detail::merge_edge_trace(a[2], a[1], tau1, b[2], b[1], tau2, m, adj, t)) return std::nullopt;
        detail::RowMaps rm(m, a[0], b[0]);
        std::vector<std::size_t> n1(tau1), n2(tau2);
        std::size_t next = tau;
        for (int i = 0; i < tau1; ++i) n1[i] = rm.row1[i] >= 0 ? rm.row1[i] : next++;
        for (int i = 0; i < tau2; ++i) n2[i] = rm.row2[i] >= 0 ? rm.row2[i] : next++;
        detail::UnionFind uf(next);
        bool ok = a[3] && b[3];
        for (int i = 0; i < tau1; ++i) uf.unite(n1[i], n1[block_of(a[4], i)]);
        // joining two side-2 block members already connected through side 1 closes a cycle
        for (int i = 0; i < tau2; ++i) {
            std::size_t rep = block_of(b[4], i);
            if (rep != static_cast<std::size_t>(i) && !uf.unite(n2[i], n2[rep])) ok = false;
        }
        auto forget_edges = [&](std::uint64_t mask, int side_tau, const std::vector<int>& row,
                                const std::vector<std::size_t>& node) {
            for (auto r = mask; r; r &= r - 1) {
                auto [i, j] = pair_of(std::countr_zero(r), side_tau);
                if (row[i] >= 0 && row[j] >= 0) continue;
                if (!uf.unite(node[i], node[j])) ok = false;
            }
        };
        forget_edges(a[1], tau1, rm.row1, n1);
        forget_edges(b[1], tau2, rm.row2, n2);
        std::set<std::size_t> touched, closed;
        for (int r = 0; r < tau; ++r) touched.insert(uf.find(r));
        for (std::size_t x = tau; x < next; ++x)
            if (!touched.count(uf.find(x))) closed.insert(uf.find(x));
        std::vector<std::size_t> rows(tau);
        std::iota(rows.begin(), rows.end(), 0);
        std::uint64_t closed_count = std::min<std::uint64_t>(2, a[5] + b[5] + closed.size());
        return Payload{m.tau(), t, adj, ok, pack_blocks(uf, rows), closed_count};
    }

    bool accept(const Payload& p) const override {
        if (!p[3]) return false;
        int tau = static_cast<int>(p[0]);
        detail::UnionFind uf(tau);
        for (int i = 0; i < tau; ++i) uf.unite(i, block_of(p[4], i));
        for (auto r = p[1]; r; r &= r - 1) {
            auto [i, j] = pair_of(std::countr_zero(r), tau);
            if (!uf.unite(i, j)) return false;
        }
        if (!spanning_) return true;
        std::set<std::size_t> comps;
        for (int i = 0; i < tau; ++i) comps.insert(uf.find(i));
        return p[5] + comps.size() == 1;
    }

private:
    bool spanning_;
};

/// Builtin predicates by name: k_colorable (param k), independent_set, vertex_cover,
/// dominating_set, acyclic_marked, spanning_tree_marked.
inline std::unique_ptr<RegularPredicate> builtin_predicate(const std::string& name, std::size_t w, int k = 3) {
    if (name == "k_colorable") return std::make_unique<KColorable>(k, w);
    if (name == "independent_set") return std::make_unique<IndependentSet>(w);
    if (name == "vertex_cover") return std::make_unique<VertexCover>(w);
    if (name == "dominating_set") return std::make_unique<DominatingSet>(w);
    if (name == "acyclic_marked") return std::make_unique<EdgeForest>(w, false);
    if (name == "spanning_tree_marked") return std::make_unique<EdgeForest>(w, true);
    throw UnknownName("unknown builtin predicate '" + name + "'");
}

}  // namespace tdmso
