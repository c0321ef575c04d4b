#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tdmso/normalize.hpp"
#include "tdmso/predicate.hpp"

namespace tdmso {

/// An MSO formula compiled into composable quantifier-rank types.
///
/// Every existential quantifier of the normalized formula opens a scope. A type of scope S over a
/// w-terminal graph under an assignment of S's context variables holds
///   - the terminal count and the terminal adjacency pattern,
///   - for the variables S needs: the terminal trace and the interior size capped at 2,
///   - the truth value of every atom directly in S's body,
///   - for every child scope, the set of child types over all values of the child's variable.
/// Root-scope types are the predicate's classes.
class CompiledMso final : public RegularPredicate {
public:
    CompiledMso(const MsoFormula& f, std::size_t w) : RegularPredicate(w), source_(f) {
        auto nf = normalize(f);
        for (std::size_t k = 0; k < f.free_count(); ++k) {
            const auto& v = f.free_vars()[k];
            vars_.push_back({v.name, set_sort_of(v.sort), !is_set_sort(v.sort)});
        }
        collect_labels(*nf.body());
        std::sort(labels_.begin(), labels_.end());
        labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());

        Scope root;
        root.parent = -1;
        for (const auto& v : vars_) root.ctx_sorts.push_back(v.sort);
        scopes_.push_back(root);
        std::vector<std::string> env;
        for (const auto& v : vars_) env.push_back(v.name);
        scopes_[0].body = compile(nf.body(), 0, env);
        for (auto& s : scopes_) finish_scope(s);
        for (std::size_t k = 0; k < vars_.size(); ++k) scopes_[0].track_mask[k] = 1;
    }

    std::string name() const override { return "mso"; }
    const std::vector<PredicateVar>& free_vars() const override { return vars_; }
    const std::vector<std::string>& label_vocabulary() const override { return labels_; }
    const MsoFormula& source() const { return source_; }

    std::size_t scope_count() const { return scopes_.size(); }
    /// Interned types over all scopes (the root-scope ones are the classes).
    std::size_t type_count() const { return types_.size(); }
    std::size_t class_count() const override { return roots_.size(); }

    ClassId classify(const WTerminalGraph& wg) override {
        check_tau(wg.tau());
        if (wg.sets.size() != vars_.size())
            throw std::invalid_argument("classify: expected " + std::to_string(vars_.size()) + " set assignments");
        Frame fr(wg.graph, wg.terminals, labels_);
        std::vector<std::uint64_t> vals;
        for (std::size_t k = 0; k < vars_.size(); ++k) vals.push_back(fr.encode(vars_[k].sort, wg.sets[k]));
        return public_id(type_of(0, fr, vals));
    }

    ClassId classify_base(const Graph& base, const std::vector<Selection>& sets) override {
        check_tau(base.n());
        std::string key = base_key(base, sets);
        auto it = base_memo_.find(key);
        if (it != base_memo_.end()) return it->second;
        ClassId c = classify(make_base(base, sets));
        base_memo_.emplace(std::move(key), c);
        return c;
    }

    std::optional<ClassId> try_compose(ClassId c1, ClassId c2, const GlueMatrix& m) override {
        const auto& t1 = types_.at(roots_.at(c1));
        const auto& t2 = types_.at(roots_.at(c2));
        m.validate(static_cast<std::size_t>(t1.tau), static_cast<std::size_t>(t2.tau));
        check_tau(m.tau());
        auto r = compose_types(roots_[c1], roots_[c2], matrix_id(m));
        if (r < 0) return std::nullopt;
        return public_id(static_cast<std::uint32_t>(r));
    }

    bool is_accepting(ClassId c) override { return accepts(roots_.at(c)); }

    std::size_t tau(ClassId c) const override { return static_cast<std::size_t>(types_.at(roots_.at(c)).tau); }

    std::uint64_t trace(ClassId c, std::size_t k) const override { return types_.at(roots_.at(c)).mask.at(k); }

    std::string describe(ClassId c) const override {
        const auto& t = types_.at(roots_.at(c));
        std::ostringstream out;
        out << "tau=" << t.tau << " adj=" << t.adj << " atoms=" << t.atoms;
        for (std::size_t k = 0; k < vars_.size(); ++k) out << " trace" << k << '=' << t.mask[k];
        for (std::size_t k = 0; k < t.count.size(); ++k)
            if (scopes_[0].track_count[k]) out << " int" << k << '=' << int(t.count[k]);
        for (std::size_t i = 0; i < t.ext.size(); ++i) out << " ext" << i << '=' << t.ext[i].size();
        return out.str();
    }

private:
    struct Atom {
        Kind kind;
        int a = -1, b = -1;
        int label = -1;
    };

    struct Node {
        Kind kind;
        int atom = -1;   // atoms
        int child = -1;  // Exists: position in the scope's children
        std::vector<int> sub;
    };

    struct Scope {
        int parent = -1;
        std::vector<Sort> ctx_sorts;  // one per context variable; the last is the own variable
        bool singleton = false;
        std::vector<Atom> atoms;
        std::vector<Node> nodes;
        int body = -1;
        std::vector<int> children;
        std::vector<char> track_mask, track_count;
    };

    struct Type {
        int scope = 0;
        int tau = 0;
        std::uint64_t adj = 0;
        std::vector<std::uint64_t> mask;
        std::vector<std::uint8_t> count;
        std::uint64_t atoms = 0;
        std::vector<std::vector<std::uint32_t>> ext;
    };

    // Per-graph bitmask tables used by direct classification.
    struct Frame {
        const Graph& g;
        int tau;
        std::vector<int> term_index;     // graph index of each terminal rank
        std::vector<int> edge_pair;      // pair index of each edge, or -1
        std::uint64_t adj = 0;           // terminal adjacency over pair indices
        std::vector<std::uint64_t> nb, inc;
        std::vector<std::uint64_t> vlabel, elabel;

        Frame(const Graph& graph, const std::vector<NodeId>& terminals, const std::vector<std::string>& labels)
            : g(graph), tau(static_cast<int>(terminals.size())) {
            if (g.n() > 64 || g.m() > 64) throw SizeLimit("direct classification needs n, m <= 64");
            if (!std::is_sorted(terminals.begin(), terminals.end()) ||
                std::adjacent_find(terminals.begin(), terminals.end()) != terminals.end())
                throw std::invalid_argument("terminals must be strictly ascending");
            std::vector<int> rank(g.n(), -1);
            for (int r = 0; r < tau; ++r) {
                if (!g.has_node(terminals[r])) throw std::invalid_argument("terminal is not a node of the graph");
                term_index.push_back(static_cast<int>(g.index_of(terminals[r])));
                rank[term_index.back()] = r;
            }
            nb.assign(g.n(), 0);
            inc.assign(g.n(), 0);
            for (std::size_t i = 0; i < g.m(); ++i) {
                const Edge& e = g.edges()[i];
                auto a = g.index_of(e.u), b = g.index_of(e.v);
                nb[a] |= bit(b);
                nb[b] |= bit(a);
                inc[a] |= bit(i);
                inc[b] |= bit(i);
                int p = rank[a] >= 0 && rank[b] >= 0 ? pair_index(rank[a], rank[b], tau) : -1;
                edge_pair.push_back(p);
                if (p >= 0) adj |= bit(p);
            }
            for (const auto& l : labels) {
                std::uint64_t vm = 0, em = 0;
                for (std::size_t i = 0; i < g.n(); ++i)
                    if (g.vertex_has_label(g.nodes()[i], l)) vm |= bit(i);
                for (std::size_t i = 0; i < g.m(); ++i)
                    if (g.edge_has_label(g.edges()[i], l)) em |= bit(i);
                vlabel.push_back(vm);
                elabel.push_back(em);
            }
        }

        std::uint64_t encode(Sort s, const Selection& sel) const {
            std::uint64_t m = 0;
            if (is_vertex_kind(s)) {
                if (!sel.edges.empty()) throw std::invalid_argument("edge in a vertex-set assignment");
                for (NodeId x : sel.vertices) {
                    if (!g.has_node(x)) throw std::invalid_argument("assignment names an unknown vertex");
                    m |= bit(g.index_of(x));
                }
            } else {
                if (!sel.vertices.empty()) throw std::invalid_argument("vertex in an edge-set assignment");
                for (const Edge& e : sel.edges) m |= bit(g.edge_position(e));
            }
            return m;
        }
    };

    static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

    void collect_labels(const Formula& f) {
        if (f.kind == Kind::Label) labels_.push_back(f.label);
        for (const auto& s : f.sub) collect_labels(*s);
    }

    static int lookup(const std::vector<std::string>& env, const std::string& name) {
        for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i)
            if (env[i] == name) return i;
        throw std::logic_error("unbound variable " + name);
    }

    int label_index(const std::string& l) const {
        return static_cast<int>(std::lower_bound(labels_.begin(), labels_.end(), l) - labels_.begin());
    }

    int compile(const FormulaPtr& f, int s, std::vector<std::string>& env) {
        Node node{f->kind, -1, -1, {}};
        if (is_atom(f->kind)) {
            Atom a{f->kind};
            a.a = lookup(env, f->vars[0]);
            if (f->vars.size() > 1) a.b = lookup(env, f->vars[1]);
            if (f->kind == Kind::Label) a.label = label_index(f->label);
            scopes_[s].atoms.push_back(a);
            node.atom = static_cast<int>(scopes_[s].atoms.size()) - 1;
            if (scopes_[s].atoms.size() > 64) throw BudgetError("more than 64 atoms in one quantifier scope");
        } else if (f->kind == Kind::Exists) {
            int c = static_cast<int>(scopes_.size());
            Scope child;
            child.parent = s;
            child.ctx_sorts = scopes_[s].ctx_sorts;
            child.ctx_sorts.push_back(f->sort);
            scopes_.push_back(std::move(child));
            env.push_back(f->vars[0]);
            int body = compile(f->sub[0], c, env);
            env.pop_back();
            scopes_[c].body = body;
            scopes_[s].children.push_back(c);
            node.child = static_cast<int>(scopes_[s].children.size()) - 1;
        } else {
            for (const auto& sub : f->sub) node.sub.push_back(compile(sub, s, env));
        }
        scopes_[s].nodes.push_back(std::move(node));
        return static_cast<int>(scopes_[s].nodes.size()) - 1;
    }

    void finish_scope(Scope& s) {
        std::size_t depth = s.ctx_sorts.size();
        s.track_mask.assign(depth, 0);
        s.track_count.assign(depth, 0);
        for (const auto& a : s.atoms)
            if (a.kind == Kind::Sing) s.track_mask[a.a] = s.track_count[a.a] = 1;
        if (s.parent >= 0) {
            s.track_mask[depth - 1] = 1;
            // a top-level conjunct sing(own) restricts the own variable to singletons
            std::vector<int> stack{s.body};
            while (!stack.empty()) {
                const Node& n = s.nodes[stack.back()];
                stack.pop_back();
                if (n.kind == Kind::And) {
                    stack.push_back(n.sub[0]);
                    stack.push_back(n.sub[1]);
                } else if (n.kind == Kind::Sing && s.atoms[n.atom].a == static_cast<int>(depth) - 1) {
                    s.singleton = true;
                }
            }
        }
    }

    // ---- interning

    std::string serialize(const Type& t) const {
        std::string k;
        auto put = [&](const void* p, std::size_t n) { k.append(static_cast<const char*>(p), n); };
        put(&t.scope, sizeof t.scope);
        put(&t.tau, sizeof t.tau);
        put(&t.adj, sizeof t.adj);
        put(t.mask.data(), t.mask.size() * sizeof(std::uint64_t));
        put(t.count.data(), t.count.size());
        put(&t.atoms, sizeof t.atoms);
        for (const auto& e : t.ext) {
            std::uint32_t n = static_cast<std::uint32_t>(e.size());
            put(&n, sizeof n);
            put(e.data(), e.size() * sizeof(std::uint32_t));
        }
        return k;
    }

    std::uint32_t intern(Type&& t) {
        std::string key = serialize(t);
        auto it = intern_.find(key);
        if (it != intern_.end()) return it->second;
        check_new_class(types_.size());
        auto id = static_cast<std::uint32_t>(types_.size());
        if (t.scope == 0) {
            root_index_.emplace(id, static_cast<ClassId>(roots_.size()));
            roots_.push_back(id);
        }
        types_.push_back(std::move(t));
        accept_.push_back(-1);
        intern_.emplace(std::move(key), id);
        return id;
    }

    ClassId public_id(std::uint32_t internal) const { return root_index_.at(internal); }

    std::uint32_t matrix_id(const GlueMatrix& m) {
        auto it = matrices_.find(m);
        if (it != matrices_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(matrix_list_.size());
        matrix_list_.push_back(m);
        matrices_.emplace(m, id);
        return id;
    }

    // ---- direct classification

    bool eval_atom(const Atom& a, const Scope& s, const Frame& fr, const std::vector<std::uint64_t>& vals) const {
        auto A = vals[a.a];
        switch (a.kind) {
            case Kind::Adj: {
                std::uint64_t n = 0;
                for (auto r = A; r; r &= r - 1) n |= fr.nb[std::countr_zero(r)];
                return (n & vals[a.b]) != 0;
            }
            case Kind::Inc: {
                std::uint64_t n = 0;
                for (auto r = A; r; r &= r - 1) n |= fr.inc[std::countr_zero(r)];
                return (n & vals[a.b]) != 0;
            }
            case Kind::Eq: return A == vals[a.b];
            case Kind::In:
            case Kind::Sub: return (A & ~vals[a.b]) == 0;
            case Kind::Sing: return std::popcount(A) == 1;
            case Kind::Label: {
                bool vertex = is_vertex_kind(s.ctx_sorts[a.a]);
                return (A & ~(vertex ? fr.vlabel[a.label] : fr.elabel[a.label])) == 0;
            }
            default: return false;
        }
    }

    std::uint32_t type_of(int si, const Frame& fr, std::vector<std::uint64_t>& vals) {
        const Scope& s = scopes_[si];
        Type t;
        t.scope = si;
        t.tau = fr.tau;
        t.adj = fr.adj;
        std::size_t depth = s.ctx_sorts.size();
        t.mask.assign(depth, 0);
        t.count.assign(depth, 0);
        for (std::size_t k = 0; k < depth; ++k) {
            if (!s.track_mask[k]) continue;
            std::uint64_t m = 0;
            if (is_vertex_kind(s.ctx_sorts[k])) {
                for (int r = 0; r < fr.tau; ++r)
                    if (vals[k] >> fr.term_index[r] & 1) m |= bit(r);
            } else {
                for (auto r = vals[k]; r; r &= r - 1) {
                    int p = fr.edge_pair[std::countr_zero(r)];
                    if (p >= 0) m |= bit(p);
                }
            }
            t.mask[k] = m;
            if (s.track_count[k])
                t.count[k] = static_cast<std::uint8_t>(std::min(2, std::popcount(vals[k]) - std::popcount(m)));
        }
        for (std::size_t i = 0; i < s.atoms.size(); ++i)
            if (eval_atom(s.atoms[i], s, fr, vals)) t.atoms |= bit(i);
        for (int c : s.children) {
            const Scope& cs = scopes_[c];
            Sort sort = cs.ctx_sorts.back();
            std::size_t k = is_vertex_kind(sort) ? fr.g.n() : fr.g.m();
            std::vector<std::uint32_t> ext;
            vals.push_back(0);
            if (cs.singleton) {
                ext.push_back(type_of(c, fr, vals));
                for (std::size_t i = 0; i < k; ++i) {
                    vals.back() = bit(i);
                    ext.push_back(type_of(c, fr, vals));
                }
            } else {
                if (k > 20) throw BudgetError("set quantifier over more than 2^20 values");
                for (std::uint64_t u = 0; u < (std::uint64_t{1} << k); ++u) {
                    vals.back() = u;
                    ext.push_back(type_of(c, fr, vals));
                }
            }
            vals.pop_back();
            std::sort(ext.begin(), ext.end());
            ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
            t.ext.push_back(std::move(ext));
        }
        return intern(std::move(t));
    }

    std::string base_key(const Graph& g, const std::vector<Selection>& sets) const {
        if (sets.size() != vars_.size())
            throw std::invalid_argument("classify_base: expected " + std::to_string(vars_.size()) + " set assignments");
        int tau = static_cast<int>(g.n());
        std::vector<std::uint64_t> words;
        words.push_back(static_cast<std::uint64_t>(tau));
        std::uint64_t adj = 0;
        std::vector<std::uint64_t> elab(labels_.size(), 0), vlab(labels_.size(), 0);
        for (const Edge& e : g.edges()) {
            int p = pair_index(static_cast<int>(g.index_of(e.u)), static_cast<int>(g.index_of(e.v)), tau);
            adj |= bit(p);
            for (std::size_t l = 0; l < labels_.size(); ++l)
                if (g.edge_has_label(e, labels_[l])) elab[l] |= bit(p);
        }
        for (std::size_t i = 0; i < g.n(); ++i)
            for (std::size_t l = 0; l < labels_.size(); ++l)
                if (g.vertex_has_label(g.nodes()[i], labels_[l])) vlab[l] |= bit(i);
        words.push_back(adj);
        words.insert(words.end(), vlab.begin(), vlab.end());
        words.insert(words.end(), elab.begin(), elab.end());
        for (std::size_t k = 0; k < sets.size(); ++k) {
            std::uint64_t m = 0;
            for (NodeId x : sets[k].vertices) m |= bit(g.index_of(x));
            for (const Edge& e : sets[k].edges)
                m |= bit(pair_index(static_cast<int>(g.index_of(e.u)), static_cast<int>(g.index_of(e.v)), tau));
            words.push_back(m);
        }
        return std::string(reinterpret_cast<const char*>(words.data()), words.size() * sizeof(std::uint64_t));
    }

    // ---- composition

    std::int64_t compose_types(std::uint32_t i1, std::uint32_t i2, std::uint32_t mid) {
        auto key = std::make_tuple(i1, i2, mid);
        auto memo = compose_memo_.find(key);
        if (memo != compose_memo_.end()) return memo->second;
        std::int64_t result = compose_uncached(i1, i2, mid);
        compose_memo_.emplace(key, result);
        return result;
    }

    std::int64_t compose_uncached(std::uint32_t i1, std::uint32_t i2, std::uint32_t mid) {
        const GlueMatrix& M = matrix_list_[mid];
        // copies: types_ may reallocate during recursion
        const Type T1 = types_[i1];
        const Type T2 = types_[i2];
        if (T1.scope != T2.scope) throw std::logic_error("composing types of different scopes");
        const Scope& s = scopes_[T1.scope];
        int tau = static_cast<int>(M.tau());
        std::vector<int> row1(T1.tau, -1), row2(T2.tau, -1);
        for (int r = 0; r < tau; ++r) {
            if (M.rows[r].first) row1[M.rows[r].first - 1] = r;
            if (M.rows[r].second) row2[M.rows[r].second - 1] = r;
        }
        auto side_pair = [&](int a, int b, int side_tau) { return pair_index(a - 1, b - 1, side_tau); };

        Type t;
        t.scope = T1.scope;
        t.tau = tau;
        // edges between result terminals, as present on each side
        std::vector<std::pair<int, int>> both;  // (side-1 pair, side-2 pair) of edges present on both sides
        for (int r = 0; r < tau; ++r)
            for (int q = r + 1; q < tau; ++q) {
                auto [a1, b1] = M.rows[r];
                auto [a2, b2] = M.rows[q];
                bool e1 = a1 && a2 && (T1.adj >> side_pair(a1, a2, T1.tau) & 1);
                bool e2 = b1 && b2 && (T2.adj >> side_pair(b1, b2, T2.tau) & 1);
                if (e1 || e2) t.adj |= bit(pair_index(r, q, tau));
            }

        std::size_t depth = s.ctx_sorts.size();
        t.mask.assign(depth, 0);
        t.count.assign(depth, 0);
        for (std::size_t k = 0; k < depth; ++k) {
            if (!s.track_mask[k]) continue;
            std::uint64_t m1 = T1.mask[k], m2 = T2.mask[k], m = 0;
            int forgotten = 0;
            if (is_vertex_kind(s.ctx_sorts[k])) {
                for (int r = 0; r < tau; ++r) {
                    auto [a, b] = M.rows[r];
                    bool in1 = a && (m1 >> (a - 1) & 1), in2 = b && (m2 >> (b - 1) & 1);
                    if (a && b && in1 != in2) return -1;
                    if (in1 || in2) m |= bit(r);
                }
                for (int i = 0; i < T1.tau; ++i)
                    if (row1[i] < 0 && (m1 >> i & 1)) ++forgotten;
                for (int i = 0; i < T2.tau; ++i)
                    if (row2[i] < 0 && (m2 >> i & 1)) ++forgotten;
            } else {
                for (int r = 0; r < tau; ++r)
                    for (int q = r + 1; q < tau; ++q) {
                        auto [a1, b1] = M.rows[r];
                        auto [a2, b2] = M.rows[q];
                        bool e1 = a1 && a2 && (T1.adj >> side_pair(a1, a2, T1.tau) & 1);
                        bool e2 = b1 && b2 && (T2.adj >> side_pair(b1, b2, T2.tau) & 1);
                        bool in1 = e1 && (m1 >> side_pair(a1, a2, T1.tau) & 1);
                        bool in2 = e2 && (m2 >> side_pair(b1, b2, T2.tau) & 1);
                        if (e1 && e2 && in1 != in2) return -1;
                        if (in1 || in2) m |= bit(pair_index(r, q, tau));
                    }
                for (auto r = m1; r; r &= r - 1) {
                    auto [i, j] = pair_of(std::countr_zero(r), T1.tau);
                    if (row1[i] < 0 || row1[j] < 0) ++forgotten;
                }
                for (auto r = m2; r; r &= r - 1) {
                    auto [i, j] = pair_of(std::countr_zero(r), T2.tau);
                    if (row2[i] < 0 || row2[j] < 0) ++forgotten;
                }
            }
            t.mask[k] = m;
            if (s.track_count[k]) t.count[k] = static_cast<std::uint8_t>(std::min(2, T1.count[k] + T2.count[k] + forgotten));
        }

        for (std::size_t i = 0; i < s.atoms.size(); ++i) {
            const Atom& a = s.atoms[i];
            bool v1 = T1.atoms >> i & 1, v2 = T2.atoms >> i & 1, v;
            switch (a.kind) {
                case Kind::Sing: v = std::popcount(t.mask[a.a]) + t.count[a.a] == 1; break;
                case Kind::Adj:
                case Kind::Inc: v = v1 || v2; break;
                default: v = v1 && v2; break;
            }
            if (v) t.atoms |= bit(i);
        }

        for (std::size_t ci = 0; ci < s.children.size(); ++ci) {
            const Scope& cs = scopes_[s.children[ci]];
            std::size_t own = cs.ctx_sorts.size() - 1;
            std::vector<std::uint32_t> ext;
            for (std::uint32_t x : T1.ext[ci])
                for (std::uint32_t y : T2.ext[ci]) {
                    auto z = compose_types(x, y, mid);
                    if (z < 0) continue;
                    if (cs.singleton) {
                        const Type& tz = types_[static_cast<std::size_t>(z)];
                        if (std::popcount(tz.mask[own]) + tz.count[own] >= 2) continue;
                    }
                    ext.push_back(static_cast<std::uint32_t>(z));
                }
            std::sort(ext.begin(), ext.end());
            ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
            t.ext.push_back(std::move(ext));
        }
        return intern(std::move(t));
    }

    // ---- acceptance

    bool accepts(std::uint32_t id) {
        if (accept_[id] >= 0) return accept_[id];
        const Type t = types_[id];
        const Scope& s = scopes_[t.scope];
        bool v = eval_node(s, s.body, t);
        accept_[id] = v;
        return v;
    }

    bool eval_node(const Scope& s, int ni, const Type& t) {
        const Node& n = s.nodes[ni];
        switch (n.kind) {
            case Kind::Not: return !eval_node(s, n.sub[0], t);
            case Kind::And: return eval_node(s, n.sub[0], t) && eval_node(s, n.sub[1], t);
            case Kind::Or: return eval_node(s, n.sub[0], t) || eval_node(s, n.sub[1], t);
            case Kind::Exists:
                for (std::uint32_t x : t.ext[n.child])
                    if (accepts(x)) return true;
                return false;
            default: return t.atoms >> n.atom & 1;
        }
    }

    MsoFormula source_;
    std::vector<PredicateVar> vars_;
    std::vector<std::string> labels_;
    std::vector<Scope> scopes_;

    std::vector<Type> types_;
    std::vector<std::int8_t> accept_;
    std::unordered_map<std::string, std::uint32_t> intern_;
    std::vector<std::uint32_t> roots_;
    std::unordered_map<std::uint32_t, ClassId> root_index_;

    std::map<GlueMatrix, std::uint32_t> matrices_;
    std::vector<GlueMatrix> matrix_list_;
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::int64_t> compose_memo_;
    std::unordered_map<std::string, ClassId> base_memo_;
};

/// Compiles f into a regular predicate over graphs with at most w terminals.
inline std::unique_ptr<CompiledMso> compile_mso(const MsoFormula& f, std::size_t w) {
    return std::make_unique<CompiledMso>(f, w);
}

}  // namespace tdmso
