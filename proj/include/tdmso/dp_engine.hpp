#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdmso/assignment.hpp"
#include "tdmso/predicate.hpp"
#include "tdmso/treedepth.hpp"

namespace tdmso {

class Unsatisfiable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Best weight per class; an absent class stands for minus infinity.
using OptTable = std::map<ClassId, Weight>;
using CountTable = std::map<ClassId, BigInt>;
/// For each class of a composition, the operand classes that realised it.
using Provenance = std::map<ClassId, std::pair<ClassId, ClassId>>;

/// The selections restricted to the vertices of `bag` and the edges among them.
inline std::vector<Selection> restrict_sets(const std::vector<Selection>& sets, const std::vector<NodeId>& bag) {
    std::vector<Selection> out;
    auto in = [&](NodeId x) { return std::binary_search(bag.begin(), bag.end(), x); };
    for (const auto& s : sets) {
        Selection r;
        for (NodeId x : s.vertices)
            if (in(x)) r.vertices.push_back(x);
        for (const Edge& e : s.edges)
            if (in(e.u) && in(e.v)) r.edges.push_back(e);
        out.push_back(std::move(r));
    }
    return out;
}

/// Calls fn for every tuple of subsets of the base graph, one per free variable. Singleton
/// variables only take values of size at most one.
inline void for_each_base_assignment(const RegularPredicate& p, const Graph& base,
                                     const std::function<void(const std::vector<Selection>&)>& fn) {
    const auto& vars = p.free_vars();
    std::vector<Selection> cur(vars.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == vars.size()) {
            fn(cur);
            return;
        }
        bool vertex = is_vertex_kind(vars[k].sort);
        std::size_t dom = vertex ? base.n() : base.m();
        auto assign = [&](std::uint64_t mask) {
            Selection s;
            for (std::size_t i = 0; i < dom; ++i)
                if (mask >> i & 1) {
                    if (vertex) s.vertices.push_back(base.nodes()[i]);
                    else s.edges.push_back(base.edges()[i]);
                }
            cur[k] = std::move(s);
            rec(k + 1);
        };
        if (vars[k].singleton) {
            assign(0);
            for (std::size_t i = 0; i < dom; ++i) assign(std::uint64_t{1} << i);
        } else {
            if (dom > 30) throw BudgetError("too many base assignments");
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << dom); ++m) assign(m);
        }
    };
    rec(0);
}

inline Selection intersect(const Selection& a, const Selection& b) {
    Selection r;
    std::set_intersection(a.vertices.begin(), a.vertices.end(), b.vertices.begin(), b.vertices.end(),
                          std::back_inserter(r.vertices));
    std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(), std::back_inserter(r.edges));
    return r;
}

/// Signed weight of a selection measured on g; sign is -1 when minimising.
inline Weight signed_weight(const Graph& g, const Selection& s, int sign) { return sign * selection_weight(g, s); }

// ---------------------------------------------------------------------------------------------
// per-node folds, shared by the sequential engine and the distributed protocols

/// One child of a node: its bag and its class.
struct ChildClass {
    std::vector<NodeId> bag;
    ClassId cls;
};

/// h(G_u) from h(G[B_u]) and the children's classes, children in the given order.
inline ClassId fold_decide(RegularPredicate& p, const std::vector<NodeId>& bag, ClassId base,
                           const std::vector<ChildClass>& children) {
    std::optional<ClassId> acc;
    for (const auto& ch : children) {
        ClassId eq = p.compose(ch.cls, base, glue_matrix_for(ch.bag, bag));
        acc = acc ? p.compose(*acc, eq, GlueMatrix::identity(bag.size())) : eq;
    }
    return acc ? *acc : base;
}

/// Composition of two OPT tables. `weight_graph` must contain every element shared by the two
/// sides (for a node: its base graph).
inline OptTable combine_opt(RegularPredicate& p, const OptTable& t1, const std::vector<NodeId>& bag1,
                            const OptTable& t2, const std::vector<NodeId>& bag2, const GlueMatrix& m,
                            const Graph& weight_graph, int sign, Provenance* prov) {
    OptTable out;
    std::map<ClassId, Selection> sel2;
    for (const auto& [c2, v2] : t2) sel2[c2] = p.selected(c2, bag2);
    for (const auto& [c1, v1] : t1) {
        Selection s1 = p.selected(c1, bag1);
        for (const auto& [c2, v2] : t2) {
            auto c = p.try_compose(c1, c2, m);
            if (!c) continue;
            Selection shared = intersect(s1, sel2[c2]);
            Weight v = v1 + v2 - (shared.empty() ? 0 : signed_weight(weight_graph, shared, sign));
            auto it = out.find(*c);
            if (it == out.end() || v > it->second) {
                out[*c] = v;
                if (prov) (*prov)[*c] = {c1, c2};
            }
        }
    }
    return out;
}

inline CountTable combine_count(RegularPredicate& p, const CountTable& t1, const CountTable& t2, const GlueMatrix& m) {
    CountTable out;
    for (const auto& [c1, n1] : t1)
        for (const auto& [c2, n2] : t2)
            if (auto c = p.try_compose(c1, c2, m)) out[*c] += n1 * n2;
    return out;
}

inline OptTable base_opt_table(RegularPredicate& p, const Graph& base, int sign) {
    OptTable t;
    for_each_base_assignment(p, base, [&](const std::vector<Selection>& sets) {
        ClassId c = p.classify_base(base, sets);
        Weight v = sets.empty() ? 0 : signed_weight(base, sets[0], sign);
        auto it = t.find(c);
        if (it == t.end() || v > it->second) t[c] = v;
    });
    return t;
}

inline CountTable base_count_table(RegularPredicate& p, const Graph& base) {
    CountTable t;
    for_each_base_assignment(p, base, [&](const std::vector<Selection>& sets) { t[p.classify_base(base, sets)] += 1; });
    return t;
}

/// OPT table of G_u plus the provenance of every fold step.
struct OptFold {
    OptTable table;
    std::vector<Provenance> eq;   // eq[i]: class of Geq_i -> (child class, base class)
    std::vector<Provenance> leq;  // leq[i], i >= 1: class of Gleq_i -> (Gleq_{i-1} class, Geq_i class)
};

struct ChildOpt {
    std::vector<NodeId> bag;
    OptTable table;
};

inline OptFold fold_opt(RegularPredicate& p, const std::vector<NodeId>& bag, const Graph& base, int sign,
                        const std::vector<ChildOpt>& children) {
    OptFold f;
    OptTable base_table = base_opt_table(p, base, sign);
    if (children.empty()) {
        f.table = std::move(base_table);
        return f;
    }
    OptTable acc;
    for (std::size_t i = 0; i < children.size(); ++i) {
        Provenance pe;
        OptTable eq = combine_opt(p, children[i].table, children[i].bag, base_table, bag,
                                  glue_matrix_for(children[i].bag, bag), base, sign, &pe);
        f.eq.push_back(std::move(pe));
        Provenance pl;
        if (i == 0) acc = std::move(eq);
        else acc = combine_opt(p, acc, bag, eq, bag, GlueMatrix::identity(bag.size()), base, sign, &pl);
        f.leq.push_back(std::move(pl));
    }
    f.table = std::move(acc);
    return f;
}

/// Classes of the children (ascending child order) that realise class c of G_u.
inline std::vector<ClassId> unwind(const OptFold& f, ClassId c) {
    std::size_t q = f.eq.size();
    std::vector<ClassId> eq_class(q);
    for (std::size_t i = q; i-- > 1;) {
        auto [prev, eq] = f.leq[i].at(c);
        eq_class[i] = eq;
        c = prev;
    }
    if (q) eq_class[0] = c;
    std::vector<ClassId> out(q);
    for (std::size_t i = 0; i < q; ++i) out[i] = f.eq[i].at(eq_class[i]).first;
    return out;
}

struct ChildCount {
    std::vector<NodeId> bag;
    CountTable table;
};

inline CountTable fold_count(RegularPredicate& p, const std::vector<NodeId>& bag, const Graph& base,
                             const std::vector<ChildCount>& children) {
    CountTable base_table = base_count_table(p, base);
    if (children.empty()) return base_table;
    CountTable acc;
    for (std::size_t i = 0; i < children.size(); ++i) {
        CountTable eq = combine_count(p, children[i].table, base_table, glue_matrix_for(children[i].bag, bag));
        acc = i == 0 ? std::move(eq) : combine_count(p, acc, eq, GlueMatrix::identity(bag.size()));
    }
    return acc;
}

/// The part of a class's trace owned by node u: u itself, or u's edges to the rest of its bag.
inline Selection owned_selection(const Selection& s, NodeId u) {
    Selection out;
    if (std::binary_search(s.vertices.begin(), s.vertices.end(), u)) out.vertices.push_back(u);
    for (const Edge& e : s.edges)
        if (e.has(u)) out.edges.push_back(e);
    return out;
}

/// Matrix folding two disjoint components: side 1 is forgotten, the result keeps side 2's terminals.
inline GlueMatrix component_fold_matrix(std::size_t tau2) {
    GlueMatrix m;
    for (std::size_t i = 1; i <= tau2; ++i) m.rows.emplace_back(0, static_cast<int>(i));
    return m;
}

// ---------------------------------------------------------------------------------------------
// sequential engine

struct DpStats {
    std::map<NodeId, std::size_t> table_sizes;
    std::size_t class_count = 0;
};

struct OptResult {
    Weight value = 0;
    Selection witness;
    DpStats stats;
};

struct CountResult {
    BigInt count;
    DpStats stats;
};

struct DecideResult {
    bool verdict = false;
    DpStats stats;
};

namespace detail {

inline void check_width(const TreeDecomposition& td, const RegularPredicate& p) {
    if (static_cast<std::size_t>(td.width() + 1) > p.width())
        throw WidthExceeded("decomposition width " + std::to_string(td.width()) + " needs predicate width " +
                            std::to_string(td.width() + 1) + ", have " + std::to_string(p.width()));
}

inline void check_decomposition(const Graph& g, const TreeDecomposition& td, const RegularPredicate& p) {
    if (!validate_tree_decomposition(g, td)) throw InvalidForest("not a tree decomposition of the graph");
    check_width(td, p);
}

}  // namespace detail

/// Bottom-up decision. Predicates with free variables need a fixed assignment.
inline DecideResult decide(const Graph& g, const TreeDecomposition& td, RegularPredicate& p,
                           const std::optional<std::vector<Selection>>& fixed = std::nullopt) {
    detail::check_decomposition(g, td, p);
    if (!p.free_vars().empty() && !fixed) throw std::invalid_argument("decide needs an assignment of the free variables");
    std::vector<Selection> sets = fixed ? *fixed : std::vector<Selection>{};
    auto children = td.children();
    std::map<NodeId, ClassId> cls;
    DecideResult r;
    for (NodeId u : td.post_order()) {
        const auto& bag = td.bags.at(u);
        Graph base = g.induced(bag);
        ClassId b = p.classify_base(base, restrict_sets(sets, bag));
        std::vector<ChildClass> ch;
        for (NodeId v : children[u]) ch.push_back({td.bags.at(v), cls.at(v)});
        cls[u] = fold_decide(p, bag, b, ch);
        r.stats.table_sizes[u] = 1;
    }
    auto roots = td.roots();
    ClassId acc = cls.at(roots[0]);
    for (std::size_t i = 1; i < roots.size(); ++i)
        acc = p.compose(acc, cls.at(roots[i]), component_fold_matrix(td.bags.at(roots[i]).size()));
    r.verdict = p.is_accepting(acc);
    r.stats.class_count = p.class_count();
    return r;
}

/// Best (max, or min when !maximize) total weight of S with g |= phi(S), and a witness.
inline OptResult optimize(const Graph& g, const TreeDecomposition& td, RegularPredicate& p, bool maximize) {
    detail::check_decomposition(g, td, p);
    if (p.free_vars().size() != 1) throw std::invalid_argument("optimize needs exactly one free set variable");
    int sign = maximize ? 1 : -1;
    auto children = td.children();
    std::map<NodeId, OptFold> folds;
    OptResult r;
    for (NodeId u : td.post_order()) {
        const auto& bag = td.bags.at(u);
        std::vector<ChildOpt> ch;
        for (NodeId v : children[u]) ch.push_back({td.bags.at(v), folds.at(v).table});
        folds[u] = fold_opt(p, bag, g.induced(bag), sign, ch);
        r.stats.table_sizes[u] = folds[u].table.size();
    }
    // fold the components; shared elements are impossible, so the weight graph is irrelevant
    auto roots = td.roots();
    OptTable acc = folds.at(roots[0]).table;
    std::vector<Provenance> root_prov;
    for (std::size_t i = 1; i < roots.size(); ++i) {
        Provenance pr;
        const auto& prev_bag = td.bags.at(roots[i - 1]);
        const auto& rb = td.bags.at(roots[i]);
        acc = combine_opt(p, acc, prev_bag, folds.at(roots[i]).table, rb, component_fold_matrix(rb.size()), g, sign, &pr);
        root_prov.push_back(std::move(pr));
    }
    std::optional<ClassId> best;
    for (const auto& [c, v] : acc)
        if (p.is_accepting(c) && (!best || v > acc.at(*best))) best = c;
    if (!best) throw Unsatisfiable("no assignment satisfies the formula");
    r.value = sign * acc.at(*best);

    // top-down
    std::map<NodeId, ClassId> chosen;
    ClassId c = *best;
    for (std::size_t i = roots.size(); i-- > 1;) {
        auto [prev, mine] = root_prov[i - 1].at(c);
        chosen[roots[i]] = mine;
        c = prev;
    }
    chosen[roots[0]] = c;
    std::vector<NodeId> stack(roots.begin(), roots.end());
    std::set<NodeId> wv;
    std::set<Edge> we;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        ClassId cu = chosen.at(u);
        Selection mine = owned_selection(p.selected(cu, td.bags.at(u)), u);
        wv.insert(mine.vertices.begin(), mine.vertices.end());
        we.insert(mine.edges.begin(), mine.edges.end());
        auto cc = unwind(folds.at(u), cu);
        for (std::size_t i = 0; i < children[u].size(); ++i) {
            chosen[children[u][i]] = cc[i];
            stack.push_back(children[u][i]);
        }
    }
    r.witness.vertices.assign(wv.begin(), wv.end());
    r.witness.edges.assign(we.begin(), we.end());
    r.stats.class_count = p.class_count();
    return r;
}

/// Number of satisfying ordered assignments of the free variables.
inline CountResult count(const Graph& g, const TreeDecomposition& td, RegularPredicate& p) {
    detail::check_decomposition(g, td, p);
    auto children = td.children();
    std::map<NodeId, CountTable> tables;
    CountResult r;
    for (NodeId u : td.post_order()) {
        const auto& bag = td.bags.at(u);
        std::vector<ChildCount> ch;
        for (NodeId v : children[u]) ch.push_back({td.bags.at(v), tables.at(v)});
        tables[u] = fold_count(p, bag, g.induced(bag), ch);
        r.stats.table_sizes[u] = tables[u].size();
    }
    auto roots = td.roots();
    CountTable acc = tables.at(roots[0]);
    for (std::size_t i = 1; i < roots.size(); ++i)
        acc = combine_count(p, acc, tables.at(roots[i]), component_fold_matrix(td.bags.at(roots[i]).size()));
    for (const auto& [c, n] : acc)
        if (p.is_accepting(c)) r.count += n;
    r.stats.class_count = p.class_count();
    return r;
}

/// The set carrying `mark_label`, as a vertex or edge selection.
inline Selection marked_set(const Graph& g, const std::string& mark_label, Sort sort) {
    Selection s;
    if (is_vertex_kind(sort)) {
        for (NodeId x : g.nodes())
            if (g.vertex_has_label(x, mark_label)) s.vertices.push_back(x);
    } else {
        for (const Edge& e : g.edges())
            if (g.edge_has_label(e, mark_label)) s.edges.push_back(e);
    }
    return s;
}

/// True iff the marked set satisfies phi and its weight equals the optimum.
inline bool check_marked_optimal(const Graph& g, const TreeDecomposition& td, RegularPredicate& p,
                                 const std::string& mark_label, bool maximize) {
    if (p.free_vars().size() != 1) throw std::invalid_argument("optmarked needs exactly one free set variable");
    Selection marked = marked_set(g, mark_label, p.free_vars()[0].sort);
    if (!decide(g, td, p, std::vector<Selection>{marked}).verdict) return false;
    return optimize(g, td, p, maximize).value == selection_weight(g, marked);
}

// ---------------------------------------------------------------------------------------------
// reports

inline nlohmann::json selection_json(const Selection& s) {
    nlohmann::json j;
    j["vertices"] = s.vertices;
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : s.edges) edges.push_back({e.u, e.v});
    j["edges"] = edges;
    return j;
}

inline nlohmann::json stats_json(const DpStats& s) {
    nlohmann::json sizes = nlohmann::json::object();
    for (const auto& [u, n] : s.table_sizes) sizes[std::to_string(u)] = n;
    return {{"table_sizes", sizes}, {"class_count", s.class_count}};
}

inline nlohmann::json report_json(const DecideResult& r) {
    return {{"mode", "decide"}, {"verdict", r.verdict}, {"stats", stats_json(r.stats)}};
}

inline nlohmann::json report_json(const OptResult& r) {
    return {{"mode", "optimize"}, {"value", r.value}, {"witness", selection_json(r.witness)}, {"stats", stats_json(r.stats)}};
}

inline nlohmann::json report_json(const CountResult& r) {
    return {{"mode", "count"}, {"count", r.count.str()}, {"stats", stats_json(r.stats)}};
}

}  // namespace tdmso
