#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>

#include "tdmso/assignment.hpp"
#include "tdmso/formula.hpp"
#include "tdmso/treedepth.hpp"

namespace tdmso {

/// Exhaustive enumeration budget, in bits of enumerated assignments.
inline constexpr double kBruteForceBudgetBits = 30.0;

namespace detail {

inline double domain_bits(Sort s, std::size_t n, std::size_t m) {
    switch (s) {
        case Sort::Vertex: return n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
        case Sort::Edge: return m > 1 ? std::log2(static_cast<double>(m)) : 0.0;
        case Sort::VertexSet: return static_cast<double>(n);
        case Sort::EdgeSet: return static_cast<double>(m);
    }
    return 0.0;
}

// Cost of the most expensive chain of nested quantifiers.
inline double chain_bits(const Formula& f, std::size_t n, std::size_t m) {
    double best = 0.0;
    for (const auto& s : f.sub) best = std::max(best, chain_bits(*s, n, m));
    if (is_quantifier(f.kind)) best += domain_bits(f.sort, n, m);
    return best;
}

/// Evaluates formulas over bitmask encodings of vertex and edge sets (n, m <= 64).
class MaskEvaluator {
public:
    explicit MaskEvaluator(const Graph& g) : g_(g) {
        if (g.n() > 64 || g.m() > 64) throw SizeLimit("brute-force evaluation needs n, m <= 64");
        adj_.assign(g.n(), 0);
        inc_.assign(g.n(), 0);
        for (std::size_t i = 0; i < g.m(); ++i) {
            const Edge& e = g.edges()[i];
            auto a = g.index_of(e.u), b = g.index_of(e.v);
            adj_[a] |= bit(b);
            adj_[b] |= bit(a);
            inc_[a] |= bit(i);
            inc_[b] |= bit(i);
        }
    }

    struct Value {
        std::uint64_t mask;
        bool edge_kind;
    };
    using Env = std::vector<std::pair<std::string, Value>>;

    bool eval(const Formula& f, Env& env) {
        switch (f.kind) {
            case Kind::Adj: {
                auto a = get(env, f.vars[0]).mask, b = get(env, f.vars[1]).mask;
                std::uint64_t nb = 0;
                for (auto r = a; r; r &= r - 1) nb |= adj_[std::countr_zero(r)];
                return (nb & b) != 0;
            }
            case Kind::Inc: {
                auto a = get(env, f.vars[0]).mask, b = get(env, f.vars[1]).mask;
                std::uint64_t ie = 0;
                for (auto r = a; r; r &= r - 1) ie |= inc_[std::countr_zero(r)];
                return (ie & b) != 0;
            }
            case Kind::Eq: return get(env, f.vars[0]).mask == get(env, f.vars[1]).mask;
            case Kind::In:
            case Kind::Sub: {
                auto a = get(env, f.vars[0]).mask, b = get(env, f.vars[1]).mask;
                return (a & ~b) == 0;
            }
            case Kind::Sing: return std::popcount(get(env, f.vars[0]).mask) == 1;
            case Kind::Label: {
                Value v = get(env, f.vars[0]);
                return (v.mask & ~label_mask(f.label, v.edge_kind)) == 0;
            }
            case Kind::Not: return !eval(*f.sub[0], env);
            case Kind::And: return eval(*f.sub[0], env) && eval(*f.sub[1], env);
            case Kind::Or: return eval(*f.sub[0], env) || eval(*f.sub[1], env);
            case Kind::Implies: return !eval(*f.sub[0], env) || eval(*f.sub[1], env);
            case Kind::Exists:
            case Kind::Forall: {
                bool exists = f.kind == Kind::Exists;
                bool found = for_each_value(f.sort, [&](std::uint64_t mask) {
                    env.emplace_back(f.vars[0], Value{mask, !is_vertex_kind(f.sort)});
                    bool r = eval(*f.sub[0], env);
                    env.pop_back();
                    return exists ? r : !r;
                });
                return exists ? found : !found;
            }
        }
        return false;
    }

    /// Calls fn for every value of the sort until fn returns true; returns whether it did.
    template <class Fn>
    bool for_each_value(Sort s, Fn&& fn) const {
        std::size_t k = is_vertex_kind(s) ? g_.n() : g_.m();
        if (!is_set_sort(s)) {
            for (std::size_t i = 0; i < k; ++i)
                if (fn(bit(i))) return true;
            return false;
        }
        std::uint64_t count = std::uint64_t{1} << k;
        for (std::uint64_t mask = 0; mask < count; ++mask)
            if (fn(mask)) return true;
        return false;
    }

    Value encode(Sort s, const AssignmentValue& v) const {
        Value out{0, !is_vertex_kind(s)};
        auto vertex = [&](NodeId x) {
            if (!g_.has_node(x)) throw std::invalid_argument("assignment names unknown node " + std::to_string(x));
            out.mask |= bit(g_.index_of(x));
        };
        auto edge = [&](const Edge& e) { out.mask |= bit(g_.edge_position(e)); };
        bool ok = std::visit(
            [&](const auto& val) {
                using T = std::decay_t<decltype(val)>;
                if constexpr (std::is_same_v<T, NodeId>) {
                    if (s != Sort::Vertex) return false;
                    vertex(val);
                } else if constexpr (std::is_same_v<T, Edge>) {
                    if (s != Sort::Edge) return false;
                    edge(val);
                } else if constexpr (std::is_same_v<T, std::vector<NodeId>>) {
                    if (s != Sort::VertexSet) return false;
                    for (NodeId x : val) vertex(x);
                } else {
                    if (s != Sort::EdgeSet) return false;
                    for (const Edge& e : val) edge(e);
                }
                return true;
            },
            v);
        if (!ok) throw std::invalid_argument("assignment value does not match the declared sort");
        return out;
    }

    Selection decode(Value v) const {
        Selection s;
        for (auto r = v.mask; r; r &= r - 1) {
            auto i = static_cast<std::size_t>(std::countr_zero(r));
            if (v.edge_kind) s.edges.push_back(g_.edges()[i]);
            else s.vertices.push_back(g_.nodes()[i]);
        }
        return s;
    }

    Weight weight(Value v) const {
        Weight w = 0;
        for (auto r = v.mask; r; r &= r - 1) {
            auto i = static_cast<std::size_t>(std::countr_zero(r));
            w += v.edge_kind ? g_.edge_weight(g_.edges()[i]) : g_.vertex_weight(g_.nodes()[i]);
        }
        return w;
    }

private:
    static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

    static Value get(const Env& env, const std::string& name) {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == name) return it->second;
        throw std::logic_error("unbound variable " + name);
    }

    std::uint64_t label_mask(const std::string& label, bool edge_kind) {
        auto& cache = edge_kind ? elabel_ : vlabel_;
        auto it = cache.find(label);
        if (it != cache.end()) return it->second;
        std::uint64_t m = 0;
        if (edge_kind) {
            for (std::size_t i = 0; i < g_.m(); ++i)
                if (g_.edge_has_label(g_.edges()[i], label)) m |= bit(i);
        } else {
            for (std::size_t i = 0; i < g_.n(); ++i)
                if (g_.vertex_has_label(g_.nodes()[i], label)) m |= bit(i);
        }
        cache.emplace(label, m);
        return m;
    }

    const Graph& g_;
    std::vector<std::uint64_t> adj_, inc_;
    std::unordered_map<std::string, std::uint64_t> vlabel_, elabel_;
};

inline void check_budget(const MsoFormula& f, const Graph& g, bool enumerate_free) {
    double bits = chain_bits(*f.body(), g.n(), g.m());
    if (enumerate_free)
        for (const auto& v : f.free_vars()) bits += domain_bits(v.sort, g.n(), g.m());
    if (bits > kBruteForceBudgetBits)
        throw SizeLimit("brute-force enumeration of 2^" + std::to_string(bits) + " assignments exceeds the budget");
}

}  // namespace detail

/// Ground-truth semantics by recursive enumeration.
inline bool eval_bruteforce(const Graph& g, const MsoFormula& f, const Assignment& a = {}) {
    detail::check_budget(f, g, false);
    detail::MaskEvaluator ev(g);
    detail::MaskEvaluator::Env env;
    for (const auto& v : f.free_vars()) {
        auto it = a.find(v.name);
        if (it == a.end()) throw std::invalid_argument("free variable '" + v.name + "' is unassigned");
        env.emplace_back(v.name, ev.encode(v.sort, it->second));
    }
    return ev.eval(*f.body(), env);
}

struct BruteOptResult {
    std::optional<Weight> value;  // empty when no set satisfies the formula
    Selection witness;
};

/// Best total weight of S over all S with g |= f(S). f must have exactly one free set variable.
inline BruteOptResult opt_bruteforce(const Graph& g, const MsoFormula& f, bool maximize) {
    if (f.free_count() != 1 || !is_set_sort(f.free_vars()[0].sort))
        throw std::invalid_argument("opt_bruteforce needs exactly one free set variable");
    detail::check_budget(f, g, true);
    detail::MaskEvaluator ev(g);
    const auto& var = f.free_vars()[0];
    BruteOptResult best;
    std::uint64_t best_mask = 0;
    ev.for_each_value(var.sort, [&](std::uint64_t mask) {
        detail::MaskEvaluator::Value val{mask, !is_vertex_kind(var.sort)};
        detail::MaskEvaluator::Env env{{var.name, val}};
        if (ev.eval(*f.body(), env)) {
            Weight w = ev.weight(val);
            if (!best.value || (maximize ? w > *best.value : w < *best.value)) {
                best.value = w;
                best_mask = mask;
            }
        }
        return false;
    });
    if (best.value) best.witness = ev.decode({best_mask, !is_vertex_kind(var.sort)});
    return best;
}

/// Number of satisfying ordered assignments of the free-variable tuple.
inline BigInt count_bruteforce(const Graph& g, const MsoFormula& f) {
    detail::check_budget(f, g, true);
    detail::MaskEvaluator ev(g);
    detail::MaskEvaluator::Env env;
    BigInt total = 0;
    const auto& vars = f.free_vars();
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == vars.size()) {
            if (ev.eval(*f.body(), env)) total += 1;
            return;
        }
        ev.for_each_value(vars[k].sort, [&](std::uint64_t mask) {
            env.emplace_back(vars[k].name, detail::MaskEvaluator::Value{mask, !is_vertex_kind(vars[k].sort)});
            rec(k + 1);
            env.pop_back();
            return false;
        });
    };
    rec(0);
    return total;
}

}  // namespace tdmso
