#pragma once

#include "tdmso/formula.hpp"

namespace tdmso {

namespace detail {

inline FormulaPtr normalize_body(const FormulaPtr& f) {
    switch (f->kind) {
        case Kind::In: return Formula::atom(Kind::Sub, f->vars);
        case Kind::Adj:
        case Kind::Inc:
        case Kind::Eq:
        case Kind::Sub:
        case Kind::Sing:
        case Kind::Label: return f;
        case Kind::Not: return Formula::negate(normalize_body(f->sub[0]));
        case Kind::And:
        case Kind::Or: return Formula::binary(f->kind, normalize_body(f->sub[0]), normalize_body(f->sub[1]));
        case Kind::Implies:
            return Formula::binary(Kind::Or, Formula::negate(normalize_body(f->sub[0])), normalize_body(f->sub[1]));
        case Kind::Exists:
        case Kind::Forall: {
            const std::string& x = f->vars[0];
            bool element = !is_set_sort(f->sort);
            Sort s = set_sort_of(f->sort);
            auto body = normalize_body(f->sub[0]);
            if (f->kind == Kind::Forall) body = Formula::negate(body);
            if (element) body = Formula::binary(Kind::And, Formula::atom(Kind::Sing, {x}), body);
            auto ex = Formula::quant(Kind::Exists, s, x, body);
            return f->kind == Kind::Forall ? Formula::negate(ex) : ex;
        }
    }
    return f;
}

}  // namespace detail

/// Rewrites into the set-only fragment: element variables become singleton-constrained set
/// variables, universal quantifiers become negated existentials, implications are eliminated and
/// membership becomes inclusion. Idempotent.
inline MsoFormula normalize(const MsoFormula& f) {
    auto body = detail::normalize_body(f.body());
    std::vector<FreeVar> free;
    std::vector<FormulaPtr> guards;
    for (const auto& v : f.free_vars()) {
        free.push_back({v.name, set_sort_of(v.sort)});
        if (!is_set_sort(v.sort)) guards.push_back(Formula::atom(Kind::Sing, {v.name}));
    }
    if (!guards.empty()) {
        FormulaPtr g = guards[0];
        for (std::size_t i = 1; i < guards.size(); ++i) g = Formula::binary(Kind::And, g, guards[i]);
        body = Formula::binary(Kind::And, g, body);
    }
    return MsoFormula(std::move(free), std::move(body));
}

inline bool is_normalized(const Formula& f) {
    if (f.kind == Kind::In || f.kind == Kind::Implies || f.kind == Kind::Forall) return false;
    if (f.kind == Kind::Exists && !is_set_sort(f.sort)) return false;
    for (const auto& s : f.sub)
        if (!is_normalized(*s)) return false;
    return true;
}

inline bool is_normalized(const MsoFormula& f) {
    for (const auto& v : f.free_vars())
        if (!is_set_sort(v.sort)) return false;
    return is_normalized(*f.body());
}

}  // namespace tdmso
