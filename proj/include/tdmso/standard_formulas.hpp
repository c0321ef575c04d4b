#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tdmso/formula.hpp"

namespace tdmso {

struct NamedFormula {
    std::string name;
    std::string text;
};

/// Sentences used by the decision checks.
inline const std::vector<NamedFormula>& standard_sentences() {
    static const std::vector<NamedFormula> list = {
        {"triangle_free", "~exists_v x. exists_v y. exists_v z. (adj(x,y) & adj(y,z) & adj(x,z))"},
        {"acyclic",
         "~exists_vs X. ((exists_v a. a in X) & forall_v x. (x in X -> exists_v y1. exists_v y2. "
         "(y1 in X & y2 in X & ~(y1 = y2) & adj(x,y1) & adj(x,y2))))"},
        {"two_coloring",
         "(forall_v x. (label(red,x) | label(blue,x))) & forall_v x. forall_v y. "
         "~(adj(x,y) & ((label(red,x) & label(red,y)) | (label(blue,x) & label(blue,y))))"},
        {"three_colorable",
         "exists_vs R. exists_vs G. forall_v x. forall_v y. (adj(x,y) -> "
         "~((x in R & y in R) | (x in G & y in G) | (~(x in R) & ~(x in G) & ~(y in R) & ~(y in G))))"},
        {"connected",
         "forall_vs X. (((exists_v a. a in X) & (exists_v b. ~(b in X))) -> "
         "exists_v x. exists_v y. (x in X & ~(y in X) & adj(x,y)))"},
        {"bipartite", "exists_vs X. forall_v x. forall_v y. (adj(x,y) -> ~((x in X & y in X) | (~(x in X) & ~(y in X))))"},
        {"has_k3", "exists_v x. exists_v y. exists_v z. (adj(x,y) & adj(y,z) & adj(x,z))"},
        {"has_p4",
         "exists_v a. exists_v b. exists_v c. exists_v d. (~(a = c) & ~(a = d) & ~(b = d) & "
         "adj(a,b) & adj(b,c) & adj(c,d))"},
        {"has_c4",
         "exists_v a. exists_v b. exists_v c. exists_v d. (~(a = c) & ~(b = d) & "
         "adj(a,b) & adj(b,c) & adj(c,d) & adj(d,a))"},
        {"has_degree_3",
         "exists_v x. exists_v a. exists_v b. exists_v c. (~(a = b) & ~(a = c) & ~(b = c) & "
         "adj(x,a) & adj(x,b) & adj(x,c))"},
        {"dominating_vertex", "exists_v x. forall_v y. (y = x | adj(x,y))"},
    };
    return list;
}

/// Formulas with one free vertex set, for optimization.
inline const std::vector<NamedFormula>& standard_set_formulas() {
    static const std::vector<NamedFormula> list = {
        {"independent_set", "free vs S forall_v x. forall_v y. ((x in S & y in S) -> ~adj(x,y))"},
        {"vertex_cover", "free vs S forall_v x. forall_v y. (adj(x,y) -> (x in S | y in S))"},
        {"dominating_set", "free vs S forall_v x. (x in S | exists_v y. (y in S & adj(x,y)))"},
    };
    return list;
}

/// Formulas with free variables, for counting.
inline const std::vector<NamedFormula>& standard_count_formulas() {
    static const std::vector<NamedFormula> list = {
        {"triangles", "free v x1 free v x2 free v x3 adj(x1,x2) & adj(x2,x3) & adj(x3,x1)"},
        {"perfect_matchings",
         "free es M forall_v x. exists_e e. (e in M & inc(x,e) & forall_e f. ((f in M & inc(x,f)) -> f = e))"},
        {"independent_sets", "free vs S forall_v x. forall_v y. ((x in S & y in S) -> ~adj(x,y))"},
        {"dominating_sets", "free vs S forall_v x. (x in S | exists_v y. (y in S & adj(x,y)))"},
    };
    return list;
}

inline MsoFormula named_formula(const std::string& name) {
    for (const auto* list : {&standard_sentences(), &standard_set_formulas(), &standard_count_formulas()})
        for (const auto& f : *list)
            if (f.name == name) return parse_formula(f.text);
    throw std::invalid_argument("unknown formula name '" + name + "'");
}

}  // namespace tdmso
