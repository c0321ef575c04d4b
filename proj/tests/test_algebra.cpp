// w-terminal graphs, compiled and hand-written predicates, sequential DP.

#include <gtest/gtest.h>

#include <random>

#include "tdmso/acceptance.hpp"
#include "tdmso/builtin_predicates.hpp"
#include "tdmso/compiled_mso.hpp"
#include "tdmso/dp_engine.hpp"
#include "tdmso/generators.hpp"
#include "tdmso/standard_formulas.hpp"

using namespace tdmso;

namespace {

WTerminalGraph edge_2t(NodeId a, NodeId b) {
    GraphBuilder gb;
    gb.add_node(a).add_node(b).add_edge(a, b);
    return make_base(gb.build());
}

TreeDecomposition best_td(const Graph& g) { return canonical_decomposition(g, exact_treedepth(g).forest); }

Graph marked(const Graph& g, std::vector<NodeId> xs) {
    Selection s;
    s.vertices = std::move(xs);
    std::sort(s.vertices.begin(), s.vertices.end());
    return acceptance::with_marks(g, s, "mark");
}

}  // namespace

// glue ----------------------------------------------------------------------------------------

TEST(Glue, TwoEdgesMakeAPath) {
    // end-to-end: terminal 2 of the first edge meets terminal 1 of the second
    GlueMatrix m;
    m.rows = {{1, 0}, {2, 1}, {0, 2}};
    WTerminalGraph p3 = glue(edge_2t(1, 2), edge_2t(1, 2), m);
    EXPECT_EQ(p3.graph.n(), 3u);
    EXPECT_EQ(p3.graph.m(), 2u);
    EXPECT_EQ(p3.tau(), 3u);
    EXPECT_EQ(exact_treedepth(p3.graph).depth, 2);
}

TEST(Glue, IdentityUnitesEdgeSets) {
    GraphBuilder a, b;
    a.add_node(1).add_node(2).add_node(3).add_edge(1, 2);
    b.add_node(1).add_node(2).add_node(3).add_edge(2, 3);
    WTerminalGraph g = glue(make_base(a.build()), make_base(b.build()), GlueMatrix::identity(3));
    EXPECT_EQ(g.graph.n(), 3u);
    EXPECT_EQ(g.graph.m(), 2u);
}

TEST(Glue, CountsFollowInclusionExclusion) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 200; ++k) {
        IndependentSet dummy(4);
        auto a = acceptance::detail7::random_wgraph(dummy, 4, 2, rng);
        auto b = acceptance::detail7::random_wgraph(dummy, 4, 2, rng);
        a.sets.clear();
        b.sets.clear();
        GlueMatrix m = acceptance::detail7::random_matrix(a.tau(), b.tau(), 4, rng);
        std::size_t shared = 0, shared_edges = 0;
        for (auto [x, y] : m.rows) shared += x && y;
        for (const Edge& e : a.graph.edges()) {
            int ra = a.rank_of(e.u) + 1, rb = a.rank_of(e.v) + 1;
            int ia = -1, ib = -1;
            for (std::size_t r = 0; r < m.rows.size(); ++r) {
                if (m.rows[r].first == ra && m.rows[r].second) ia = m.rows[r].second;
                if (m.rows[r].first == rb && m.rows[r].second) ib = m.rows[r].second;
            }
            if (ra > 0 && rb > 0 && ia > 0 && ib > 0 && b.graph.has_edge(b.terminals[ia - 1], b.terminals[ib - 1]))
                ++shared_edges;
        }
        WTerminalGraph g = glue(a, b, m);
        EXPECT_EQ(g.graph.n(), a.graph.n() + b.graph.n() - shared);
        EXPECT_EQ(g.graph.m(), a.graph.m() + b.graph.m() - shared_edges);
        EXPECT_EQ(g.tau(), m.tau());
    }
}

TEST(Glue, MatrixForCanonicalBags) {
    EXPECT_EQ(glue_matrix_for({1, 2, 3}, {1, 2, 3}), GlueMatrix::identity(3));
    GlueMatrix m = glue_matrix_for({1, 2}, {2});
    ASSERT_EQ(m.rows.size(), 1u);
    EXPECT_EQ(m.rows[0], std::make_pair(2, 1));
    GlueMatrix bad;
    bad.rows = {{1, 1}, {1, 2}};
    EXPECT_THROW(bad.validate(2, 2), BadMatrix);
    bad.rows = {{0, 0}};
    EXPECT_THROW(bad.validate(1, 1), BadMatrix);
}

// compiled predicates -------------------------------------------------------------------------

TEST(CompiledMso, TriangleClasses) {
    auto p = compile_mso(named_formula("triangle_free"), 3);
    EXPECT_FALSE(p->is_accepting(p->classify_base(make_complete(3), {})));
    EXPECT_TRUE(p->is_accepting(p->classify_base(make_path(3), {})));
    EXPECT_EQ(p->classify_base(make_path(3), {}), p->classify_base(make_path(3), {}));
    EXPECT_NE(p->classify_base(make_path(2), {}), p->classify_base(random_gnp(2, 0.0, 1), {}));
}

TEST(CompiledMso, TautologyAcceptsEverything) {
    auto p = compile_mso(parse_formula("forall_vs X. X = X"), 3);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) EXPECT_TRUE(p->is_accepting(p->classify_base(random_gnp(1 + rng() % 3, 0.5, rng()), {})));
}

TEST(CompiledMso, TriangleAppearsOnlyAfterGluing) {
    auto p = compile_mso(named_formula("triangle_free"), 3);
    // path 1-2-3 with terminals 1 and 3, glued with the edge 1-3
    GraphBuilder b;
    b.add_node(1).add_node(2).add_node(3).add_edge(1, 2).add_edge(2, 3);
    WTerminalGraph half{b.build(), {1, 3}, {}};
    GlueMatrix m = GlueMatrix::identity(2);
    ClassId c1 = p->classify(half), c2 = p->classify(edge_2t(1, 3));
    EXPECT_TRUE(p->is_accepting(c1));
    EXPECT_TRUE(p->is_accepting(c2));
    EXPECT_FALSE(p->is_accepting(p->compose(c1, c2, m)));
}

TEST(CompiledMso, SingletonGlueIsIdempotent) {
    auto p = compile_mso(named_formula("connected"), 2);
    ClassId c = p->classify_base(make_path(1), {});
    EXPECT_EQ(p->compose(c, c, GlueMatrix::identity(1)), c);
}

TEST(CompiledMso, HomomorphismProperty) {
    std::mt19937_64 rng(99);
    std::vector<std::unique_ptr<RegularPredicate>> preds;
    preds.push_back(compile_mso(named_formula("acyclic"), 4));
    preds.push_back(compile_mso(named_formula("dominating_set"), 4));
    preds.push_back(compile_mso(named_formula("perfect_matchings"), 4));
    preds.push_back(compile_mso(named_formula("triangles"), 4));
    for (auto& p : preds)
        for (int k = 0; k < 300; ++k) {
            auto a = acceptance::detail7::random_wgraph(*p, 3, 2, rng);
            auto b = acceptance::detail7::random_wgraph(*p, 3, 2, rng);
            EXPECT_EQ(acceptance::detail7::check_law(*p, a, b, acceptance::detail7::random_matrix(a.tau(), b.tau(), 4, rng)), 0u)
                << p->name();
        }
}

TEST(CompiledMso, SelectedDecodesTrace) {
    auto p = compile_mso(named_formula("independent_set"), 3);
    Selection s;
    s.vertices = {1, 3};
    ClassId c = p->classify_base(make_path(3), {s});
    EXPECT_EQ(p->selected(c, {10, 20, 30}).vertices, (std::vector<NodeId>{10, 30}));
    ClassId e = p->classify_base(make_path(3), {Selection{}});
    EXPECT_TRUE(p->selected(e, {10, 20, 30}).empty());
}

TEST(CompiledMso, FrozenPredicateRefusesNewClasses) {
    auto p = compile_mso(named_formula("triangle_free"), 3);
    p->classify_base(make_path(2), {});
    p->freeze();
    EXPECT_THROW(p->classify_base(make_complete(3), {}), BudgetError);
    p->thaw();
    EXPECT_NO_THROW(p->classify_base(make_complete(3), {}));
}

// hand-written predicates ---------------------------------------------------------------------

TEST(Builtin, Examples) {
    auto k3 = builtin_predicate("k_colorable", 4, 3);
    EXPECT_FALSE(decide(make_complete(4), best_td(make_complete(4)), *k3).verdict);
    EXPECT_TRUE(decide(make_cycle(5), best_td(make_cycle(5)), *k3).verdict);
    auto is = builtin_predicate("independent_set", 4);
    EXPECT_EQ(optimize(make_cycle(5), best_td(make_cycle(5)), *is, true).value, 2);
    auto st = builtin_predicate("spanning_tree_marked", 3);
    Selection both;
    both.edges = {Edge(1, 2), Edge(2, 3)};
    EXPECT_TRUE(decide(make_path(3), best_td(make_path(3)), *st, std::vector<Selection>{both}).verdict);
    Selection one;
    one.edges = {Edge(1, 2)};
    EXPECT_FALSE(decide(make_path(3), best_td(make_path(3)), *st, std::vector<Selection>{one}).verdict);
    EXPECT_THROW(builtin_predicate("hamiltonian", 3), UnknownName);
}

TEST(Builtin, AgreeWithFormulas) {
    std::mt19937_64 rng(4);
    for (const auto& nf : standard_set_formulas()) {
        auto p = builtin_predicate(nf.name, 6);
        MsoFormula f = parse_formula(nf.text);
        for (int k = 0; k < 40; ++k) {
            Graph g = with_random_weights(random_gnp(1 + rng() % 6, 0.5, rng()), 1, 8, rng());
            bool maximize = nf.name == "independent_set";
            auto r = optimize(g, best_td(g), *p, maximize);
            EXPECT_EQ(r.value, *opt_bruteforce(g, f, maximize).value) << nf.name;
            EXPECT_TRUE(eval_bruteforce(g, f, {{"S", r.witness.vertices}}));
            EXPECT_EQ(selection_weight(g, r.witness), r.value);
        }
    }
}

// sequential DP -------------------------------------------------------------------------------

TEST(Dp, DecideExamples) {
    auto tf = compile_mso(named_formula("triangle_free"), 4);
    EXPECT_TRUE(decide(make_cycle(4), best_td(make_cycle(4)), *tf).verdict);
    EXPECT_FALSE(decide(make_complete(4), best_td(make_complete(4)), *tf).verdict);
}

TEST(Dp, OptimizeExamples) {
    auto is = compile_mso(named_formula("independent_set"), 4);
    auto r = optimize(make_cycle(5), best_td(make_cycle(5)), *is, true);
    EXPECT_EQ(r.value, 2);
    EXPECT_TRUE(eval_bruteforce(make_cycle(5), named_formula("independent_set"), {{"S", r.witness.vertices}}));
    auto vc = compile_mso(named_formula("vertex_cover"), 4);
    EXPECT_EQ(optimize(make_complete(3), best_td(make_complete(3)), *vc, false).value, 2);
    GraphBuilder b;
    b.add_node(1, {}, 7);
    Graph one = b.build();
    auto s = optimize(one, best_td(one), *is, true);
    EXPECT_EQ(s.value, 7);
    EXPECT_EQ(s.witness.vertices, std::vector<NodeId>{1});
}

TEST(Dp, CountExamples) {
    auto tri = compile_mso(named_formula("triangles"), 4);
    EXPECT_EQ(count(make_complete(4), best_td(make_complete(4)), *tri).count, 24);
    EXPECT_EQ(count(make_path(5), best_td(make_path(5)), *tri).count, 0);
    auto pm = compile_mso(named_formula("perfect_matchings"), 6);
    EXPECT_EQ(count(make_cycle(6), best_td(make_cycle(6)), *pm).count, 2);
}

TEST(Dp, MarkedOptimality) {
    auto is = compile_mso(named_formula("independent_set"), 4);
    Graph c5 = make_cycle(5);
    auto td = best_td(c5);
    EXPECT_TRUE(check_marked_optimal(marked(c5, {1, 3}), td, *is, "mark", true));
    EXPECT_FALSE(check_marked_optimal(marked(c5, {1}), td, *is, "mark", true));
    EXPECT_FALSE(check_marked_optimal(marked(c5, {1, 2}), td, *is, "mark", true));
}

TEST(Dp, SweepAgainstOracle) {
    std::mt19937_64 rng(17);
    for (const char* name : {"acyclic", "connected", "has_p4", "dominating_vertex"}) {
        MsoFormula f = named_formula(name);
        auto p = compile_mso(f, 6);
        for (int k = 0; k < 30; ++k) {
            Graph g = random_gnp(1 + rng() % 6, 0.45, rng());
            EXPECT_EQ(decide(g, best_td(g), *p).verdict, eval_bruteforce(g, f)) << name;
        }
    }
}
