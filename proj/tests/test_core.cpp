// Graph model, formulas, brute-force oracles, treedepth, generators.

#include <gtest/gtest.h>

#include <random>

#include "tdmso/bruteforce.hpp"
#include "tdmso/generators.hpp"
#include "tdmso/graph_io.hpp"
#include "tdmso/normalize.hpp"
#include "tdmso/standard_formulas.hpp"
#include "tdmso/treedepth.hpp"

using namespace tdmso;

namespace {

Graph labelled(std::initializer_list<std::pair<NodeId, const char*>> nodes, std::initializer_list<Edge> edges) {
    GraphBuilder b;
    for (auto [x, l] : nodes) b.add_node(x, l[0] ? LabelSet{l} : LabelSet{});
    for (const Edge& e : edges) b.add_edge(e.u, e.v);
    return b.build();
}

int bfs_components(const Graph& g, const std::vector<NodeId>& keep) {
    std::set<NodeId> left(keep.begin(), keep.end());
    int c = 0;
    while (!left.empty()) {
        ++c;
        std::vector<NodeId> q{*left.begin()};
        left.erase(left.begin());
        while (!q.empty()) {
            NodeId x = q.back();
            q.pop_back();
            for (NodeId y : g.neighbors(x))
                if (left.erase(y)) q.push_back(y);
        }
    }
    return c;
}

}  // namespace

// graph model ---------------------------------------------------------------------------------

TEST(Graph, RejectsSelfLoopsDuplicatesAndDanglingEdges) {
    GraphBuilder b;
    b.add_node(1).add_node(2);
    EXPECT_THROW(b.add_edge(1, 1), GraphError);
    b.add_edge(1, 2);
    EXPECT_THROW(b.add_edge(2, 1), GraphError);
    EXPECT_THROW(b.add_edge(1, 3), GraphError);
    EXPECT_THROW(b.add_node(1), GraphError);
    EXPECT_THROW(b.add_node(0), GraphError);
}

TEST(Graph, WeightBoundIsPolynomial) {
    GraphBuilder b;
    b.add_node(1, {}, 8).add_node(2, {}, -8);
    EXPECT_NO_THROW(b.build());
    GraphBuilder c;
    c.add_node(1, {}, 9).add_node(2);
    EXPECT_THROW(c.build(), GraphError);
}

TEST(Graph, InducedSubgraphKeepsAttributes) {
    GraphBuilder b;
    b.add_node(1, {"red"}, 2).add_node(2).add_node(3).add_edge(1, 2, {"x"}, 3).add_edge(2, 3);
    Graph g = b.build();
    Graph h = g.induced({1, 2});
    EXPECT_EQ(h.n(), 2u);
    EXPECT_EQ(h.m(), 1u);
    EXPECT_TRUE(h.vertex_has_label(1, "red"));
    EXPECT_EQ(h.edge_weight(Edge(1, 2)), 3);
}

TEST(GraphIo, RoundTrip) {
    GraphBuilder b;
    b.add_node(3, {"red", "blue"}, 4).add_node(7).add_edge(3, 7, {"mark"}, -2);
    Graph g = b.build();
    EXPECT_EQ(parse_graph(format_graph(g)), g);
}

TEST(GraphIo, ReportsLineOfError) {
    try {
        parse_graph("graph 2 1\nnode 1\nnode 2\nedge 1 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    EXPECT_THROW(parse_graph("graph 2 0\nnode 1\n"), ParseError);
    EXPECT_THROW(parse_graph("node 1\n"), ParseError);
}

// formulas ------------------------------------------------------------------------------------

TEST(Formula, ParsesTriangleFreenessWithRank) {
    MsoFormula f = parse_formula("~ exists_v x1. exists_v x2. exists_v x3. (adj(x1,x2) & adj(x2,x3) & adj(x3,x1))");
    EXPECT_EQ(f.rank(), 3);
    EXPECT_EQ(f.free_count(), 0u);
    EXPECT_EQ(parse_formula(to_string(f)), f);
}

TEST(Formula, SortErrors) {
    EXPECT_NO_THROW(parse_formula("exists_v x. adj(x,x)"));
    EXPECT_THROW(parse_formula("exists_vs X. v in X"), SortError);
    EXPECT_THROW(parse_formula("exists_e e. adj(e,e)"), SortError);
    EXPECT_THROW(parse_formula("exists_v x. (adj(x,"), SyntaxError);
}

TEST(Formula, NormalizeKeepsTruthAndIsIdempotent) {
    MsoFormula loop = parse_formula("exists_v x. adj(x,x)");
    MsoFormula n = normalize(loop);
    EXPECT_TRUE(is_normalized(n));
    EXPECT_EQ(normalize(n), n);
    MsoFormula tf = named_formula("triangle_free");
    MsoFormula ntf = normalize(tf);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 60; ++k) {
        Graph g = random_gnp(1 + rng() % 6, 0.5, rng());
        EXPECT_FALSE(eval_bruteforce(g, n));
        EXPECT_EQ(eval_bruteforce(g, ntf), eval_bruteforce(g, tf));
    }
}

// brute force ---------------------------------------------------------------------------------

TEST(BruteForce, SentenceExamples) {
    EXPECT_FALSE(eval_bruteforce(make_complete(3), named_formula("triangle_free")));
    EXPECT_TRUE(eval_bruteforce(make_path(4), named_formula("acyclic")));
    EXPECT_FALSE(eval_bruteforce(make_cycle(4), named_formula("acyclic")));
    Graph c4 = labelled({{1, "red"}, {2, "blue"}, {3, "red"}, {4, "blue"}}, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
    EXPECT_TRUE(eval_bruteforce(c4, named_formula("two_coloring")));
    Graph bad = labelled({{1, "red"}, {2, "red"}, {3, "red"}, {4, "blue"}}, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
    EXPECT_FALSE(eval_bruteforce(bad, named_formula("two_coloring")));
}

TEST(BruteForce, OptimizationExamples) {
    EXPECT_EQ(*opt_bruteforce(make_cycle(5), named_formula("independent_set"), true).value, 2);
    EXPECT_EQ(*opt_bruteforce(make_complete(3), named_formula("vertex_cover"), false).value, 2);
    EXPECT_EQ(*opt_bruteforce(make_path(3), named_formula("independent_set"), false).value, 0);
    EXPECT_FALSE(opt_bruteforce(make_path(2), parse_formula("free vs S exists_v x. (x in S & ~(x = x))"), true).value);
}

TEST(BruteForce, CountingExamples) {
    EXPECT_EQ(count_bruteforce(make_complete(4), named_formula("triangles")), 24);
    EXPECT_EQ(count_bruteforce(make_cycle(6), named_formula("perfect_matchings")), 2);
    EXPECT_EQ(count_bruteforce(make_path(3), parse_formula("free v x1 x1 = x1")), 3);
    EXPECT_EQ(count_bruteforce(make_path(3), parse_formula("free v x1 ~(x1 = x1)")), 0);
}

TEST(BruteForce, AssignmentsAreChecked) {
    MsoFormula is = named_formula("independent_set");
    EXPECT_TRUE(eval_bruteforce(make_cycle(5), is, {{"S", std::vector<NodeId>{1, 3}}}));
    EXPECT_FALSE(eval_bruteforce(make_cycle(5), is, {{"S", std::vector<NodeId>{1, 2}}}));
}

// treedepth -----------------------------------------------------------------------------------

TEST(Treedepth, Examples) {
    EXPECT_EQ(exact_treedepth(make_path(1)).depth, 1);
    EXPECT_EQ(exact_treedepth(make_path(7)).depth, 3);
    EXPECT_EQ(exact_treedepth(make_complete(4)).depth, 4);
    EXPECT_EQ(exact_treedepth(make_star(5)).depth, 2);
    EXPECT_THROW(exact_treedepth(make_path(13)), SizeLimit);
    EXPECT_EQ(exact_treedepth(make_path(31), 31).depth, 5);
}

TEST(Treedepth, CheckElimination) {
    Graph star = make_star(3);
    EliminationForest f;
    f.parent = {{1, 1}, {2, 1}, {3, 1}, {4, 1}};
    f.recompute_depths();
    EXPECT_TRUE(check_elimination_forest(star, f));
    // path 1-2-3 with root 1: edge {2,3} joins siblings
    EliminationForest g;
    g.parent = {{1, 1}, {2, 1}, {3, 1}};
    g.recompute_depths();
    EXPECT_FALSE(check_elimination_forest(make_path(3), g));
    std::mt19937_64 rng(11);
    for (int k = 0; k < 40; ++k) {
        Graph h = random_gnp(1 + rng() % 9, 0.4, rng());
        auto r = exact_treedepth(h);
        EXPECT_TRUE(check_elimination_forest(h, r.forest));
        EXPECT_EQ(r.forest.height(), r.depth);
    }
}

TEST(Treedepth, CanonicalDecomposition) {
    auto single = canonical_decomposition(make_path(1), exact_treedepth(make_path(1)).forest);
    EXPECT_EQ(single.width(), 0);
    EliminationForest f;
    f.parent = {{1, 2}, {2, 2}, {3, 2}};
    f.recompute_depths();
    auto td = canonical_decomposition(make_path(3), f);
    EXPECT_EQ(td.bags.at(2), (std::vector<NodeId>{2}));
    EXPECT_EQ(td.bags.at(1), (std::vector<NodeId>{1, 2}));
    EXPECT_EQ(td.bags.at(3), (std::vector<NodeId>{2, 3}));
    EXPECT_EQ(td.width(), 1);
    std::mt19937_64 rng(3);
    for (int d = 1; d <= 4; ++d) {
        auto gen = random_td_with_forest(d, d == 1 ? 1 : 20, rng());
        auto t = canonical_decomposition(gen.graph, gen.forest);
        EXPECT_TRUE(validate_tree_decomposition(gen.graph, t));
        EXPECT_EQ(t.width(), gen.forest.height() - 1);
    }
}

TEST(Treedepth, ConnectedComponents) {
    Graph p3 = make_path(3);
    EXPECT_TRUE(connected_components(p3, {}).empty());
    EXPECT_EQ(connected_components(p3, {1, 3}).size(), 2u);
    std::mt19937_64 rng(8);
    for (int k = 0; k < 50; ++k) {
        Graph g = random_gnp(1 + rng() % 8, 0.3, rng());
        EXPECT_EQ(static_cast<int>(connected_components(g).size()), bfs_components(g, g.nodes()));
    }
}

// generators ----------------------------------------------------------------------------------

TEST(Generators, Examples) {
    EXPECT_EQ(generate("complete", {4}, 1).m(), 6u);
    EXPECT_EQ(exact_treedepth(generate("path", {7}, 1)).depth, 3);
    EXPECT_THROW(generate("hypercube", {3}, 1), UnknownGenerator);
    auto gen = random_td_with_forest(3, 10, 1);
    EXPECT_TRUE(check_elimination_forest(gen.graph, gen.forest));
    EXPECT_LE(gen.forest.height(), 3);
    EXPECT_EQ(random_td(3, 30, 9), random_td(3, 30, 9));
}
