// Bit encoding, simulator, leader election, elimination tree, bags, distributed DP, H-freeness.

#include <gtest/gtest.h>

#include <random>

#include "tdmso/acceptance.hpp"
#include "tdmso/bag_distribution.hpp"
#include "tdmso/distributed_dp.hpp"
#include "tdmso/hfree.hpp"
#include "tdmso/leader_election.hpp"

using namespace tdmso;

namespace {

/// Floods the minimum id and halts after a fixed number of rounds.
class MinBroadcast {
public:
    explicit MinBroadcast(int rounds) : rounds_(rounds) {}
    void init(const NodeInfo& info) {
        best_ = info.id;
        budget_ = info.budget;
    }
    void step(int round, const Mailbox& in, Mailbox& out) {
        for (const auto& m : in)
            if (m) best_ = std::min<NodeId>(best_, BitReader(*m).get_varint());
        if (round > rounds_) {
            halted_ = true;
            return;
        }
        BitWriter w;
        w.put_varint(best_);
        for (auto& o : out) o = w.bits();
    }
    bool halted() const { return halted_; }
    NodeId best() const { return best_; }

private:
    int rounds_;
    NodeId best_ = 0;
    std::size_t budget_ = 0;
    bool halted_ = false;
};

/// Sends one oversized message.
struct Shouter {
    std::size_t budget = 0;
    bool done = false;
    void init(const NodeInfo& info) { budget = info.budget; }
    void step(int, const Mailbox&, Mailbox& out) {
        BitWriter w;
        w.put(0, 10 * budget);
        for (auto& o : out) o = w.bits();
        done = true;
    }
    bool halted() const { return done; }
};

template <class P, class F>
std::map<NodeId, P> programs(const Graph& g, F make) {
    std::map<NodeId, P> out;
    for (NodeId u : g.nodes()) out.emplace(u, make(u));
    return out;
}

Graph wheel(std::size_t rim) {
    GraphBuilder b;
    for (NodeId x = 1; x <= rim + 1; ++x) b.add_node(x);
    for (NodeId x = 2; x <= rim + 1; ++x) {
        b.add_edge(1, x);
        b.add_edge(x, x == rim + 1 ? 2 : x + 1);
    }
    return b.build();
}

}  // namespace

// bits ----------------------------------------------------------------------------------------

TEST(Bits, ChunkingIsCeiling) {
    BitWriter w;
    w.put(0x5a5a, 16);
    EXPECT_EQ(chunk_payload(w.bits(), 16).size(), 1u);
    BitWriter v;
    for (int i = 0; i < 49; ++i) v.put_bit(i % 3 == 0);
    auto parts = chunk_payload(v.bits(), 16);
    EXPECT_EQ(parts.size(), 4u);
    EXPECT_EQ(reassemble(parts), v.bits());
}

TEST(Bits, RandomRoundTrips) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 300; ++k) {
        std::uint64_t a = rng() >> (rng() % 64);
        std::int64_t b = static_cast<std::int64_t>(rng()) >> (rng() % 64);
        BigInt c = BigInt(rng()) * BigInt(rng()) * BigInt(rng() % 1000);
        BitWriter w;
        w.put_varint(a).put_signed(b).put_bigint(c).put(a & 0x1f, 5);
        BitString payload = w.take();
        std::size_t budget = 1 + rng() % 40;
        StreamOut out;
        out.push(payload);
        StreamIn in;
        std::optional<BitString> got;
        while (!out.empty()) {
            auto m = out.next(budget);
            ASSERT_TRUE(m);
            ASSERT_LE(m->size(), budget);
            in.feed(*m);
        }
        got = in.pop();
        ASSERT_TRUE(got);
        BitReader r(*got);
        EXPECT_EQ(r.get_varint(), a);
        EXPECT_EQ(r.get_signed(), b);
        EXPECT_EQ(r.get_bigint(), c);
        EXPECT_EQ(r.get(5), a & 0x1f);
        EXPECT_TRUE(r.done());
        EXPECT_THROW(r.get_bit(), std::out_of_range);
    }
}

// simulator -----------------------------------------------------------------------------------

TEST(Simulator, MinBroadcastOnPath) {
    Graph p4 = make_path(4);
    auto res = run(p4, programs<MinBroadcast>(p4, [](NodeId) { return MinBroadcast(4); }));
    for (const auto& [u, prog] : res.nodes) EXPECT_EQ(prog.best(), 1u);
    EXPECT_LE(res.trace.rounds, 5);
    // deterministic trace
    auto again = run(p4, programs<MinBroadcast>(p4, [](NodeId) { return MinBroadcast(4); }));
    EXPECT_EQ(res.trace, again.trace);
}

TEST(Simulator, SingleNodeSendsNothing) {
    Graph one = make_path(1);
    auto res = run(one, programs<MinBroadcast>(one, [](NodeId) { return MinBroadcast(0); }));
    EXPECT_LE(res.trace.rounds, 1);
    EXPECT_EQ(res.trace.total_messages(), 0u);
}

TEST(Simulator, BudgetAndRoundLimits) {
    Graph p2 = make_path(2);
    EXPECT_THROW(run(p2, programs<Shouter>(p2, [](NodeId) { return Shouter{}; })), BudgetExceeded);
    SimOptions opt;
    opt.max_rounds = 3;
    EXPECT_THROW(run(p2, programs<MinBroadcast>(p2, [](NodeId) { return MinBroadcast(10); }), opt), RoundLimit);
    GraphBuilder b;
    b.add_node(1).add_node(2);
    Graph split = b.build();
    EXPECT_THROW(run(split, programs<MinBroadcast>(split, [](NodeId) { return MinBroadcast(1); })), GraphError);
    EXPECT_EQ(message_budget(1000, 64), 64u * 10);
}

TEST(Simulator, TraceExport) {
    Graph p3 = make_path(3);
    auto res = run(p3, programs<MinBroadcast>(p3, [](NodeId) { return MinBroadcast(2); }));
    std::istringstream in(res.trace.to_jsonl());
    std::string line;
    std::size_t records = 0;
    nlohmann::json last;
    while (std::getline(in, line)) {
        last = nlohmann::json::parse(line);
        ++records;
    }
    EXPECT_EQ(records, res.trace.total_messages() + 1);
    EXPECT_EQ(last["rounds"], res.trace.rounds);
    EXPECT_EQ(last["total_messages"], res.trace.total_messages());
}

// leader election -----------------------------------------------------------------------------

TEST(Leader, Examples) {
    Graph p5 = make_path(5);
    auto r = leader_election(p5, {1, 2, 3, 4, 5}, 10);
    for (const auto& [u, l] : r.leader) EXPECT_EQ(l, 1u);
    EXPECT_LE(r.converged_round, 5);
    auto two = leader_election(p5, {1, 2, 4, 5}, 10);
    EXPECT_EQ(two.leader.at(2), 1u);
    EXPECT_EQ(two.leader.at(5), 4u);
    EXPECT_THROW(leader_election(p5, {1, 2, 3, 4, 5}, 1), CapExceeded);
}

// elimination tree ----------------------------------------------------------------------------

TEST(ElimTree, Examples) {
    auto star = build_elimination_tree(make_star(4), 2);
    ASSERT_FALSE(star.large_treedepth);
    EXPECT_TRUE(check_elimination_forest(make_star(4), star.forest));
    EXPECT_LE(star.forest.height(), 4);
    auto one = build_elimination_tree(make_path(1), 1);
    ASSERT_FALSE(one.large_treedepth);
    EXPECT_EQ(one.forest.height(), 1);
    EXPECT_TRUE(one.forest.is_root(1));
    auto p16 = build_elimination_tree(make_path(16), 2);
    EXPECT_TRUE(p16.large_treedepth);
    for (const auto& [u, s] : p16.states) EXPECT_EQ(s.status, TreeStatus::LargeTreedepth);
    EXPECT_GT(exact_treedepth(make_path(16), 16).depth, 2);
}

TEST(ElimTree, RandomBoundedTreedepth) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 45; ++k) {
        int d = 1 + k % 3;
        Graph g = random_td(d, d == 1 ? 1 : 2 + rng() % 40, rng());
        auto r = build_elimination_tree(g, d);
        ASSERT_FALSE(r.large_treedepth);
        EXPECT_TRUE(check_elimination_forest(g, r.forest));
        EXPECT_LE(r.forest.height(), 1 << d);
        EXPECT_LE(r.trace.rounds, default_round_limit(d));
        for (const auto& [u, s] : r.states) EXPECT_EQ(s.height, r.forest.height());
    }
}

// bags ----------------------------------------------------------------------------------------

TEST(Bags, MatchCanonicalDecomposition) {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 20; ++k) {
        GraphBuilder b;
        Graph base = random_td(3, 2 + rng() % 25, rng());
        for (NodeId x : base.nodes()) b.add_node(x, rng() % 2 ? LabelSet{"red"} : LabelSet{}, base.vertex_weight(x));
        for (const Edge& e : base.edges()) b.add_edge(e.u, e.v);
        Graph g = b.build();
        auto elim = build_elimination_tree(g, 3);
        ASSERT_FALSE(elim.large_treedepth);
        auto bags = distribute_bags(g, elim, {"red"});
        auto td = canonical_decomposition(g, elim.forest);
        for (NodeId u : g.nodes()) {
            const BagData& bd = bags.bags.at(u);
            EXPECT_EQ(bd.ids, td.bags.at(u));
            Graph local = bd.graph({"red"});
            EXPECT_EQ(local, g.induced(bd.ids));
        }
        NodeId root = elim.forest.roots()[0];
        EXPECT_EQ(bags.bags.at(root).ids, std::vector<NodeId>{root});
    }
}

// distributed DP ------------------------------------------------------------------------------

TEST(DistDp, DecideExamples) {
    auto tf = compile_mso(named_formula("triangle_free"), 8);
    auto c5 = distributed_decide(make_cycle(5), *tf);
    EXPECT_TRUE(c5.verdict);
    for (const auto& [u, a] : c5.accepts) EXPECT_TRUE(a);
    EXPECT_LE(c5.rounds_elim_tree(), default_round_limit(3));
    for (const auto& m : c5.up_trace.messages) EXPECT_EQ(m.bits, c5.class_id_bits);
    auto k3 = distributed_decide(make_complete(3), *tf);
    EXPECT_FALSE(k3.verdict);
    EXPECT_FALSE(k3.accepts.at(k3.root));
}

TEST(DistDp, OptimizeExamples) {
    auto is = builtin_predicate("independent_set", 8);
    auto c5 = distributed_optimize(make_cycle(5), *is, true);
    EXPECT_EQ(c5.value, 2);
    EXPECT_EQ(c5.witness.vertices.size(), 2u);
    EXPECT_TRUE(eval_bruteforce(make_cycle(5), named_formula("independent_set"), {{"S", c5.witness.vertices}}));

    GraphBuilder b;
    b.add_node(1).add_node(2).add_node(3).add_edge(1, 2, {}, 1).add_edge(2, 3, {}, 2).add_edge(1, 3, {}, 3);
    auto st = builtin_predicate("spanning_tree_marked", 8);
    auto mst = distributed_optimize(b.build(), *st, false);
    EXPECT_EQ(mst.value, 3);
    EXPECT_EQ(mst.witness.edges, (std::vector<Edge>{Edge(1, 2), Edge(2, 3)}));

    GraphBuilder one;
    one.add_node(1, {}, 5);
    auto single = distributed_optimize(one.build(), *is, true);
    EXPECT_EQ(single.value, 5);
    EXPECT_EQ(single.fragments.at(1).vertices, std::vector<NodeId>{1});
}

TEST(DistDp, CountExamples) {
    auto tri = compile_mso(named_formula("triangles"), 8);
    EXPECT_EQ(*distributed_count(make_complete(4), *tri).count, 24);
    EXPECT_EQ(*distributed_count(make_path(6), *tri).count, 0);
    auto pm = compile_mso(named_formula("perfect_matchings"), 6);
    EXPECT_EQ(*distributed_count(make_cycle(6), *pm).count, 2);
}

TEST(DistDp, OptMarkedExamples) {
    auto is = builtin_predicate("independent_set", 8);
    Graph c5 = make_cycle(5);
    auto mark = [&](std::vector<NodeId> xs) {
        Selection s;
        s.vertices = std::move(xs);
        return acceptance::with_marks(c5, s, "mark");
    };
    auto good = distributed_optmarked(mark({2, 4}), *is, true);
    EXPECT_TRUE(good.verdict);
    for (const auto& [u, a] : good.accepts) EXPECT_TRUE(a);
    EXPECT_FALSE(distributed_optmarked(mark({1, 2}), *is, true).verdict);
    EXPECT_FALSE(distributed_optmarked(mark({3}), *is, true).verdict);
}

TEST(DistDp, LargeTreedepthIsReported) {
    auto tf = compile_mso(named_formula("triangle_free"), 4);
    DistOptions opt;
    opt.d = 1;
    auto r = distributed_decide(make_path(8), *tf, opt);
    EXPECT_TRUE(r.large_treedepth);
    EXPECT_EQ(report_json(r)["status"], "LargeTreedepth");
}

TEST(DistDp, AgreesWithSequentialOnRandomGraphs) {
    std::mt19937_64 rng(31);
    auto conn = compile_mso(named_formula("connected"), 8);
    auto vc = builtin_predicate("vertex_cover", 8);
    for (int k = 0; k < 25; ++k) {
        Graph g = with_random_weights(random_td(2, 2 + rng() % 10, rng()), 1, 8, rng());
        if (!g.is_connected()) continue;
        DistOptions opt;
        opt.d = 2;
        auto td = canonical_decomposition(g, exact_treedepth(g).forest);
        EXPECT_EQ(distributed_decide(g, *conn, opt).verdict, decide(g, td, *conn).verdict);
        EXPECT_EQ(*distributed_optimize(g, *vc, false, opt).value, optimize(g, td, *vc, false).value);
    }
}

// H-freeness ----------------------------------------------------------------------------------

TEST(HFree, BruteLtdExamples) {
    EXPECT_EQ(brute_ltd(make_path(4), 1).f_p, 2);
    EXPECT_EQ(brute_ltd(make_complete(4), 1).f_p, 4);
    EXPECT_EQ(brute_ltd(make_cycle(4), 2).f_p, 3);
}

TEST(HFree, ValidatePartition) {
    LowTdPartition all;
    all.p = 2;
    all.f_p = 1;
    for (NodeId x = 1; x <= 16; ++x) all.parts[x] = 1;
    EXPECT_FALSE(validate_partition(make_path(16), all, 0));
    LowTdPartition empty;
    empty.p = 2;
    EXPECT_TRUE(validate_partition(Graph{}, empty, 0));
    // centred colouring of P_7: colour = 1 + number of trailing zeros of the position
    LowTdPartition centred;
    centred.p = 2;
    for (NodeId x = 1; x <= 7; ++x) {
        centred.parts[x] = 1 + std::countr_zero(static_cast<unsigned>(x));
        centred.f_p = std::max(centred.f_p, centred.parts[x]);
    }
    EXPECT_TRUE(validate_partition(make_path(7), centred, 0));
    EXPECT_TRUE(validate_partition(make_path(7), centred, 5, 3));
}

TEST(HFree, Examples) {
    Graph k3 = make_complete(3);
    EXPECT_TRUE(decide_h_freeness(make_cycle(5), k3, brute_ltd(make_cycle(5), 3), false).h_free);
    Graph w5 = wheel(5);
    auto r = decide_h_freeness(w5, k3, brute_ltd(w5, 3), false);
    EXPECT_FALSE(r.h_free);
    EXPECT_FALSE(r.rejecting.empty());
    Graph p3 = make_path(3);
    EXPECT_TRUE(decide_h_freeness(make_complete(4), p3, brute_ltd(make_complete(4), 3), true).h_free);
    EXPECT_FALSE(decide_h_freeness(make_complete(4), p3, brute_ltd(make_complete(4), 3), false).h_free);
}

TEST(HFree, PartitionFileRoundTrip) {
    LowTdPartition p = brute_ltd(make_cycle(6), 2);
    std::istringstream in(format_partition(p) + "# comment\n\n");
    LowTdPartition q = parse_partition(in, 2);
    EXPECT_EQ(q.parts, p.parts);
    EXPECT_EQ(q.f_p, p.f_p);
    std::istringstream bad("part 1\n");
    EXPECT_THROW(parse_partition(bad, 2), ParseError);
}
