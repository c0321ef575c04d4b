#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "tdmso/leader_election.hpp"
#include "tdmso/treedepth.hpp"

namespace tdmso {

enum class TreeStatus { Running, Ok, LargeTreedepth };

/// What a node knows about the elimination tree once the protocol ends.
struct ElimTreeState {
    NodeId id = 0;
    bool marked = false;
    bool failed = false;
    NodeId parent = 0;
    NodeId root = 0;
    int depth = 0;
    NodeId leader = 0;
    /// Depth of the whole tree, learned in the final broadcast.
    int height = 0;
    std::vector<NodeId> neighbor_ids;  // by port
    std::optional<std::size_t> parent_port;
    std::vector<NodeId> children;  // ascending
    std::vector<std::size_t> child_ports;
    TreeStatus status = TreeStatus::Running;
};

/// Rounds per phase of the fixed schedule; L = 2^d.
struct ElimSchedule {
    int L;
    explicit ElimSchedule(int d) : L(1 << d) {}
    int initial_rounds() const { return L + 1; }
    int step_rounds() const { return L + 3; }
    /// Last round of step i (2..L); step 1 is the initial block.
    int step_end(int i) const { return initial_rounds() + (i - 1) * step_rounds(); }
    int final_start() const { return step_end(L) + 1; }
};

inline int default_round_limit(int d) { return 10 * (1 << (2 * d)); }

class ElimTreeProgram {
public:
    explicit ElimTreeProgram(int d) : sched_(d) {}

    void init(const NodeInfo& info) {
        s_.id = info.id;
        s_.neighbor_ids.assign(info.degree, 0);
        flood_.start(info.id, info.degree);
    }

    void step(int round, const Mailbox& in, Mailbox& out) {
        const int L = sched_.L;
        if (round <= sched_.initial_rounds()) {
            if (round == 2)
                for (std::size_t p = 0; p < in.size(); ++p)
                    if (in[p]) s_.neighbor_ids[p] = static_cast<NodeId>(BitReader(*in[p]).get_varint());
            flood_.step(round, L, in, out);
            if (round == L + 1) {
                s_.failed = flood_.failed();
                s_.leader = flood_.value();
                if (!s_.failed && s_.leader == s_.id) {
                    s_.marked = true;
                    s_.parent = s_.root = s_.id;
                    s_.depth = 1;
                }
            }
        } else if (round < sched_.final_start()) {
            int off = round - sched_.initial_rounds() - 1;
            step_block(2 + off / sched_.step_rounds(), off % sched_.step_rounds() + 1, in, out);
        } else {
            final_phase(round - sched_.final_start() + 1, in, out);
        }
    }

    bool halted() const { return halted_; }
    const ElimTreeState& state() const { return s_; }

private:
    void read_acks(const Mailbox& in) {
        for (std::size_t p = 0; p < in.size(); ++p)
            if (in[p]) {
                s_.children.push_back(static_cast<NodeId>(BitReader(*in[p]).get_varint()));
                s_.child_ports.push_back(p);
            }
        // keep children ascending with their ports
        std::vector<std::size_t> order(s_.children.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s_.children[a] < s_.children[b]; });
        std::vector<NodeId> ch;
        std::vector<std::size_t> cp;
        for (auto k : order) {
            ch.push_back(s_.children[k]);
            cp.push_back(s_.child_ports[k]);
        }
        s_.children = std::move(ch);
        s_.child_ports = std::move(cp);
    }

    void step_block(int i, int t, const Mailbox& in, Mailbox& out) {
        const int L = sched_.L;
        if (t == 1) {
            if (s_.marked) read_acks(in);
            else flood_.start(s_.id, in.size());
        }
        if (!s_.marked && t <= L + 1) {
            flood_.step(t, L, in, out);
            if (t == L + 1) {
                s_.failed = s_.failed || flood_.failed();
                s_.leader = flood_.value();
                if (!s_.failed) {
                    BitWriter w;
                    w.put_varint(s_.leader).put_varint(s_.id);
                    for (auto& m : out) m = w.bits();
                }
            }
            return;
        }
        if (t == L + 2 && s_.marked && s_.depth == i - 1) {
            // smallest unmarked neighbour per leader value
            std::map<NodeId, std::pair<NodeId, std::size_t>> pick;
            for (std::size_t p = 0; p < in.size(); ++p) {
                if (!in[p]) continue;
                BitReader r(*in[p]);
                NodeId leader = static_cast<NodeId>(r.get_varint());
                NodeId u = static_cast<NodeId>(r.get_varint());
                auto it = pick.find(leader);
                if (it == pick.end() || u < it->second.first) pick[leader] = {u, p};
            }
            BitWriter w;
            w.put_varint(s_.id).put_varint(s_.root);
            for (const auto& [leader, up] : pick) out[up.second] = w.bits();
        }
        if (t == L + 3 && !s_.marked && !s_.failed) {
            std::optional<std::pair<NodeId, std::size_t>> best;
            NodeId best_root = 0;
            for (std::size_t p = 0; p < in.size(); ++p) {
                if (!in[p]) continue;
                BitReader r(*in[p]);
                NodeId v = static_cast<NodeId>(r.get_varint());
                NodeId root = static_cast<NodeId>(r.get_varint());
                if (!best || v < best->first) {
                    best = {v, p};
                    best_root = root;
                }
            }
            if (best) {
                s_.marked = true;
                s_.parent = best->first;
                s_.parent_port = best->second;
                s_.root = best_root;
                s_.depth = i;
                BitWriter w;
                w.put_varint(s_.id);
                out[best->second] = w.bits();
            }
        }
    }

    void final_phase(int f, const Mailbox& in, Mailbox& out) {
        if (f == 1) {
            if (s_.marked) read_acks(in);
            BitWriter w;
            bool bad = !s_.marked || s_.failed;
            w.put_bit(bad);
            if (!bad) w.put_varint(s_.root);
            for (auto& m : out) m = w.bits();
            if (bad) {
                s_.status = TreeStatus::LargeTreedepth;
                halted_ = true;
            }
            pending_ = s_.children.size();
            max_depth_ = s_.depth;
            return;
        }
        if (f == 2)
            for (std::size_t p = 0; p < in.size(); ++p) {
                if (!in[p]) continue;
                BitReader r(*in[p]);
                if (r.get_bit() || static_cast<NodeId>(r.get_varint()) != s_.root) bad_ = true;
            }
        else
            for (std::size_t p = 0; p < in.size(); ++p) {
                if (!in[p]) continue;
                BitReader r(*in[p]);
                if (s_.parent_port && p == *s_.parent_port) {
                    // result broadcast from the root
                    bool bad = r.get_bit();
                    int height = static_cast<int>(r.get_varint());
                    finish(bad, height, out);
                    return;
                }
                max_depth_ = std::max(max_depth_, static_cast<int>(r.get_varint()));
                bad_ = bad_ || r.get_bit();
                --pending_;
            }
        if (pending_ == 0 && !reported_) {
            reported_ = true;
            if (s_.parent_port) {
                BitWriter w;
                w.put_varint(max_depth_).put_bit(bad_);
                out[*s_.parent_port] = w.bits();
            } else {
                finish(bad_, max_depth_, out);
            }
        }
    }

    void finish(bool bad, int height, Mailbox& out) {
        s_.status = bad ? TreeStatus::LargeTreedepth : TreeStatus::Ok;
        s_.height = height;
        BitWriter w;
        w.put_bit(bad).put_varint(height);
        for (std::size_t p : s_.child_ports) out[p] = w.bits();
        halted_ = true;
    }

    ElimSchedule sched_;
    ElimTreeState s_;
    MinFlood flood_;
    bool halted_ = false;
    std::size_t pending_ = 0;
    int max_depth_ = 0;
    bool bad_ = false;
    bool reported_ = false;
};

struct ElimTreeResult {
    bool large_treedepth = false;
    /// The forest built by the protocol (only meaningful on success).
    EliminationForest forest;
    std::map<NodeId, ElimTreeState> states;
    RoundTrace trace;
};

/// Partial forest on the marked nodes, as seen after some round.
inline EliminationForest marked_forest(const std::map<NodeId, ElimTreeProgram>& nodes) {
    EliminationForest f;
    for (const auto& [u, prog] : nodes)
        if (prog.state().marked) f.parent[u] = prog.state().parent;
    f.recompute_depths();
    return f;
}

/// Builds an elimination tree of depth at most 2^d, or has every node report LargeTreedepth.
inline ElimTreeResult build_elimination_tree(
    const Graph& g, int d, SimOptions opt = {},
    const std::function<void(int, const std::map<NodeId, ElimTreeProgram>&)>& observer = {}) {
    if (d < 1 || d > 8) throw std::invalid_argument("d must lie in 1..8");
    if (opt.max_rounds == SimOptions{}.max_rounds) opt.max_rounds = default_round_limit(d);
    std::map<NodeId, ElimTreeProgram> progs;
    for (NodeId u : g.nodes()) progs.emplace(u, ElimTreeProgram(d));
    auto res = run(g, std::move(progs), opt, observer);
    ElimTreeResult out;
    out.trace = std::move(res.trace);
    for (const auto& [u, prog] : res.nodes) {
        out.states[u] = prog.state();
        if (prog.state().status != TreeStatus::Ok) out.large_treedepth = true;
    }
    if (!out.large_treedepth) {
        for (const auto& [u, s] : out.states) out.forest.parent[u] = s.parent;
        out.forest.recompute_depths();
    }
    return out;
}

}  // namespace tdmso
