#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tdmso/simulator.hpp"

namespace tdmso {

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Min-id flooding among the nodes that take part, run for `cap` sending rounds plus one
/// checking round. Round t = 1 sends the own id; later rounds send only after a change.
/// In round cap + 1 the node fails if its value still changed or a neighbour disagrees.
class MinFlood {
public:
    void start(NodeId id, std::size_t degree) {
        value_ = id;
        known_.assign(degree, std::nullopt);
        failed_ = false;
        last_change_ = 1;
    }

    void step(int t, int cap, const Mailbox& in, Mailbox& out) {
        bool changed = false;
        if (t > 1)
            for (std::size_t p = 0; p < in.size(); ++p) {
                if (!in[p]) continue;
                BitReader r(*in[p]);
                NodeId v = static_cast<NodeId>(r.get_varint());
                known_[p] = v;
                if (v < value_) {
                    value_ = v;
                    changed = true;
                }
            }
        if (changed) last_change_ = t;
        if (t <= cap && (t == 1 || changed)) {
            BitWriter w;
            w.put_varint(value_);
            for (auto& m : out) m = w.bits();
        }
        if (t == cap + 1) {
            failed_ = changed;
            for (const auto& k : known_)
                if (k && *k != value_) failed_ = true;
        }
    }

    NodeId value() const { return value_; }
    bool failed() const { return failed_; }
    int last_change() const { return last_change_; }
    /// Last value heard per port (for round-1 senders, their own id).
    const std::vector<std::optional<NodeId>>& known() const { return known_; }

private:
    NodeId value_ = 0;
    std::vector<std::optional<NodeId>> known_;
    bool failed_ = false;
    int last_change_ = 1;
};

class LeaderProgram {
public:
    LeaderProgram(bool active, int cap) : active_(active), cap_(cap) {}

    void init(const NodeInfo& info) {
        if (active_) flood_.start(info.id, info.degree);
        halted_ = !active_;
    }
    void step(int round, const Mailbox& in, Mailbox& out) {
        flood_.step(round, cap_, in, out);
        if (round == cap_ + 1) halted_ = true;
    }
    bool halted() const { return halted_; }

    bool active() const { return active_; }
    const MinFlood& flood() const { return flood_; }

private:
    bool active_;
    int cap_;
    bool halted_ = false;
    MinFlood flood_;
};

struct LeaderResult {
    std::map<NodeId, NodeId> leader;
    /// Last round in which any value changed.
    int converged_round = 1;
    RoundTrace trace;
};

/// Each active node learns the minimum id of its component in g[active].
inline LeaderResult leader_election(const Graph& g, const std::set<NodeId>& active, int round_cap,
                                    const SimOptions& opt = {}) {
    if (round_cap < 1) throw std::invalid_argument("round cap must be positive");
    for (NodeId x : active)
        if (!g.has_node(x)) throw GraphError("active node " + std::to_string(x) + " is not in the graph");
    std::map<NodeId, LeaderProgram> progs;
    for (NodeId u : g.nodes()) progs.emplace(u, LeaderProgram(active.count(u) > 0, round_cap));
    auto res = run(g, std::move(progs), opt);
    LeaderResult out;
    for (const auto& [u, prog] : res.nodes) {
        if (!prog.active()) continue;
        if (prog.flood().failed())
            throw CapExceeded("leader election did not settle within " + std::to_string(round_cap) + " rounds");
        out.leader[u] = prog.flood().value();
        out.converged_round = std::max(out.converged_round, prog.flood().last_change());
    }
    out.trace = std::move(res.trace);
    return out;
}

}  // namespace tdmso
