#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdmso/bits.hpp"
#include "tdmso/graph.hpp"

namespace tdmso {

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(int round, NodeId from, NodeId to, std::size_t bits, std::size_t budget)
        : std::runtime_error("round " + std::to_string(round) + ": message " + std::to_string(from) + "->" +
                             std::to_string(to) + " has " + std::to_string(bits) + " bits, budget " +
                             std::to_string(budget)),
          round_(round), from_(from), to_(to), bits_(bits) {}
    int round() const { return round_; }
    NodeId from() const { return from_; }
    NodeId to() const { return to_; }
    std::size_t bits() const { return bits_; }

private:
    int round_;
    NodeId from_, to_;
    std::size_t bits_;
};

class RoundLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultBudgetFactor = 64;

inline std::size_t ceil_log2(std::size_t n) {
    std::size_t w = 0;
    while ((std::size_t{1} << w) < n) ++w;
    return w;
}

/// Per-message bit budget: factor * ceil(log2(max(n, 2))).
inline std::size_t message_budget(std::size_t n, int factor = kDefaultBudgetFactor) {
    return static_cast<std::size_t>(factor) * ceil_log2(std::max<std::size_t>(n, 2));
}

/// What a node knows before the first round.
struct NodeInfo {
    NodeId id;
    std::size_t degree;
    std::size_t n;
    std::size_t budget;
};

/// Messages indexed by port; ports are the neighbours in ascending id order.
using Mailbox = std::vector<std::optional<BitString>>;

struct MessageRecord {
    int round;
    NodeId from, to;
    std::size_t bits;
    friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

struct RoundTrace {
    std::vector<MessageRecord> messages;
    int rounds = 0;
    std::map<NodeId, int> halt_round;

    std::size_t max_bits() const {
        std::size_t m = 0;
        for (const auto& r : messages) m = std::max(m, r.bits);
        return m;
    }
    std::size_t total_messages() const { return messages.size(); }

    /// One JSON record per message, then a summary record.
    std::string to_jsonl() const {
        std::ostringstream out;
        for (const auto& r : messages)
            out << nlohmann::json{{"round", r.round}, {"u", r.from}, {"v", r.to}, {"bits", r.bits}}.dump() << '\n';
        out << summary().dump() << '\n';
        return out.str();
    }

    nlohmann::json summary() const {
        return {{"rounds", rounds}, {"max_bits", max_bits()}, {"total_messages", total_messages()}};
    }

    friend bool operator==(const RoundTrace&, const RoundTrace&) = default;
};

struct SimOptions {
    int budget_factor = kDefaultBudgetFactor;
    int max_rounds = 100000;
};

template <class P>
struct RunResult {
    std::map<NodeId, P> nodes;
    RoundTrace trace;
};

/// Synchronous CONGEST execution. A program provides
///   void init(const NodeInfo&);
///   void step(int round, const Mailbox& inbox, Mailbox& outbox);
///   bool halted() const;
/// Round numbers start at 1. A message sent in round t is in the receiver's inbox in round t+1;
/// messages to halted nodes are dropped. Runs until every node has halted.
template <class P>
RunResult<P> run(const Graph& g, std::map<NodeId, P> programs, const SimOptions& opt = {},
                 const std::function<void(int, const std::map<NodeId, P>&)>& observer = {}) {
    if (g.empty()) throw GraphError("network has no nodes");
    if (!g.is_connected()) throw GraphError("network must be connected");
    const std::size_t budget = message_budget(g.n(), opt.budget_factor);
    RunResult<P> res;
    std::map<NodeId, Mailbox> inbox;
    for (NodeId u : g.nodes()) {
        auto it = programs.find(u);
        if (it == programs.end()) throw std::invalid_argument("no program for node " + std::to_string(u));
        it->second.init(NodeInfo{u, g.degree(u), g.n(), budget});
        inbox[u].assign(g.degree(u), std::nullopt);
    }
    for (NodeId u : g.nodes())
        if (programs.at(u).halted()) res.trace.halt_round[u] = 0;

    for (int round = 1;; ++round) {
        bool all_halted = true;
        for (NodeId u : g.nodes()) all_halted = all_halted && programs.at(u).halted();
        if (all_halted) break;
        if (round > opt.max_rounds) throw RoundLimit("protocol did not halt within " + std::to_string(opt.max_rounds) + " rounds");
        std::map<NodeId, Mailbox> next;
        for (NodeId u : g.nodes()) next[u].assign(g.degree(u), std::nullopt);
        for (NodeId u : g.nodes()) {
            P& prog = programs.at(u);
            if (prog.halted()) continue;
            Mailbox out(g.degree(u));
            prog.step(round, inbox[u], out);
            if (out.size() != g.degree(u)) throw std::logic_error("outbox size must equal the degree");
            const auto& nb = g.neighbors(u);
            for (std::size_t p = 0; p < out.size(); ++p) {
                if (!out[p]) continue;
                NodeId v = nb[p];
                std::size_t bits = out[p]->size();
                if (bits > budget) throw BudgetExceeded(round, u, v, bits, budget);
                res.trace.messages.push_back({round, u, v, bits});
                const auto& vnb = g.neighbors(v);
                std::size_t back = static_cast<std::size_t>(std::lower_bound(vnb.begin(), vnb.end(), u) - vnb.begin());
                next[v][back] = std::move(out[p]);
            }
            if (prog.halted()) res.trace.halt_round[u] = round;
        }
        for (NodeId u : g.nodes())
            if (programs.at(u).halted())
                for (auto& m : next[u]) m.reset();
        inbox = std::move(next);
        res.trace.rounds = round;
        if (observer) observer(round, programs);
    }
    res.nodes = std::move(programs);
    return res;
}

}  // namespace tdmso
