#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tdmso/elimination_tree.hpp"

namespace tdmso {

/// A node's own input: its labels and weight, and the labels and weights of its incident edges.
/// Labels are bitmasks over a shared vocabulary.
struct LocalInput {
    std::uint64_t labels = 0;
    Weight weight = 1;
    std::vector<std::uint64_t> edge_labels;  // by port
    std::vector<Weight> edge_weights;         // by port
};

inline std::uint64_t label_mask(const LabelSet& labels, const std::vector<std::string>& vocab) {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (labels.count(vocab[i])) m |= std::uint64_t{1} << i;
    return m;
}

inline LabelSet mask_labels(std::uint64_t m, const std::vector<std::string>& vocab) {
    LabelSet s;
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (m >> i & 1) s.insert(vocab[i]);
    return s;
}

inline LocalInput local_input(const Graph& g, NodeId u, const std::vector<std::string>& vocab) {
    if (vocab.size() > 64) throw std::invalid_argument("label vocabulary exceeds 64 names");
    LocalInput in;
    in.labels = label_mask(g.vertex_labels(u), vocab);
    in.weight = g.vertex_weight(u);
    for (NodeId v : g.neighbors(u)) {
        in.edge_labels.push_back(label_mask(g.edge_labels(Edge(u, v)), vocab));
        in.edge_weights.push_back(g.edge_weight(Edge(u, v)));
    }
    return in;
}

/// The bag of a node together with the induced subgraph on it, as transmitted.
struct BagData {
    std::vector<NodeId> ids;  // sorted
    std::vector<std::uint64_t> labels;
    std::vector<Weight> weights;
    struct E {
        std::size_t a, b;  // indices into ids, a < b
        std::uint64_t labels;
        Weight weight;
    };
    std::vector<E> edges;

    BitString encode(std::size_t vocab_size) const {
        BitWriter w;
        w.put_varint(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            w.put_varint(ids[i]).put(labels[i], vocab_size).put_signed(weights[i]);
        }
        std::size_t iw = bits_for(ids.size());
        w.put_varint(edges.size());
        for (const auto& e : edges) w.put(e.a, iw).put(e.b, iw).put(e.labels, vocab_size).put_signed(e.weight);
        return w.take();
    }

    static BagData decode(const BitString& s, std::size_t vocab_size) {
        BitReader r(s);
        BagData d;
        std::size_t n = r.get_varint();
        for (std::size_t i = 0; i < n; ++i) {
            d.ids.push_back(static_cast<NodeId>(r.get_varint()));
            d.labels.push_back(r.get(vocab_size));
            d.weights.push_back(r.get_signed());
        }
        std::size_t iw = bits_for(n);
        std::size_t m = r.get_varint();
        for (std::size_t k = 0; k < m; ++k) {
            E e;
            e.a = r.get(iw);
            e.b = r.get(iw);
            e.labels = r.get(vocab_size);
            e.weight = r.get_signed();
            d.edges.push_back(e);
        }
        return d;
    }

    /// B_u = B_v plus u, with u's edges into B_v.
    BagData extend(NodeId u, const LocalInput& in, const std::vector<NodeId>& neighbor_ids) const {
        BagData out;
        std::size_t pos = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), u) - ids.begin());
        auto shift = [&](std::size_t i) { return i >= pos ? i + 1 : i; };
        out.ids = ids;
        out.ids.insert(out.ids.begin() + pos, u);
        out.labels = labels;
        out.labels.insert(out.labels.begin() + pos, in.labels);
        out.weights = weights;
        out.weights.insert(out.weights.begin() + pos, in.weight);
        for (const auto& e : edges) out.edges.push_back({shift(e.a), shift(e.b), e.labels, e.weight});
        for (std::size_t p = 0; p < neighbor_ids.size(); ++p) {
            auto it = std::lower_bound(ids.begin(), ids.end(), neighbor_ids[p]);
            if (it == ids.end() || *it != neighbor_ids[p]) continue;
            std::size_t j = shift(static_cast<std::size_t>(it - ids.begin()));
            out.edges.push_back({std::min(j, pos), std::max(j, pos), in.edge_labels[p], in.edge_weights[p]});
        }
        std::sort(out.edges.begin(), out.edges.end(),
                  [](const E& x, const E& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
        return out;
    }

    Graph graph(const std::vector<std::string>& vocab) const {
        GraphBuilder b;
        for (std::size_t i = 0; i < ids.size(); ++i) b.add_node(ids[i], mask_labels(labels[i], vocab), weights[i]);
        for (const auto& e : edges) b.add_edge(ids[e.a], ids[e.b], mask_labels(e.labels, vocab), e.weight);
        return b.build(64);
    }
};

/// Top-down: each node receives its parent's bag, extends it by itself and forwards it to its
/// children in chunks.
class BagProgram {
public:
    BagProgram(ElimTreeState tree, LocalInput input, std::size_t vocab_size)
        : tree_(std::move(tree)), input_(std::move(input)), vocab_size_(vocab_size) {}

    void init(const NodeInfo& info) {
        budget_ = info.budget;
        out_.resize(info.degree);
        if (!tree_.parent_port) {
            bag_ = BagData{}.extend(tree_.id, input_, tree_.neighbor_ids);
            forward();
        }
    }

    void step(int, const Mailbox& in, Mailbox& out) {
        if (!have_bag_) {
            if (const auto& m = in.at(*tree_.parent_port)) in_.feed(*m);
            if (auto payload = in_.pop()) {
                bag_ = BagData::decode(*payload, vocab_size_).extend(tree_.id, input_, tree_.neighbor_ids);
                forward();
            }
        }
        if (!have_bag_) return;
        bool drained = true;
        for (std::size_t p : tree_.child_ports) {
            out[p] = out_[p].next(budget_);
            drained = drained && out_[p].empty();
        }
        halted_ = drained;
    }

    bool halted() const { return halted_; }
    const BagData& bag() const { return bag_; }
    const ElimTreeState& tree() const { return tree_; }
    const LocalInput& input() const { return input_; }

private:
    void forward() {
        have_bag_ = true;
        BitString payload = bag_.encode(vocab_size_);
        for (std::size_t p : tree_.child_ports) out_[p].push(payload);
        if (tree_.child_ports.empty()) halted_ = true;
    }

    ElimTreeState tree_;
    LocalInput input_;
    std::size_t vocab_size_;
    std::size_t budget_ = 0;
    bool have_bag_ = false;
    bool halted_ = false;
    BagData bag_;
    StreamIn in_;
    std::vector<StreamOut> out_;
};

struct BagResult {
    std::map<NodeId, BagData> bags;
    RoundTrace trace;
};

/// Every node learns B_u and G[B_u] restricted to the label vocabulary.
inline BagResult distribute_bags(const Graph& g, const ElimTreeResult& elim, const std::vector<std::string>& vocab,
                                 const SimOptions& opt = {}) {
    if (elim.large_treedepth) throw std::invalid_argument("bag distribution needs a successful elimination tree");
    std::map<NodeId, BagProgram> progs;
    for (NodeId u : g.nodes()) progs.emplace(u, BagProgram(elim.states.at(u), local_input(g, u, vocab), vocab.size()));
    auto res = run(g, std::move(progs), opt);
    BagResult out;
    for (const auto& [u, prog] : res.nodes) out.bags[u] = prog.bag();
    out.trace = std::move(res.trace);
    return out;
}

}  // namespace tdmso
