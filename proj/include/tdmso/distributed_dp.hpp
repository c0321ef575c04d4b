#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdmso/bag_distribution.hpp"
#include "tdmso/dp_engine.hpp"

namespace tdmso {

enum class DpMode { Decide, Optimize, Count, OptMarked };

struct DistOptions {
    int d = 3;
    int budget_factor = kDefaultBudgetFactor;
    /// Label carrying the assignment of a single free variable (decide) or the marked set (optmarked).
    std::string mark_label = "mark";
    /// Round limit for the phases after the elimination tree; table shipping depends on |C|.
    int data_round_limit = 1'000'000;
};

/// Assignment of the free variables read from labels: a lone free variable reads `mark_label`,
/// otherwise each variable reads the label equal to its name.
inline std::vector<Selection> assignment_from_labels(const Graph& g, const RegularPredicate& p,
                                                     const std::string& mark_label) {
    std::vector<Selection> sets;
    const auto& vars = p.free_vars();
    for (const auto& v : vars) sets.push_back(marked_set(g, vars.size() == 1 ? mark_label : v.name, v.sort));
    return sets;
}

inline std::vector<std::string> assignment_labels(const RegularPredicate& p, const std::string& mark_label) {
    std::vector<std::string> out;
    const auto& vars = p.free_vars();
    for (const auto& v : vars) out.push_back(vars.size() == 1 ? mark_label : v.name);
    return out;
}

/// Shared, read-only setup of one protocol run. The predicate is frozen while the run lasts.
struct DpContext {
    RegularPredicate* p = nullptr;
    DpMode mode = DpMode::Decide;
    int sign = 1;
    std::string mark_label;
    std::vector<std::string> vocab;
    std::size_t class_bits = 0;
};

namespace detail {

inline void put_opt_table(BitWriter& w, const OptTable& t, std::size_t classes) {
    for (ClassId c = 0; c < classes; ++c) {
        auto it = t.find(c);
        w.put_bit(it != t.end());
        if (it != t.end()) w.put_signed(it->second);
    }
}

inline OptTable get_opt_table(BitReader& r, std::size_t classes) {
    OptTable t;
    for (ClassId c = 0; c < classes; ++c)
        if (r.get_bit()) t[c] = r.get_signed();
    return t;
}

inline void put_count_table(BitWriter& w, const CountTable& t, std::size_t classes) {
    for (ClassId c = 0; c < classes; ++c) {
        auto it = t.find(c);
        w.put_bit(it != t.end());
        if (it != t.end()) w.put_bigint(it->second);
    }
}

inline CountTable get_count_table(BitReader& r, std::size_t classes) {
    CountTable t;
    for (ClassId c = 0; c < classes; ++c)
        if (r.get_bit()) t[c] = r.get_bigint();
    return t;
}

inline std::vector<NodeId> with_node(std::vector<NodeId> bag, NodeId x) {
    bag.insert(std::lower_bound(bag.begin(), bag.end(), x), x);
    return bag;
}

/// Best accepting entry: strictly larger values win, ties go to the smaller class id.
inline std::optional<ClassId> best_accepting(RegularPredicate& p, const OptTable& t) {
    std::optional<ClassId> best;
    for (const auto& [c, v] : t)
        if (p.is_accepting(c) && (!best || v > t.at(*best))) best = c;
    return best;
}

}  // namespace detail

/// Bottom-up phase: each node folds its children's results into its own and sends it to its parent.
class BottomUpProgram {
public:
    BottomUpProgram(const DpContext* ctx, ElimTreeState tree, BagData bag)
        : ctx_(ctx), tree_(std::move(tree)), bag_(std::move(bag)) {}

    void init(const NodeInfo& info) {
        budget_ = info.budget;
        base_ = bag_.graph(ctx_->vocab);
        std::size_t k = tree_.children.size();
        got_.assign(k, false);
        child_cls_.assign(k, 0);
        child_psi_.assign(k, 0);
        child_opt_.resize(k);
        child_count_.resize(k);
        child_marked_.assign(k, 0);
        streams_.resize(k);
    }

    void step(int, const Mailbox& in, Mailbox& out) {
        for (std::size_t k = 0; k < tree_.child_ports.size(); ++k) {
            const auto& m = in.at(tree_.child_ports[k]);
            if (!m) continue;
            if (ctx_->mode == DpMode::Decide) {
                child_cls_[k] = static_cast<ClassId>(BitReader(*m).get(ctx_->class_bits));
                got_[k] = true;
                continue;
            }
            streams_[k].feed(*m);
            if (auto payload = streams_[k].pop()) {
                decode_child(k, *payload);
                got_[k] = true;
            }
        }
        if (!computed_ && std::all_of(got_.begin(), got_.end(), [](bool b) { return b; })) {
            computed_ = true;
            compute();
            if (!tree_.parent_port) {
                finish_root();
                halted_ = true;
                return;
            }
            if (ctx_->mode == DpMode::Decide) {
                BitWriter w;
                w.put(cls_, ctx_->class_bits);
                out[*tree_.parent_port] = w.take();
                halted_ = true;
                return;
            }
            up_.push(encode_up());
        }
        if (computed_) {
            out[*tree_.parent_port] = up_.next(budget_);
            halted_ = up_.empty();
        }
    }

    bool halted() const { return halted_; }

    const ElimTreeState& tree() const { return tree_; }
    const BagData& bag() const { return bag_; }
    const OptFold& fold() const { return fold_; }
    bool root_accepts() const { return accepts_; }
    std::optional<ClassId> root_choice() const { return choice_; }
    std::optional<Weight> root_value() const { return value_; }
    const BigInt& root_count() const { return count_; }

private:
    std::vector<NodeId> child_bag(std::size_t k) const { return detail::with_node(bag_.ids, tree_.children[k]); }

    std::vector<Selection> local_assignment() const {
        return assignment_from_labels(base_, *ctx_->p, ctx_->mark_label);
    }

    Weight local_marked_weight() const {
        Selection s = owned_selection(local_assignment().at(0), tree_.id);
        return selection_weight(base_, s);
    }

    void decode_child(std::size_t k, const BitString& payload) {
        BitReader r(payload);
        std::size_t classes = ctx_->p->class_count();
        switch (ctx_->mode) {
            case DpMode::Optimize: child_opt_[k] = detail::get_opt_table(r, classes); break;
            case DpMode::Count: child_count_[k] = detail::get_count_table(r, classes); break;
            case DpMode::OptMarked:
                child_opt_[k] = detail::get_opt_table(r, classes);
                child_psi_[k] = static_cast<ClassId>(r.get(ctx_->class_bits));
                child_marked_[k] = r.get_signed();
                break;
            case DpMode::Decide: break;
        }
    }

    BitString encode_up() const {
        BitWriter w;
        std::size_t classes = ctx_->p->class_count();
        switch (ctx_->mode) {
            case DpMode::Optimize: detail::put_opt_table(w, fold_.table, classes); break;
            case DpMode::Count: detail::put_count_table(w, count_table_, classes); break;
            case DpMode::OptMarked:
                detail::put_opt_table(w, fold_.table, classes);
                w.put(psi_, ctx_->class_bits);
                w.put_signed(marked_);
                break;
            case DpMode::Decide: break;
        }
        return w.take();
    }

    ClassId fold_class(const std::vector<ClassId>& children) {
        RegularPredicate& p = *ctx_->p;
        std::vector<Selection> sets;
        if (!p.free_vars().empty()) sets = local_assignment();
        ClassId b = p.classify_base(base_, sets);
        std::vector<ChildClass> ch;
        for (std::size_t k = 0; k < children.size(); ++k) ch.push_back({child_bag(k), children[k]});
        return fold_decide(p, bag_.ids, b, ch);
    }

    void compute() {
        RegularPredicate& p = *ctx_->p;
        switch (ctx_->mode) {
            case DpMode::Decide: cls_ = fold_class(child_cls_); break;
            case DpMode::Count: {
                std::vector<ChildCount> ch;
                for (std::size_t k = 0; k < child_count_.size(); ++k) ch.push_back({child_bag(k), child_count_[k]});
                count_table_ = fold_count(p, bag_.ids, base_, ch);
                break;
            }
            case DpMode::OptMarked:
                psi_ = fold_class(child_psi_);
                marked_ = local_marked_weight();
                for (Weight w : child_marked_) marked_ += w;
                [[fallthrough]];
            case DpMode::Optimize: {
                std::vector<ChildOpt> ch;
                for (std::size_t k = 0; k < child_opt_.size(); ++k) ch.push_back({child_bag(k), child_opt_[k]});
                fold_ = fold_opt(p, bag_.ids, base_, ctx_->sign, ch);
                break;
            }
        }
    }

    void finish_root() {
        RegularPredicate& p = *ctx_->p;
        switch (ctx_->mode) {
            case DpMode::Decide: accepts_ = p.is_accepting(cls_); break;
            case DpMode::Count:
                for (const auto& [c, n] : count_table_)
                    if (p.is_accepting(c)) count_ += n;
                accepts_ = true;
                break;
            case DpMode::Optimize:
            case DpMode::OptMarked:
                choice_ = detail::best_accepting(p, fold_.table);
                if (choice_) value_ = ctx_->sign * fold_.table.at(*choice_);
                accepts_ = choice_.has_value();
                if (ctx_->mode == DpMode::OptMarked)
                    accepts_ = accepts_ && p.is_accepting(psi_) && *value_ == marked_;
                break;
        }
    }

    const DpContext* ctx_;
    ElimTreeState tree_;
    BagData bag_;
    Graph base_;
    std::size_t budget_ = 0;
    std::vector<bool> got_;
    std::vector<ClassId> child_cls_, child_psi_;
    std::vector<OptTable> child_opt_;
    std::vector<CountTable> child_count_;
    std::vector<Weight> child_marked_;
    std::vector<StreamIn> streams_;
    StreamOut up_;
    bool computed_ = false;
    bool halted_ = false;

    ClassId cls_ = 0, psi_ = 0;
    Weight marked_ = 0;
    OptFold fold_;
    CountTable count_table_;
    bool accepts_ = false;
    std::optional<ClassId> choice_;
    std::optional<Weight> value_;
    BigInt count_ = 0;
};

/// Top-down phase of optimization: each node learns its chosen class c_u from its parent, passes
/// the children's classes on, and selects its own part of the witness.
class TopDownProgram {
public:
    TopDownProgram(const DpContext* ctx, const BottomUpProgram& up)
        : ctx_(ctx), tree_(up.tree()), bag_ids_(up.bag().ids), fold_(up.fold()), chosen_(up.root_choice()) {}

    void init(const NodeInfo&) {}

    void step(int, const Mailbox& in, Mailbox& out) {
        if (tree_.parent_port) {
            const auto& m = in.at(*tree_.parent_port);
            if (!m) return;
            chosen_ = static_cast<ClassId>(BitReader(*m).get(ctx_->class_bits));
        }
        auto cc = unwind(fold_, *chosen_);
        for (std::size_t k = 0; k < tree_.child_ports.size(); ++k) {
            BitWriter w;
            w.put(cc[k], ctx_->class_bits);
            out[tree_.child_ports[k]] = w.take();
        }
        selection_ = owned_selection(ctx_->p->selected(*chosen_, bag_ids_), tree_.id);
        halted_ = true;
    }

    bool halted() const { return halted_; }
    const Selection& selection() const { return selection_; }

private:
    const DpContext* ctx_;
    ElimTreeState tree_;
    std::vector<NodeId> bag_ids_;
    OptFold fold_;
    std::optional<ClassId> chosen_;
    Selection selection_;
    bool halted_ = false;
};

struct DistReport {
    DpMode mode = DpMode::Decide;
    bool large_treedepth = false;
    /// The root's verdict; every other node accepts.
    bool verdict = false;
    std::map<NodeId, bool> accepts;
    std::optional<Weight> value;
    Selection witness;
    std::map<NodeId, Selection> fragments;
    std::optional<BigInt> count;
    NodeId root = 0;
    int tree_depth = 0;

    RoundTrace elim_trace, bag_trace, up_trace, down_trace;
    std::size_t class_count = 0;
    std::size_t class_id_bits = 0;
    std::size_t budget_bits = 0;

    int rounds_elim_tree() const { return elim_trace.rounds; }
    int rounds_bags() const { return bag_trace.rounds; }
    int rounds_bottom_up() const { return up_trace.rounds; }
    int rounds_top_down() const { return down_trace.rounds; }
    int rounds_total() const { return rounds_elim_tree() + rounds_bags() + rounds_bottom_up() + rounds_top_down(); }
    std::size_t max_message_bits() const {
        return std::max({elim_trace.max_bits(), bag_trace.max_bits(), up_trace.max_bits(), down_trace.max_bits()});
    }
};

namespace detail {

struct FreezeGuard {
    RegularPredicate& p;
    explicit FreezeGuard(RegularPredicate& q) : p(q) { p.freeze(); }
    ~FreezeGuard() { p.thaw(); }
};

inline DistReport run_distributed(const Graph& g, RegularPredicate& p, DpMode mode, bool maximize,
                                  const DistOptions& opt) {
    DistReport rep;
    rep.mode = mode;
    SimOptions sim;
    sim.budget_factor = opt.budget_factor;
    rep.budget_bits = message_budget(g.n(), opt.budget_factor);
    auto elim = build_elimination_tree(g, opt.d, sim);
    rep.elim_trace = elim.trace;
    if (elim.large_treedepth) {
        rep.large_treedepth = true;
        for (NodeId u : g.nodes()) rep.accepts[u] = false;
        return rep;
    }
    rep.tree_depth = elim.forest.height();
    rep.root = elim.forest.roots().at(0);
    if (static_cast<std::size_t>(rep.tree_depth) > p.width())
        throw WidthExceeded("elimination tree of depth " + std::to_string(rep.tree_depth) +
                            " needs predicate width " + std::to_string(rep.tree_depth));

    DpContext ctx;
    ctx.p = &p;
    ctx.mode = mode;
    ctx.sign = maximize ? 1 : -1;
    ctx.mark_label = opt.mark_label;
    std::set<std::string> vocab(p.label_vocabulary().begin(), p.label_vocabulary().end());
    if (mode == DpMode::Decide || mode == DpMode::OptMarked)
        for (const auto& l : assignment_labels(p, opt.mark_label)) vocab.insert(l);
    ctx.vocab.assign(vocab.begin(), vocab.end());

    // warm-up: the sequential pass on the same decomposition fixes the class space
    TreeDecomposition td = canonical_decomposition(g, elim.forest);
    switch (mode) {
        case DpMode::Decide: decide(g, td, p, assignment_from_labels(g, p, opt.mark_label)); break;
        case DpMode::Count: count(g, td, p); break;
        case DpMode::OptMarked:
            decide(g, td, p, assignment_from_labels(g, p, opt.mark_label));
            [[fallthrough]];
        case DpMode::Optimize:
            try {
                optimize(g, td, p, maximize);
            } catch (const Unsatisfiable&) {
            }
            break;
    }
    FreezeGuard guard(p);
    rep.class_count = p.class_count();
    rep.class_id_bits = bits_for(rep.class_count);
    ctx.class_bits = rep.class_id_bits;

    SimOptions data = sim;
    data.max_rounds = opt.data_round_limit;
    auto bags = distribute_bags(g, elim, ctx.vocab, data);
    rep.bag_trace = bags.trace;

    std::map<NodeId, BottomUpProgram> up;
    for (NodeId u : g.nodes()) up.emplace(u, BottomUpProgram(&ctx, elim.states.at(u), bags.bags.at(u)));
    auto upres = run(g, std::move(up), data);
    rep.up_trace = upres.trace;
    const BottomUpProgram& root = upres.nodes.at(rep.root);
    rep.verdict = root.root_accepts();
    for (NodeId u : g.nodes()) rep.accepts[u] = u == rep.root ? rep.verdict : true;
    if (mode == DpMode::Count) rep.count = root.root_count();
    if (mode == DpMode::Optimize || mode == DpMode::OptMarked) rep.value = root.root_value();

    if (mode == DpMode::Optimize && root.root_choice()) {
        std::map<NodeId, TopDownProgram> down;
        for (const auto& [u, prog] : upres.nodes) down.emplace(u, TopDownProgram(&ctx, prog));
        auto downres = run(g, std::move(down), data);
        rep.down_trace = downres.trace;
        std::set<NodeId> wv;
        std::set<Edge> we;
        for (const auto& [u, prog] : downres.nodes) {
            rep.fragments[u] = prog.selection();
            wv.insert(prog.selection().vertices.begin(), prog.selection().vertices.end());
            we.insert(prog.selection().edges.begin(), prog.selection().edges.end());
        }
        rep.witness.vertices.assign(wv.begin(), wv.end());
        rep.witness.edges.assign(we.begin(), we.end());
    }
    return rep;
}

}  // namespace detail

/// All nodes accept iff g satisfies p (under the labelled assignment, if p has free variables);
/// otherwise the root rejects.
inline DistReport distributed_decide(const Graph& g, RegularPredicate& p, const DistOptions& opt = {}) {
    return detail::run_distributed(g, p, DpMode::Decide, true, opt);
}

/// Optimal weight of the single free set; each node selects its own part of the witness.
inline DistReport distributed_optimize(const Graph& g, RegularPredicate& p, bool maximize, const DistOptions& opt = {}) {
    if (p.free_vars().size() != 1) throw std::invalid_argument("optimize needs exactly one free set variable");
    return detail::run_distributed(g, p, DpMode::Optimize, maximize, opt);
}

/// Number of satisfying assignments, known at the root.
inline DistReport distributed_count(const Graph& g, RegularPredicate& p, const DistOptions& opt = {}) {
    return detail::run_distributed(g, p, DpMode::Count, true, opt);
}

/// All nodes accept iff the set labelled `mark_label` satisfies p and has optimal weight.
inline DistReport distributed_optmarked(const Graph& g, RegularPredicate& p, bool maximize,
                                        const DistOptions& opt = {}) {
    if (p.free_vars().size() != 1) throw std::invalid_argument("optmarked needs exactly one free set variable");
    return detail::run_distributed(g, p, DpMode::OptMarked, maximize, opt);
}

inline nlohmann::json report_json(const DistReport& r) {
    nlohmann::json j;
    j["status"] = r.large_treedepth ? "LargeTreedepth" : "ok";
    if (!r.large_treedepth) {
        switch (r.mode) {
            case DpMode::Decide:
            case DpMode::OptMarked: j["verdict"] = r.verdict; break;
            case DpMode::Optimize:
                j["verdict"] = r.verdict;
                if (r.value) j["value"] = *r.value;
                j["witness"] = selection_json(r.witness);
                break;
            case DpMode::Count: j["count"] = r.count->str(); break;
        }
        j["tree_depth"] = r.tree_depth;
    }
    j["rounds_total"] = r.rounds_total();
    j["rounds_elim_tree"] = r.rounds_elim_tree();
    j["rounds_bags"] = r.rounds_bags();
    j["rounds_bottom_up"] = r.rounds_bottom_up();
    j["rounds_top_down"] = r.rounds_top_down();
    j["max_message_bits"] = r.max_message_bits();
    j["budget_bits"] = r.budget_bits;
    j["class_count"] = r.class_count;
    j["class_id_bits"] = r.class_id_bits;
    return j;
}

}  // namespace tdmso
