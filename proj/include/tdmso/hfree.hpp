#pragma once

#include <bit>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tdmso/compiled_mso.hpp"
#include "tdmso/distributed_dp.hpp"
#include "tdmso/graph_io.hpp"

namespace tdmso {

/// Vertex partition into parts 1..f_p meant to have small treedepth on every union of <= p parts.
struct LowTdPartition {
    std::map<NodeId, int> parts;
    int p = 1;
    int f_p = 0;

    /// Nodes of the parts listed in `index_set`.
    std::vector<NodeId> nodes_of(const std::vector<int>& index_set) const {
        std::vector<NodeId> out;
        for (const auto& [x, i] : parts)
            if (std::find(index_set.begin(), index_set.end(), i) != index_set.end()) out.push_back(x);
        return out;
    }
};

/// Sentence "some p distinct vertices carry H": adjacency for every edge of H and, when induced,
/// non-adjacency for every non-edge.
inline MsoFormula phi_h(const Graph& h, bool induced) {
    if (h.empty()) throw GraphError("pattern graph is empty");
    std::vector<std::string> var;
    for (NodeId x : h.nodes()) var.push_back("x" + std::to_string(x));
    std::string text, body;
    auto conj = [&](const std::string& a) { body += (body.empty() ? "" : " & ") + a; };
    for (const auto& v : var) text += "exists_v " + v + ". ";
    const auto& nodes = h.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            conj("~(" + var[i] + " = " + var[j] + ")");
            if (h.has_edge(nodes[i], nodes[j])) conj("adj(" + var[i] + "," + var[j] + ")");
            else if (induced) conj("~adj(" + var[i] + "," + var[j] + ")");
        }
    if (body.empty()) body = "x" + std::to_string(nodes[0]) + " = x" + std::to_string(nodes[0]);
    return parse_formula(text + "(" + body + ")");
}

/// The H-freeness sentence, the negation of phi_h.
inline MsoFormula h_free_formula(const Graph& h, bool induced) {
    MsoFormula f = phi_h(h, induced);
    return MsoFormula(f.free_vars(), Formula::negate(f.body()));
}

namespace detail {

/// Union of connected components' treedepths for a node subset, memoised by bitmask (n <= 12).
class SubsetTreedepth {
public:
    explicit SubsetTreedepth(const Graph& g) : g_(g) {}
    int operator()(std::uint32_t mask) {
        if (!mask) return 0;
        auto it = memo_.find(mask);
        if (it != memo_.end()) return it->second;
        std::vector<NodeId> keep;
        for (std::size_t i = 0; i < g_.n(); ++i)
            if (mask >> i & 1) keep.push_back(g_.nodes()[i]);
        return memo_[mask] = exact_treedepth(g_.induced(keep)).depth;
    }

private:
    const Graph& g_;
    std::map<std::uint32_t, int> memo_;
};

template <class F>
void for_each_index_set(int parts, int max_size, F&& f) {
    for (std::uint32_t s = 1; s < (std::uint32_t{1} << parts); ++s) {
        if (std::popcount(s) > max_size) continue;
        std::vector<int> I;
        for (int i = 0; i < parts; ++i)
            if (s >> i & 1) I.push_back(i + 1);
        f(I);
    }
}

}  // namespace detail

/// True iff every component of G_I gets an elimination tree from the protocol with d = p.
inline bool check_index_set(const Graph& g, const LowTdPartition& part, const std::vector<int>& index_set) {
    auto nodes = part.nodes_of(index_set);
    if (nodes.empty()) return true;
    Graph gi = g.induced(nodes);
    for (const auto& comp : connected_components(gi))
        if (build_elimination_tree(gi.induced(comp), part.p).large_treedepth) return false;
    return true;
}

/// Checks `sample` random index sets of size 1..p (all of them when sample is 0).
inline bool validate_partition(const Graph& g, const LowTdPartition& part, int sample, std::uint64_t seed = 1) {
    for (NodeId x : g.nodes())
        if (!part.parts.count(x)) throw std::invalid_argument("partition misses node " + std::to_string(x));
    if (part.f_p == 0) return true;
    if (sample == 0) {
        bool ok = true;
        detail::for_each_index_set(part.f_p, part.p, [&](const std::vector<int>& I) {
            ok = ok && check_index_set(g, part, I);
        });
        return ok;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(1, std::min(part.p, part.f_p));
    for (int k = 0; k < sample; ++k) {
        std::vector<int> all(part.f_p);
        std::iota(all.begin(), all.end(), 1);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(size(rng));
        std::sort(all.begin(), all.end());
        if (!check_index_set(g, part, all)) return false;
    }
    return true;
}

/// Fewest parts such that every union of at most p parts induces treedepth at most p, by
/// exhaustive search over set partitions (n <= 12).
inline LowTdPartition brute_ltd(const Graph& g, int p) {
    if (g.n() > kExactTreedepthLimit)
        throw SizeLimit("brute_ltd supports at most 12 nodes, got " + std::to_string(g.n()));
    if (p < 1) throw std::invalid_argument("p must be positive");
    const std::size_t n = g.n();
    detail::SubsetTreedepth td(g);
    std::vector<int> color(n, 0);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
        // restricted growth strings with exactly k parts
        std::vector<std::uint32_t> masks(k);
        bool found = false;
        auto good = [&]() {
            std::fill(masks.begin(), masks.end(), 0);
            for (std::size_t i = 0; i < n; ++i) masks[color[i]] |= std::uint32_t{1} << i;
            bool ok = true;
            detail::for_each_index_set(k, p, [&](const std::vector<int>& I) {
                if (!ok) return;
                std::uint32_t m = 0;
                for (int i : I) m |= masks[i - 1];
                ok = td(m) <= p;
            });
            return ok;
        };
        auto rec = [&](auto&& self, std::size_t i, int used) -> void {
            if (found) return;
            if (i == n) {
                if (used == k && good()) found = true;
                return;
            }
            if (static_cast<int>(n - i) < k - used) return;
            for (int c = 0; c <= std::min(used, k - 1) && !found; ++c) {
                color[i] = c;
                self(self, i + 1, std::max(used, c + 1));
            }
        };
        rec(rec, 0, 0);
        if (found) {
            LowTdPartition out;
            out.p = p;
            out.f_p = k;
            for (std::size_t i = 0; i < n; ++i) out.parts[g.nodes()[i]] = color[i] + 1;
            return out;
        }
    }
    LowTdPartition out;
    out.p = p;
    return out;
}

struct HFreeResult {
    bool h_free = true;
    int index_sets = 0;
    int runs = 0;
    /// Rounds if the index sets ran one after another, and if they ran in parallel.
    int rounds_sum = 0;
    int rounds_max = 0;
    std::size_t max_message_bits = 0;
    /// Index sets whose run found a copy.
    std::vector<std::vector<int>> rejecting;
};

/// Runs the distributed decision of H-freeness with d = p on every component of every G_I,
/// I a nonempty set of at most p parts.
inline HFreeResult decide_h_freeness(const Graph& g, const Graph& h, const LowTdPartition& part, bool induced,
                                     RegularPredicate* predicate = nullptr, int budget_factor = kDefaultBudgetFactor) {
    if (!h.is_connected()) throw GraphError("pattern graph must be connected");
    if (static_cast<int>(h.n()) != part.p)
        throw std::invalid_argument("partition parameter p must equal the pattern size");
    for (NodeId x : g.nodes())
        if (!part.parts.count(x)) throw std::invalid_argument("partition misses node " + std::to_string(x));
    std::unique_ptr<RegularPredicate> own;
    if (!predicate) {
        own = compile_mso(h_free_formula(h, induced), std::min<std::size_t>(std::size_t{1} << part.p, kMaxWidth));
        predicate = own.get();
    }
    DistOptions opt;
    opt.d = part.p;
    opt.budget_factor = budget_factor;
    HFreeResult res;
    detail::for_each_index_set(part.f_p, part.p, [&](const std::vector<int>& I) {
        ++res.index_sets;
        auto nodes = part.nodes_of(I);
        if (nodes.empty()) return;
        Graph gi = g.induced(nodes);
        int rounds = 0;
        bool found = false;
        for (const auto& comp : connected_components(gi)) {
            auto rep = distributed_decide(gi.induced(comp), *predicate, opt);
            ++res.runs;
            if (rep.large_treedepth) throw std::invalid_argument("partition is not a low treedepth decomposition");
            rounds = std::max(rounds, rep.rounds_total());
            res.max_message_bits = std::max(res.max_message_bits, rep.max_message_bits());
            found = found || !rep.verdict;
        }
        res.rounds_sum += rounds;
        res.rounds_max = std::max(res.rounds_max, rounds);
        if (found) {
            res.h_free = false;
            res.rejecting.push_back(I);
        }
    });
    return res;
}

inline LowTdPartition parse_partition(std::istream& in, int p) {
    LowTdPartition part;
    part.p = p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        long long id, idx;
        std::string extra;
        if (kw != "part" || !(ls >> id >> idx) || (ls >> extra) || id <= 0 || idx <= 0)
            throw ParseError(lineno, "expected 'part <node_id> <index>'");
        if (!part.parts.emplace(static_cast<NodeId>(id), static_cast<int>(idx)).second)
            throw ParseError(lineno, "node " + std::to_string(id) + " assigned twice");
        part.f_p = std::max(part.f_p, static_cast<int>(idx));
    }
    return part;
}

inline LowTdPartition load_partition(const std::string& path, int p) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open partition file " + path);
    return parse_partition(in, p);
}

inline std::string format_partition(const LowTdPartition& part) {
    std::ostringstream out;
    for (const auto& [x, i] : part.parts) out << "part " << x << ' ' << i << '\n';
    return out.str();
}

}  // namespace tdmso
