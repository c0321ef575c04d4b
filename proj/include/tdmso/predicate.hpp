#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdmso/formula.hpp"
#include "tdmso/treedepth.hpp"
#include "tdmso/wterminal.hpp"

namespace tdmso {

using ClassId = std::uint32_t;

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WidthExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownName : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kDefaultClassCap = 1'000'000;

/// Largest terminal count: terminal-pair masks must fit in 64 bits.
inline constexpr std::size_t kMaxWidth = 11;

/// Free variable of a predicate. `singleton` marks variables that range over single elements,
/// so assignments meeting a bag in two or more elements can be skipped.
struct PredicateVar {
    std::string name;
    Sort sort;  // VertexSet or EdgeSet
    bool singleton = false;
};

/// A predicate with finitely many composable homomorphism classes. Class ids are dense.
class RegularPredicate {
public:
    virtual ~RegularPredicate() = default;

    virtual std::string name() const = 0;
    virtual const std::vector<PredicateVar>& free_vars() const = 0;
    /// Label names the predicate reads; everything else on the graph is ignored.
    virtual const std::vector<std::string>& label_vocabulary() const = 0;

    std::size_t width() const { return width_; }

    /// Class of an arbitrary w-terminal graph with its assignment.
    virtual ClassId classify(const WTerminalGraph& g) = 0;
    /// Class of a graph whose vertices are all terminals.
    virtual ClassId classify_base(const Graph& base, const std::vector<Selection>& sets) {
        return classify(make_base(base, sets));
    }
    /// Composed class, or nothing when the traces disagree on identified terminals.
    virtual std::optional<ClassId> try_compose(ClassId c1, ClassId c2, const GlueMatrix& m) = 0;

    ClassId compose(ClassId c1, ClassId c2, const GlueMatrix& m) {
        auto c = try_compose(c1, c2, m);
        if (!c) throw IncompatibleAssignment("classes disagree on identified terminals");
        return *c;
    }

    virtual bool is_accepting(ClassId c) = 0;
    virtual std::size_t tau(ClassId c) const = 0;
    /// Terminal trace of free variable k: a bitmask over terminal ranks (vertex sets) or over
    /// terminal pairs (edge sets, see pair_index).
    virtual std::uint64_t trace(ClassId c, std::size_t k) const = 0;
    virtual std::size_t class_count() const = 0;

    /// The free set k restricted to the terminals, mapped to ids through the ordered terminal list.
    Selection selected(ClassId c, const std::vector<NodeId>& w_bag, std::size_t k = 0) const {
        Selection s;
        if (k >= free_vars().size()) return s;
        std::uint64_t mask = trace(c, k);
        int t = static_cast<int>(tau(c));
        if (is_vertex_kind(free_vars()[k].sort)) {
            for (int i = 0; i < t; ++i)
                if (mask >> i & 1) s.vertices.push_back(w_bag.at(i));
        } else {
            for (int p = 0; mask >> p; ++p)
                if (mask >> p & 1) {
                    auto [i, j] = pair_of(p, t);
                    s.edges.emplace_back(w_bag.at(i), w_bag.at(j));
                }
            std::sort(s.edges.begin(), s.edges.end());
        }
        return s;
    }

    /// After freezing, any attempt to create a new class throws BudgetError.
    void freeze() { frozen_ = true; }
    void thaw() { frozen_ = false; }
    bool frozen() const { return frozen_; }

    void set_class_cap(std::size_t cap) { cap_ = cap; }

    /// Debug text: class count, accepting ids, and one line per class.
    virtual std::string dump() {
        std::ostringstream out;
        out << "predicate " << name() << "\nclasses " << class_count() << "\naccepting";
        for (ClassId c = 0; c < class_count(); ++c)
            if (is_accepting(c)) out << ' ' << c;
        out << '\n';
        for (ClassId c = 0; c < class_count(); ++c) out << "class " << c << ' ' << describe(c) << '\n';
        return out.str();
    }

    virtual std::string describe(ClassId c) const {
        std::ostringstream out;
        out << "tau=" << tau(c);
        for (std::size_t k = 0; k < free_vars().size(); ++k) out << " trace" << k << '=' << trace(c, k);
        return out.str();
    }

protected:
    explicit RegularPredicate(std::size_t width) : width_(width) {
        if (width == 0 || width > kMaxWidth)
            throw WidthExceeded("predicate width must lie in 1.." + std::to_string(kMaxWidth));
    }

    void check_new_class(std::size_t current) const {
        if (frozen_) throw BudgetError("class space is frozen; a new class was requested");
        if (current >= cap_) throw BudgetError("class space exceeds the cap of " + std::to_string(cap_));
    }

    void check_tau(std::size_t tau) const {
        if (tau > width_)
            throw WidthExceeded("graph has " + std::to_string(tau) + " terminals, predicate width is " +
                                std::to_string(width_));
    }

private:
    std::size_t width_;
    std::size_t cap_ = kDefaultClassCap;
    bool frozen_ = false;
};

}  // namespace tdmso
