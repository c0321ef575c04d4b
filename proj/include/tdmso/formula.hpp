#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdmso {

/// Variable sorts: single vertex, single edge, vertex set, edge set.
enum class Sort { Vertex, Edge, VertexSet, EdgeSet };

constexpr bool is_set_sort(Sort s) { return s == Sort::VertexSet || s == Sort::EdgeSet; }
constexpr bool is_vertex_kind(Sort s) { return s == Sort::Vertex || s == Sort::VertexSet; }
constexpr Sort set_sort_of(Sort s) { return is_vertex_kind(s) ? Sort::VertexSet : Sort::EdgeSet; }

inline const char* sort_keyword(Sort s) {
    switch (s) {
        case Sort::Vertex: return "v";
        case Sort::Edge: return "e";
        case Sort::VertexSet: return "vs";
        case Sort::EdgeSet: return "es";
    }
    return "?";
}

/// Atoms are uniform over vertex-kind (resp. edge-kind) terms: an element is read as a singleton set.
///   Adj(A,B): some a in A is adjacent to some b in B.   Inc(A,E): some a in A is incident to some e in E.
///   Eq(A,B): A = B.   In(a,B) / Sub(A,B): A is a subset of B.   Sing(A): |A| = 1.
///   Label(l,A): every element of A carries label l.
enum class Kind { Adj, Inc, Eq, In, Sub, Sing, Label, Not, And, Or, Implies, Exists, Forall };

constexpr bool is_atom(Kind k) { return k <= Kind::Label; }
constexpr bool is_quantifier(Kind k) { return k == Kind::Exists || k == Kind::Forall; }

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Kind kind;
    std::vector<std::string> vars;  // atom arguments, or the bound variable of a quantifier
    std::string label;              // Label atoms only
    Sort sort = Sort::Vertex;       // quantifiers only
    std::vector<FormulaPtr> sub;

    static FormulaPtr atom(Kind k, std::vector<std::string> args, std::string label = {}) {
        return std::make_shared<Formula>(Formula{k, std::move(args), std::move(label), Sort::Vertex, {}});
    }
    static FormulaPtr negate(FormulaPtr a) { return std::make_shared<Formula>(Formula{Kind::Not, {}, {}, Sort::Vertex, {std::move(a)}}); }
    static FormulaPtr binary(Kind k, FormulaPtr a, FormulaPtr b) {
        return std::make_shared<Formula>(Formula{k, {}, {}, Sort::Vertex, {std::move(a), std::move(b)}});
    }
    static FormulaPtr quant(Kind k, Sort s, std::string var, FormulaPtr body) {
        return std::make_shared<Formula>(Formula{k, {std::move(var)}, {}, s, {std::move(body)}});
    }
};

inline bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind || a.vars != b.vars || a.label != b.label || a.sub.size() != b.sub.size()) return false;
    if (is_quantifier(a.kind) && a.sort != b.sort) return false;
    for (std::size_t i = 0; i < a.sub.size(); ++i)
        if (!structurally_equal(*a.sub[i], *b.sub[i])) return false;
    return true;
}

inline int quantifier_rank(const Formula& f) {
    int r = 0;
    for (const auto& s : f.sub) r = std::max(r, quantifier_rank(*s));
    return is_quantifier(f.kind) ? r + 1 : r;
}

struct FreeVar {
    std::string name;
    Sort sort;
    friend bool operator==(const FreeVar&, const FreeVar&) = default;
};

/// A well-sorted formula together with its declared free variables.
class MsoFormula {
public:
    MsoFormula() = default;
    MsoFormula(std::vector<FreeVar> free, FormulaPtr body)
        : free_(std::move(free)), body_(std::move(body)), rank_(quantifier_rank(*body_)) {}

    const std::vector<FreeVar>& free_vars() const { return free_; }
    const FormulaPtr& body() const { return body_; }
    int rank() const { return rank_; }
    std::size_t free_count() const { return free_.size(); }

    friend bool operator==(const MsoFormula& a, const MsoFormula& b) {
        return a.free_ == b.free_ && structurally_equal(*a.body_, *b.body_);
    }

private:
    std::vector<FreeVar> free_;
    FormulaPtr body_;
    int rank_ = 0;
};

class FormulaError : public std::runtime_error {
public:
    FormulaError(const std::string& kind, std::size_t pos, const std::string& what)
        : std::runtime_error(kind + " at offset " + std::to_string(pos) + ": " + what), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

class SyntaxError : public FormulaError {
public:
    SyntaxError(std::size_t pos, const std::string& what) : FormulaError("syntax error", pos, what) {}
};

class SortError : public FormulaError {
public:
    SortError(std::size_t pos, const std::string& what) : FormulaError("sort error", pos, what) {}
};

// ---------------------------------------------------------------------------------------------
// printing

namespace detail {

inline void print_formula(const Formula& f, std::string& out, bool operand) {
    switch (f.kind) {
        case Kind::Adj: out += "adj(" + f.vars[0] + "," + f.vars[1] + ")"; return;
        case Kind::Inc: out += "inc(" + f.vars[0] + "," + f.vars[1] + ")"; return;
        case Kind::Eq: out += f.vars[0] + " = " + f.vars[1]; return;
        case Kind::In: out += f.vars[0] + " in " + f.vars[1]; return;
        case Kind::Sub: out += f.vars[0] + " sub " + f.vars[1]; return;
        case Kind::Sing: out += "sing(" + f.vars[0] + ")"; return;
        case Kind::Label: out += "label(" + f.label + "," + f.vars[0] + ")"; return;
        case Kind::Not:
            out += "~";
            print_formula(*f.sub[0], out, true);
            return;
        case Kind::And:
        case Kind::Or:
        case Kind::Implies: {
            const char* op = f.kind == Kind::And ? " & " : f.kind == Kind::Or ? " | " : " -> ";
            out += "(";
            print_formula(*f.sub[0], out, true);
            out += op;
            print_formula(*f.sub[1], out, true);
            out += ")";
            return;
        }
        case Kind::Exists:
        case Kind::Forall:
            if (operand) out += "(";
            out += (f.kind == Kind::Exists ? "exists_" : "forall_");
            out += sort_keyword(f.sort);
            out += " " + f.vars[0] + ". ";
            print_formula(*f.sub[0], out, false);
            if (operand) out += ")";
            return;
    }
}

}  // namespace detail

inline std::string to_string(const Formula& f) {
    std::string out;
    detail::print_formula(f, out, false);
    return out;
}

/// Concrete syntax accepted by parse_formula.
inline std::string to_string(const MsoFormula& f) {
    std::string out;
    for (const auto& v : f.free_vars()) out += std::string("free ") + sort_keyword(v.sort) + " " + v.name + "\n";
    out += to_string(*f.body());
    return out;
}

// ---------------------------------------------------------------------------------------------
// parsing

namespace detail {

struct Token {
    enum Type { Ident, Punct, End } type;
    std::string text;
    std::size_t pos;
};

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '#') {
            while (i < s.size() && s[i] != '\n') ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Token::Ident, std::string(s.substr(i, j - i)), i});
            i = j;
        } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
            out.push_back({Token::Punct, "->", i});
            i += 2;
        } else if (std::string_view("~&|(),.=").find(c) != std::string_view::npos) {
            out.push_back({Token::Punct, std::string(1, c), i});
            ++i;
        } else {
            throw SyntaxError(i, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Token::End, "", s.size()});
    return out;
}

inline bool is_keyword(const std::string& w) {
    static const char* kws[] = {"adj", "inc", "label", "sing", "in", "sub", "free"};
    for (const char* k : kws)
        if (w == k) return true;
    return w.rfind("exists_", 0) == 0 || w.rfind("forall_", 0) == 0;
}

inline bool parse_sort(const std::string& w, Sort& s) {
    if (w == "v") s = Sort::Vertex;
    else if (w == "e") s = Sort::Edge;
    else if (w == "vs") s = Sort::VertexSet;
    else if (w == "es") s = Sort::EdgeSet;
    else return false;
    return true;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    MsoFormula parse() {
        std::vector<FreeVar> free;
        while (peek().type == Token::Ident && peek().text == "free") {
            next();
            const Token& st = next();
            Sort s;
            if (st.type != Token::Ident || !parse_sort(st.text, s)) throw SyntaxError(st.pos, "expected a sort after 'free'");
            std::string name = ident("variable name");
            for (const auto& f : free)
                if (f.name == name) throw SortError(st.pos, "free variable '" + name + "' declared twice");
            free.push_back({name, s});
            scope_.push_back({name, s});
        }
        auto body = implies();
        if (peek().type != Token::End) throw SyntaxError(peek().pos, "unexpected '" + peek().text + "'");
        return MsoFormula(std::move(free), std::move(body));
    }

private:
    const Token& peek() const { return toks_[at_]; }
    const Token& next() { return toks_[at_ == toks_.size() - 1 ? at_ : at_++]; }
    bool accept(const char* p) {
        if (peek().type == Token::Punct && peek().text == p) {
            next();
            return true;
        }
        return false;
    }
    void expect(const char* p) {
        if (!accept(p)) throw SyntaxError(peek().pos, std::string("expected '") + p + "'");
    }
    std::string ident(const char* what) {
        const Token& t = next();
        if (t.type != Token::Ident || is_keyword(t.text)) throw SyntaxError(t.pos, std::string("expected ") + what);
        return t.text;
    }

    Sort lookup(const std::string& name, std::size_t pos) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == name) return it->sort;
        throw SortError(pos, "undeclared variable '" + name + "'");
    }

    FormulaPtr implies() {
        auto lhs = disjunction();
        if (accept("->")) return Formula::binary(Kind::Implies, lhs, implies());
        return lhs;
    }
    FormulaPtr disjunction() {
        auto lhs = conjunction();
        while (accept("|")) lhs = Formula::binary(Kind::Or, lhs, conjunction());
        return lhs;
    }
    FormulaPtr conjunction() {
        auto lhs = unary();
        while (accept("&")) lhs = Formula::binary(Kind::And, lhs, unary());
        return lhs;
    }
    FormulaPtr unary() {
        if (accept("~")) return Formula::negate(unary());
        return primary();
    }

    FormulaPtr primary() {
        if (accept("(")) {
            auto f = implies();
            expect(")");
            return f;
        }
        const Token& t = peek();
        if (t.type != Token::Ident) throw SyntaxError(t.pos, "expected a formula");
        for (const char* q : {"exists_", "forall_"}) {
            if (t.text.rfind(q, 0) == 0) {
                Sort s;
                if (!parse_sort(t.text.substr(7), s)) throw SyntaxError(t.pos, "unknown quantifier '" + t.text + "'");
                next();
                std::string var = ident("bound variable");
                expect(".");
                scope_.push_back({var, s});
                auto body = implies();
                scope_.pop_back();
                return Formula::quant(q[0] == 'e' ? Kind::Exists : Kind::Forall, s, var, body);
            }
        }
        return atom();
    }

    std::pair<std::string, Sort> term() {
        std::size_t pos = peek().pos;
        std::string name = ident("variable");
        return {name, lookup(name, pos)};
    }

    FormulaPtr atom() {
        const Token& t = peek();
        std::size_t pos = t.pos;
        if (t.text == "adj" || t.text == "inc") {
            bool adj = t.text == "adj";
            next();
            expect("(");
            auto [a, sa] = term();
            expect(",");
            auto [b, sb] = term();
            expect(")");
            if (adj && !(is_vertex_kind(sa) && is_vertex_kind(sb))) throw SortError(pos, "adj expects vertex terms");
            if (!adj && !(is_vertex_kind(sa) && !is_vertex_kind(sb))) throw SortError(pos, "inc expects (vertex, edge) terms");
            return Formula::atom(adj ? Kind::Adj : Kind::Inc, {a, b});
        }
        if (t.text == "label") {
            next();
            expect("(");
            std::string name = ident("label name");
            expect(",");
            auto [a, sa] = term();
            expect(")");
            return Formula::atom(Kind::Label, {a}, name);
        }
        if (t.text == "sing") {
            next();
            expect("(");
            auto [a, sa] = term();
            expect(")");
            return Formula::atom(Kind::Sing, {a});
        }
        auto [a, sa] = term();
        if (accept("=")) {
            auto [b, sb] = term();
            if (is_vertex_kind(sa) != is_vertex_kind(sb)) throw SortError(pos, "'=' compares terms of different kinds");
            return Formula::atom(Kind::Eq, {a, b});
        }
        const Token& op = next();
        if (op.type == Token::Ident && (op.text == "in" || op.text == "sub")) {
            auto [b, sb] = term();
            if (!is_set_sort(sb)) throw SortError(pos, "right side of '" + op.text + "' must be a set");
            if (is_vertex_kind(sa) != is_vertex_kind(sb)) throw SortError(pos, "membership between different kinds");
            if (op.text == "in") {
                if (is_set_sort(sa)) throw SortError(pos, "left side of 'in' must be an element");
                return Formula::atom(Kind::In, {a, b});
            }
            return Formula::atom(Kind::Sub, {a, b});
        }
        throw SyntaxError(op.pos, "expected '=', 'in' or 'sub' after a term");
    }

    std::vector<Token> toks_;
    std::size_t at_ = 0;
    std::vector<FreeVar> scope_;
};

}  // namespace detail

inline MsoFormula parse_formula(std::string_view text) { return detail::Parser(text).parse(); }

inline MsoFormula load_formula(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open formula file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_formula(ss.str());
}

}  // namespace tdmso
