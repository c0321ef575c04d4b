#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tdmso/graph.hpp"

namespace tdmso {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

template <class Int>
Int parse_int(std::string_view s, std::size_t line, const char* what) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
}

inline LabelSet parse_labels(std::string_view s, std::size_t line) {
    LabelSet out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        std::string_view name = s.substr(start, comma - start);
        if (name.empty()) throw ParseError(line, "empty label name");
        out.emplace(name);
        start = comma + 1;
    }
    return out;
}

/// Parses the optional `label=a,b` and `w=<int>` attributes following the ids.
inline void parse_attributes(const std::vector<std::string>& toks, std::size_t first, std::size_t line,
                             LabelSet& labels, Weight& w) {
    bool seen_l = false, seen_w = false;
    for (std::size_t i = first; i < toks.size(); ++i) {
        std::string_view t = toks[i];
        if (t.rfind("label=", 0) == 0 && !seen_l) {
            labels = parse_labels(t.substr(6), line);
            seen_l = true;
        } else if (t.rfind("w=", 0) == 0 && !seen_w) {
            w = parse_int<Weight>(t.substr(2), line, "weight");
            seen_w = true;
        } else {
            throw ParseError(line, "unexpected token '" + toks[i] + "'");
        }
    }
}

}  // namespace detail

/// Reads the line-based graph format: `graph <n> <m>`, then `node` and `edge` lines.
/// Blank lines and lines starting with '#' are skipped.
inline Graph parse_graph(std::istream& in) {
    GraphBuilder b;
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    std::size_t want_n = 0, want_m = 0, got_n = 0, got_m = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto toks = detail::split_ws(raw);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (!header) {
            if (toks.size() != 3 || toks[0] != "graph") throw ParseError(line, "expected header 'graph <n> <m>'");
            want_n = detail::parse_int<std::size_t>(toks[1], line, "node count");
            want_m = detail::parse_int<std::size_t>(toks[2], line, "edge count");
            header = true;
            continue;
        }
        try {
            if (toks[0] == "node") {
                if (toks.size() < 2) throw ParseError(line, "node line needs an id");
                auto id = detail::parse_int<NodeId>(toks[1], line, "node id");
                LabelSet labels;
                Weight w = 1;
                detail::parse_attributes(toks, 2, line, labels, w);
                b.add_node(id, std::move(labels), w);
                ++got_n;
            } else if (toks[0] == "edge") {
                if (toks.size() < 3) throw ParseError(line, "edge line needs two endpoints");
                auto u = detail::parse_int<NodeId>(toks[1], line, "endpoint");
                auto v = detail::parse_int<NodeId>(toks[2], line, "endpoint");
                LabelSet labels;
                Weight w = 1;
                detail::parse_attributes(toks, 3, line, labels, w);
                b.add_edge(u, v, std::move(labels), w);
                ++got_m;
            } else {
                throw ParseError(line, "unknown directive '" + toks[0] + "'");
            }
        } catch (const GraphError& e) {
            throw ParseError(line, e.what());
        }
    }
    if (!header) throw ParseError(line, "missing header");
    if (got_n != want_n) throw ParseError(line, "header declares " + std::to_string(want_n) + " nodes, found " + std::to_string(got_n));
    if (got_m != want_m) throw ParseError(line, "header declares " + std::to_string(want_m) + " edges, found " + std::to_string(got_m));
    try {
        return b.build();
    } catch (const GraphError& e) {
        throw ParseError(line, e.what());
    }
}

inline Graph parse_graph(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

inline Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file " + path);
    return parse_graph(in);
}

inline std::string format_graph(const Graph& g) {
    auto attrs = [](const LabelSet& labels, Weight w) {
        std::string s;
        if (!labels.empty()) {
            s += " label=";
            bool first = true;
            for (const auto& l : labels) {
                if (!first) s += ',';
                s += l;
                first = false;
            }
        }
        if (w != 1) s += " w=" + std::to_string(w);
        return s;
    };
    std::ostringstream out;
    out << "graph " << g.n() << ' ' << g.m() << '\n';
    for (NodeId x : g.nodes()) out << "node " << x << attrs(g.vertex_labels(x), g.vertex_weight(x)) << '\n';
    for (const Edge& e : g.edges()) out << "edge " << e.u << ' ' << e.v << attrs(g.edge_labels(e), g.edge_weight(e)) << '\n';
    return out.str();
}

}  // namespace tdmso
