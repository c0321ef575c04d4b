#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "tdmso/builtin_predicates.hpp"
#include "tdmso/compiled_mso.hpp"
#include "tdmso/distributed_dp.hpp"
#include "tdmso/generators.hpp"
#include "tdmso/graph_io.hpp"
#include "tdmso/hfree.hpp"
#include "tdmso/standard_formulas.hpp"

namespace tdmso {

inline constexpr const char* kReportSchema = "tdmso-report/1";

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitReject = 2, kExitLargeTreedepth = 3, kExitConfig = 4 };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ExperimentMode { Decide, Optimize, Count, OptMarked, HFree };

inline std::string mode_name(ExperimentMode m) {
    switch (m) {
        case ExperimentMode::Decide: return "decide";
        case ExperimentMode::Optimize: return "optimize";
        case ExperimentMode::Count: return "count";
        case ExperimentMode::OptMarked: return "optmarked";
        case ExperimentMode::HFree: return "hfree";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::Decide;

    /// Graph file, or a generator name with its parameters.
    std::string graph_file;
    std::string generator;
    std::vector<long long> generator_params;
    std::uint64_t seed = 1;

    /// Exactly one of: an MSO file, a standard formula name, a builtin predicate.
    std::string formula_file;
    std::string formula_name;
    std::string builtin;
    int k = 3;

    int d = 3;
    int budget_factor = kDefaultBudgetFactor;
    /// 0 picks min(2^d, 11).
    std::size_t width = 0;
    bool maximize = true;
    std::string mark_label = "mark";

    /// hfree only.
    std::string pattern_file;
    bool induced = false;
    std::string partition_file;

    /// Message trace as JSON lines, one block per phase.
    std::string trace_file;

    void validate() const {
        if (graph_file.empty() == generator.empty()) throw ConfigError("give exactly one of --graph and --generator");
        if (d < 1 || d > 8) throw ConfigError("--d must lie in 1..8");
        if (budget_factor < 1) throw ConfigError("--budget-factor must be positive");
        if (width > kMaxWidth) throw ConfigError("--width exceeds " + std::to_string(kMaxWidth));
        if (mode == ExperimentMode::HFree) {
            if (pattern_file.empty()) throw ConfigError("hfree needs --pattern");
            return;
        }
        int sources = !formula_file.empty() + !formula_name.empty() + !builtin.empty();
        if (sources != 1) throw ConfigError("give exactly one of --formula, --named and --builtin");
    }
};

struct ExperimentOutcome {
    nlohmann::json report;
    int exit_code = kExitOk;
};

namespace detail {

inline std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + " file " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Graph experiment_graph(const ExperimentConfig& cfg) {
    if (!cfg.graph_file.empty()) return parse_graph(read_file(cfg.graph_file, "graph"));
    return generate(cfg.generator, cfg.generator_params, cfg.seed);
}

inline std::size_t experiment_width(const ExperimentConfig& cfg) {
    return cfg.width ? cfg.width : std::min<std::size_t>(std::size_t{1} << cfg.d, kMaxWidth);
}

inline std::unique_ptr<RegularPredicate> experiment_predicate(const ExperimentConfig& cfg, nlohmann::json& info) {
    std::size_t w = experiment_width(cfg);
    info["width"] = w;
    if (!cfg.builtin.empty()) {
        info["builtin"] = cfg.builtin;
        if (cfg.builtin == "k_colorable") info["k"] = cfg.k;
        return builtin_predicate(cfg.builtin, w, cfg.k);
    }
    MsoFormula f;
    if (!cfg.formula_name.empty()) {
        info["formula_name"] = cfg.formula_name;
        try {
            f = named_formula(cfg.formula_name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        info["formula_file"] = std::filesystem::path(cfg.formula_file).filename().string();
        f = parse_formula(read_file(cfg.formula_file, "formula"));
    }
    info["quantifier_rank"] = f.rank();
    return compile_mso(f, w);
}

inline void write_traces(const std::string& path, const std::vector<std::pair<std::string, const RoundTrace*>>& phases) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trace file " + path);
    for (const auto& [name, t] : phases) {
        out << nlohmann::json{{"phase", name}}.dump() << '\n';
        out << t->to_jsonl();
    }
}

}  // namespace detail

/// Runs one configured pipeline: elimination tree, bag distribution, then the DP protocol.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Graph g = detail::experiment_graph(cfg);
    ExperimentOutcome out;
    nlohmann::json& j = out.report;
    j["schema"] = kReportSchema;
    j["mode"] = mode_name(cfg.mode);
    j["graph"] = {{"n", g.n()}, {"m", g.m()}};
    if (!cfg.generator.empty())
        j["graph"]["generator"] = {{"name", cfg.generator}, {"params", cfg.generator_params}};
    j["seed"] = cfg.seed;
    j["d"] = cfg.d;
    j["budget_factor"] = cfg.budget_factor;

    if (cfg.mode == ExperimentMode::HFree) {
        Graph h = parse_graph(detail::read_file(cfg.pattern_file, "pattern"));
        int p = static_cast<int>(h.n());
        LowTdPartition part;
        if (cfg.partition_file.empty()) {
            part = brute_ltd(g, p);
        } else {
            std::istringstream in(detail::read_file(cfg.partition_file, "partition"));
            part = parse_partition(in, p);
        }
        auto res = decide_h_freeness(g, h, part, cfg.induced, nullptr, cfg.budget_factor);
        j["d"] = p;
        j["pattern"] = {{"n", h.n()}, {"m", h.m()}, {"induced", cfg.induced}};
        j["partition"] = {{"source", cfg.partition_file.empty() ? "brute_ltd" : "file"}, {"parts", part.f_p}, {"p", p}};
        j["result"] = {{"h_free", res.h_free},          {"index_sets", res.index_sets},
                       {"runs", res.runs},              {"rounds_sum", res.rounds_sum},
                       {"rounds_max", res.rounds_max},  {"max_message_bits", res.max_message_bits},
                       {"rejecting", res.rejecting}};
        out.exit_code = res.h_free ? kExitOk : kExitReject;
        return out;
    }

    nlohmann::json info;
    auto pred = detail::experiment_predicate(cfg, info);
    j["predicate"] = info;
    DistOptions opt;
    opt.d = cfg.d;
    opt.budget_factor = cfg.budget_factor;
    opt.mark_label = cfg.mark_label;
    DistReport r;
    switch (cfg.mode) {
        case ExperimentMode::Decide: r = distributed_decide(g, *pred, opt); break;
        case ExperimentMode::Optimize:
            j["maximize"] = cfg.maximize;
            r = distributed_optimize(g, *pred, cfg.maximize, opt);
            break;
        case ExperimentMode::Count: r = distributed_count(g, *pred, opt); break;
        case ExperimentMode::OptMarked:
            j["maximize"] = cfg.maximize;
            r = distributed_optmarked(g, *pred, cfg.maximize, opt);
            break;
        case ExperimentMode::HFree: break;
    }
    j["result"] = report_json(r);
    if (!cfg.trace_file.empty())
        detail::write_traces(cfg.trace_file, {{"elim_tree", &r.elim_trace},
                                              {"bags", &r.bag_trace},
                                              {"bottom_up", &r.up_trace},
                                              {"top_down", &r.down_trace}});
    if (r.large_treedepth) out.exit_code = kExitLargeTreedepth;
    else if (!r.verdict && cfg.mode != ExperimentMode::Count) out.exit_code = kExitReject;
    return out;
}

}  // namespace tdmso
