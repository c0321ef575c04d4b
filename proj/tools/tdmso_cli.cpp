// Command line front end: protocol runs, H-freeness, generators and the acceptance suite.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "tdmso/acceptance.hpp"
#include "tdmso/experiment.hpp"

using namespace tdmso;

namespace {

struct GraphSource {
    std::string file;
    std::string generator;
    std::vector<long long> params;
};

void add_common(CLI::App* sub, ExperimentConfig& cfg, GraphSource& src, std::string& json_path) {
    sub->add_option("--graph", src.file, "graph file");
    sub->add_option("--generator", src.generator, "path | cycle | complete | star | random_td");
    sub->add_option("--params", src.params, "generator parameters");
    sub->add_option("--seed", cfg.seed, "seed for generators");
    sub->add_option("--d", cfg.d, "treedepth budget of the elimination tree protocol")->check(CLI::Range(1, 8));
    sub->add_option("--budget-factor", cfg.budget_factor, "message budget is this times ceil(log2 n) bits");
    sub->add_option("--json", json_path, "write the report here as well");
    sub->add_option("--trace", cfg.trace_file, "message trace as JSON lines");
}

void add_predicate(CLI::App* sub, ExperimentConfig& cfg) {
    sub->add_option("--formula", cfg.formula_file, "MSO formula file");
    sub->add_option("--named", cfg.formula_name, "standard formula by name");
    sub->add_option("--builtin", cfg.builtin,
                    "k_colorable | independent_set | vertex_cover | dominating_set | acyclic_marked | spanning_tree_marked");
    sub->add_option("--k", cfg.k, "colours for k_colorable");
    sub->add_option("--width", cfg.width, "terminal width of the predicate (default min(2^d, 11))");
    sub->add_option("--mark-label", cfg.mark_label, "label holding a lone free variable or the marked set");
}

int emit(const ExperimentOutcome& out, const std::string& json_path) {
    std::cout << out.report.dump(2) << '\n';
    if (!json_path.empty()) {
        std::ofstream f(json_path);
        if (!f) throw ConfigError("cannot write " + json_path);
        f << out.report.dump(2) << '\n';
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdmso: MSO properties on bounded-treedepth graphs, sequential and simulated CONGEST"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    GraphSource src;
    std::string json_path;
    bool minimize = false;

    auto* check = app.add_subcommand("check", "decide a sentence distributedly");
    auto* opt = app.add_subcommand("opt", "optimize over a free set");
    auto* cnt = app.add_subcommand("count", "count satisfying assignments");
    auto* om = app.add_subcommand("optmarked", "verify that the marked set is optimal");
    auto* hf = app.add_subcommand("hfree", "decide H-freeness through a low treedepth partition");
    for (auto* sub : {check, opt, cnt, om, hf}) add_common(sub, cfg, src, json_path);
    for (auto* sub : {check, opt, cnt, om}) add_predicate(sub, cfg);
    for (auto* sub : {opt, om}) sub->add_flag("--minimize", minimize, "minimize instead of maximize");
    hf->add_option("--pattern", cfg.pattern_file, "pattern graph file")->required();
    hf->add_flag("--induced", cfg.induced, "induced copies instead of subgraphs");
    hf->add_option("--partition", cfg.partition_file, "partition file (default: exhaustive search, n <= 12)");

    auto* gen = app.add_subcommand("gen", "print a generated graph");
    std::string gen_name, gen_out;
    std::vector<long long> gen_params;
    std::vector<long long> gen_weights;
    std::uint64_t gen_seed = 1;
    gen->add_option("name", gen_name, "path | cycle | complete | star | random_td")->required();
    gen->add_option("params", gen_params, "generator parameters");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("--weights", gen_weights, "random weights in [lo, hi]")->expected(2);
    gen->add_option("--out", gen_out, "output file (default stdout)");

    auto* acc = app.add_subcommand("accept", "run the acceptance suite");
    AcceptanceConfig acfg;
    std::string acc_json;
    acc->add_option("--scale", acfg.scale, "small | full")->check(CLI::IsMember({"small", "full"}));
    acc->add_option("--seed", acfg.seed, "base seed");
    acc->add_flag("--tamper", acfg.tamper, "negative control: corrupt one oracle value");
    acc->add_flag("--no-repeat", acfg.skip_repeat, "skip the determinism rerun");
    acc->add_option("--json", acc_json, "write the pass/fail table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen) {
            Graph g = generate(gen_name, gen_params, gen_seed);
            if (!gen_weights.empty()) g = with_random_weights(g, gen_weights[0], gen_weights[1], gen_seed);
            if (gen_out.empty()) {
                std::cout << format_graph(g);
            } else {
                std::ofstream f(gen_out);
                if (!f) throw ConfigError("cannot write " + gen_out);
                f << format_graph(g);
            }
            return kExitOk;
        }
        if (*acc) {
            std::cout << "acceptance suite, scale " << acfg.scale << ", seed " << acfg.seed << std::endl;
            auto rep = run_acceptance(acfg, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
            std::cout << (rep.all_pass() ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
            if (!acc_json.empty()) {
                std::ofstream f(acc_json);
                if (!f) throw ConfigError("cannot write " + acc_json);
                f << acceptance_json(rep).dump(2) << '\n';
            }
            return rep.all_pass() ? kExitOk : kExitFailure;
        }
        cfg.graph_file = src.file;
        cfg.generator = src.generator;
        cfg.generator_params = src.params;
        cfg.maximize = !minimize;
        if (*check) cfg.mode = ExperimentMode::Decide;
        else if (*opt) cfg.mode = ExperimentMode::Optimize;
        else if (*cnt) cfg.mode = ExperimentMode::Count;
        else if (*om) cfg.mode = ExperimentMode::OptMarked;
        else cfg.mode = ExperimentMode::HFree;
        return emit(run_experiment(cfg), json_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FormulaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
