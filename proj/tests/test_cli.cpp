// Experiment runner, golden reports and command line exit codes.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>

#include "tdmso/experiment.hpp"

using namespace tdmso;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TDMSO_SOURCE_DIR;

std::string data(const char* name) { return (kSource / "tests" / "data" / name).string(); }
std::string formula(const char* name) { return (kSource / "formulas" / (std::string(name) + ".mso")).string(); }

int cli(const std::string& args) {
    std::string cmd = std::string(TDMSO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

/// Compares against tests/golden/<name>.json; TDMSO_UPDATE_GOLDEN=1 rewrites the file instead.
void expect_golden(const std::string& name, const nlohmann::json& report) {
    fs::path path = kSource / "tests" / "golden" / (name + ".json");
    if (std::getenv("TDMSO_UPDATE_GOLDEN")) {
        std::ofstream(path) << report.dump(2) << '\n';
        return;
    }
    std::ifstream in(path);
    ASSERT_TRUE(in) << "missing golden file " << path;
    nlohmann::json want = nlohmann::json::parse(in);
    EXPECT_EQ(report, want) << "report differs from " << path << ":\n" << report.dump(2);
}

}  // namespace

TEST(Experiment, DecideTriangleFreeOnCycle) {
    ExperimentConfig cfg;
    cfg.generator = "cycle";
    cfg.generator_params = {5};
    cfg.formula_file = formula("triangle_free");
    auto out = run_experiment(cfg);
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_EQ(out.report["result"]["verdict"], true);
    EXPECT_LE(out.report["result"]["rounds_elim_tree"].get<int>(), 10 * 64);
    EXPECT_EQ(out.report["schema"], kReportSchema);
    expect_golden("decide_cycle5_triangle_free", out.report);
}

TEST(Experiment, OptimizeIndependentSetOnCycle) {
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::Optimize;
    cfg.graph_file = data("c5.graph");
    cfg.builtin = "independent_set";
    auto out = run_experiment(cfg);
    EXPECT_EQ(out.report["result"]["value"], 2);
    expect_golden("optimize_cycle5_independent_set", out.report);
}

TEST(Experiment, CountTrianglesOnK4) {
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::Count;
    cfg.generator = "complete";
    cfg.generator_params = {4};
    cfg.formula_name = "triangles";
    auto out = run_experiment(cfg);
    EXPECT_EQ(out.report["result"]["count"], "24");
    expect_golden("count_complete4_triangles", out.report);
}

TEST(Experiment, ExitCodes) {
    ExperimentConfig cfg;
    cfg.graph_file = data("k3.graph");
    cfg.formula_name = "triangle_free";
    EXPECT_EQ(run_experiment(cfg).exit_code, kExitReject);
    cfg.graph_file.clear();
    cfg.generator = "path";
    cfg.generator_params = {8};
    cfg.d = 1;
    EXPECT_EQ(run_experiment(cfg).exit_code, kExitLargeTreedepth);
    cfg.builtin = "independent_set";
    EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Experiment, OptMarkedAndHFree) {
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::OptMarked;
    cfg.graph_file = data("c5_marked.graph");
    cfg.builtin = "independent_set";
    EXPECT_EQ(run_experiment(cfg).exit_code, kExitOk);
    ExperimentConfig h;
    h.mode = ExperimentMode::HFree;
    h.graph_file = data("w5.graph");
    h.pattern_file = data("k3.graph");
    auto out = run_experiment(h);
    EXPECT_EQ(out.exit_code, kExitReject);
    EXPECT_EQ(out.report["result"]["h_free"], false);
    h.graph_file = data("c5.graph");
    EXPECT_EQ(run_experiment(h).exit_code, kExitOk);
}

TEST(Experiment, TraceFile) {
    ExperimentConfig cfg;
    cfg.graph_file = data("c5.graph");
    cfg.builtin = "k_colorable";
    fs::path trace = fs::temp_directory_path() / "tdmso_trace_test.jsonl";
    cfg.trace_file = trace.string();
    auto out = run_experiment(cfg);
    std::ifstream in(trace);
    std::string line;
    int phases = 0, lines = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        phases += j.contains("phase");
        ++lines;
    }
    EXPECT_EQ(phases, 4);
    EXPECT_GT(lines, 8);
    fs::remove(trace);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("check --graph " + data("c5.graph") + " --formula " + formula("triangle_free")), 0);
    EXPECT_EQ(cli("check --graph " + data("k3.graph") + " --named triangle_free"), 2);
    EXPECT_EQ(cli("check --generator path --params 8 --d 1 --named triangle_free"), 3);
    EXPECT_EQ(cli("check --graph /nonexistent.graph --named triangle_free"), 4);
    EXPECT_EQ(cli("check --graph " + data("c5.graph") + " --named no_such_formula"), 4);
    EXPECT_EQ(cli("check --graph " + data("c5.graph") + " --formula " + data("c5.graph")), 4);
    EXPECT_EQ(cli("frobnicate"), 4);
    EXPECT_EQ(cli("opt --graph " + data("c5.graph") + " --builtin vertex_cover --minimize"), 0);
    EXPECT_EQ(cli("count --generator cycle --params 6 --named perfect_matchings --width 6"), 0);
    EXPECT_EQ(cli("optmarked --graph " + data("c5_marked.graph") + " --builtin independent_set"), 0);
    EXPECT_EQ(cli("hfree --graph " + data("w5.graph") + " --pattern " + data("k3.graph")), 2);
    EXPECT_EQ(cli("gen random_td 3 20 --seed 4"), 0);
    EXPECT_EQ(cli("gen hypercube 3"), 4);
}

TEST(Cli, JsonOutputMatchesLibrary) {
    fs::path out = fs::temp_directory_path() / "tdmso_cli_report.json";
    ASSERT_EQ(cli("count --generator complete --params 4 --named triangles --json " + out.string()), 0);
    std::ifstream in(out);
    auto j = nlohmann::json::parse(in);
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::Count;
    cfg.generator = "complete";
    cfg.generator_params = {4};
    cfg.formula_name = "triangles";
    EXPECT_EQ(j, run_experiment(cfg).report);
    fs::remove(out);
}
