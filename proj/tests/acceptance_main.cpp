// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cstring>
#include <iostream>
#include <string>

#include "tdmso/acceptance.hpp"

int main(int argc, char** argv) {
    tdmso::AcceptanceConfig cfg;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--scale" && i + 1 < argc) cfg.scale = argv[++i];
        else if (a == "--seed" && i + 1 < argc) cfg.seed = std::stoull(argv[++i]);
        else if (a == "--tamper") cfg.tamper = true;
        else if (a == "--no-repeat") cfg.skip_repeat = true;
        else {
            std::cerr << "usage: acceptance [--scale small|full] [--seed N] [--tamper] [--no-repeat]\n";
            return 4;
        }
    }
    auto rep = tdmso::run_acceptance(cfg, [](const tdmso::CriterionResult& r) {
        std::cout << tdmso::format_result(r) << std::endl;
    });
    std::cout << (rep.all_pass() ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
    return rep.all_pass() ? 0 : 1;
}
