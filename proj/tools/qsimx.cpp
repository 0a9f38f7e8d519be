// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cstdio>
#include <string>
#include <vector>

#include "qsim/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

void print_usage() {
    std::printf(
        "qsimx: reproducible statevector experiments\n"
        "\n"
        "usage: qsimx --experiment NAME [--seed N] [--trials N] [--out PATH]\n"
        "             [--csv PATH] [--config FILE] [param flags] [--list]\n"
        "\n"
        "  --experiment NAME   experiment to run (see --list)\n"
        "  --seed N            RNG seed (default 1); identical seeds reproduce\n"
        "                      identical metrics byte for byte\n"
        "  --trials N          trial count (experiment-specific default)\n"
        "  --out PATH          write the JSON report to PATH\n"
        "  --csv PATH          write per-trial rows to PATH\n"
        "  --config FILE       flat key=value file; flags override file values\n"
        "  --list              list experiments and exit\n"
        "\n"
        "Param flags are experiment-specific, e.g. --lambda, --ell-out, --n, --m,\n"
        "--m-dist, --keys, --q, --eps, --tau, --max-iter, --domain-bits, --depth.\n"
        "Defaults are applied per experiment and echoed in the report's params\n"
        "block. The qubit budget defaults to 24; set QSIM_MAX_QUBITS to override.\n"
        "\n"
        "exit codes: 0 pass, 1 thresholds not met, 2 usage error, 3 qubit budget\n");
}

void print_list() {
    std::printf("experiments:\n");
    for (const auto& entry : qsim::experiments::experiment_catalog()) {
        std::printf("  %-18s %s\n", entry.name.c_str(), entry.description.c_str());
        std::printf("  %-18s defaults: %s\n", "", entry.defaults.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const auto parsed = qsim::experiments::parse_config(args);
        if (parsed.help) {
            print_usage();
            std::printf("\n");
            print_list();
            return kExitPass;
        }
        if (parsed.list) {
            print_list();
            return kExitPass;
        }
        if (parsed.config.experiment.empty()) {
            print_usage();
            return kExitUsage;
        }
        const auto report = qsim::experiments::run(parsed.config);
        std::printf("%s\n", report.doc.dump(2).c_str());
        return report.pass ? kExitPass : kExitFail;
    } catch (const qsim::experiments::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const qsim::BudgetError& e) {
        std::fprintf(stderr, "budget error: %s\n", e.what());
        return kExitBudget;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
