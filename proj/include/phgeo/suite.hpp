#pragma once

#include "phgeo/report.hpp"

namespace phgeo {

struct SuiteConfig {
    uint64_t seed = 1;
    double tol_scale = 1.0;
    int jobs = 1;
    std::string filter;   // substring match on experiment names; empty = all
    std::string out_dir;  // when set, writes report.json and per-experiment CSVs

    static SuiteConfig from_json_file(const std::string& path);
};

// Experiment names, in execution order.
std::vector<std::string> suite_experiment_names();

// Runs the verification battery. Individual experiment failures are
// recorded in the reports, never abort the batch.
std::vector<ExperimentReport> run_paper_suite(const SuiteConfig& config);

// 0 iff every report passes.
int suite_exit_code(const std::vector<ExperimentReport>& reports);

// Single experiment by exact name (used by --filter and the CLI).
ExperimentReport run_experiment(const std::string& name, const SuiteConfig& config);

}  // namespace phgeo
