#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epora/instance.hpp"
#include "epora/lp.hpp"

namespace epora {

// Declarative experiment grid: one instance source, one sweep variable, a
// policy list, a replication budget.  Parsed from the JSON dialect shown in
// the README.
struct GeneratorSpec {
    std::string name;  // lower-bound | homogeneous | table1
    int n = 10;        // lower-bound
    int n_supply = 500;
    int n_demand = 500;
    int avg_degree = 10;
    long long capacity = 5;
    double kappa_floor = 0.6;
    std::uint64_t seed = 0;
};

struct SweepSpec {
    std::string variable;  // rho | b_floor | kappa_floor | tau
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string name;
    bool from_file = false;
    std::string instance_path;
    GeneratorSpec generator;
    std::vector<std::string> policies;
    SweepSpec sweep;
    long long replications = 100;
    std::uint64_t seed = 0;
    bool lp_cache = false;
    double rho = -1.0;     // fixed scarcity for non-rho sweeps; -1 = as generated
    long long b_floor = 1; // fixed capacity floor for non-b_floor sweeps
    std::vector<double> group_breakdown_rhos;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

// Benchmark header numbers for one instance: which constraint family pins
// the optimum.  "disproportionality" when s* sits on kappa_min,
// "scarcity" when it sits on B/lambda, "structural" otherwise; matching is
// within 1e-4, ties go to the smaller margin.
struct LpDiagnostics {
    double sweep_value = 0.0;
    double s_star = 0.0;
    double kappa_min = 0.0;
    double scarcity_bound = 0.0;  // B / lambda
    double b_min = 0.0;
    std::string bottleneck;
    double margin_kappa = 0.0;
    double margin_scarcity = 0.0;
};

LpDiagnostics make_lp_diagnostics(const InstanceIndex& index, double s_star);

// Solves the general benchmark itself (honoring the cache dir when given).
LpDiagnostics report_lp_diagnostics(const Instance& inst,
                                    const std::string& cache_dir = "");

// Runs the whole grid and writes
//   <outdir>/<name>/results.csv
//   <outdir>/<name>/config.json
//   <outdir>/<name>/lp_diagnostics.json
// plus groups_{asr,rsr}_rho<v>.csv per requested breakdown scarcity.  Cells
// run in sweep-major, policy-minor order, all off the same master seed.
// Returns the experiment directory.  Failures carry the offending cell in
// the error message.
std::string run_experiment(const ExperimentConfig& config,
                           const std::string& outdir);

}  // namespace epora
