#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "epora/error.hpp"
#include "epora/experiment.hpp"
#include "epora/generators.hpp"
#include "epora/instance.hpp"
#include "epora/instance_io.hpp"
#include "epora/lp.hpp"
#include "epora/policy.hpp"
#include "epora/simulator.hpp"

namespace {

std::string env_cache_dir() {
    const char* env = std::getenv("EPORA_LP_CACHE_DIR");
    return env ? env : "";
}

void ensure_valid(const epora::Instance& inst, const std::string& label) {
    epora::ValidationReport report = epora::validate(inst);
    if (report.ok()) return;
    std::string detail;
    for (const auto& v : report.violations) {
        detail += "\n  " + v.code;
        if (!v.subject.empty()) detail += " [" + v.subject + "]";
        detail += ": " + v.message;
    }
    throw epora::EporaError("invalid_instance", label + detail);
}

int run(int argc, char** argv) {
    CLI::App app{"equity-aware online resource allocation toolkit"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand(
        "generate", "Produce a benchmark instance and write it as JSON");
    std::string gen_kind;
    generate
        ->add_option("kind", gen_kind,
                     "one of: lower-bound | homogeneous | table1")
        ->required()
        ->check(CLI::IsMember({"lower-bound", "homogeneous", "table1"}));
    int gen_n = 10;
    int gen_n_supply = 500, gen_n_demand = 500, gen_avg_degree = 10;
    long long gen_capacity = 5;
    double gen_kappa_floor = 0.6;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    generate->add_option("--n", gen_n, "dedicated-edge family size");
    generate->add_option("--n-supply", gen_n_supply, "supply agent count");
    generate->add_option("--n-demand", gen_n_demand, "demand type count");
    generate->add_option("--avg-degree", gen_avg_degree,
                         "neighbors per demand type");
    generate->add_option("--capacity", gen_capacity, "uniform capacity");
    generate->add_option("--kappa-floor", gen_kappa_floor,
                         "minimum disproportionality, in (0,1]");
    generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("-o,--output", gen_out, "output instance file")
        ->required();

    // lp
    auto* lp = app.add_subcommand(
        "lp", "Solve the benchmark LP for an instance file");
    std::string lp_file, lp_out;
    bool lp_homogeneous = false, lp_normalize = false;
    lp->add_option("file", lp_file, "instance JSON")->required();
    auto* homog_flag = lp->add_flag("--homogeneous", lp_homogeneous,
                                    "use the per-type variant");
    lp->add_flag("--normalize", lp_normalize,
                 "scale each type down to its service floor")
        ->needs(homog_flag);
    lp->add_option("-o,--output", lp_out, "output solution file")->required();

    // simulate
    auto* simulate = app.add_subcommand(
        "simulate", "Run one policy and print a metrics CSV row");
    std::string sim_instance, sim_policy;
    long long sim_reps = 0;
    std::uint64_t sim_seed = 0;
    double sim_rho = -1.0;
    long long sim_b_floor = 1;
    simulate->add_option("--instance", sim_instance, "instance JSON")
        ->required();
    simulate
        ->add_option("--policy", sim_policy,
                     "samp | samp-s | greedy | uniform | ranking | "
                     "alg-tau:<float>")
        ->required();
    simulate->add_option("--reps", sim_reps, "replication count")->required();
    simulate->add_option("--seed", sim_seed, "master seed")->required();
    simulate->add_option("--rho", sim_rho, "rescale demand to rho * capacity");
    simulate->add_option("--b-floor", sim_b_floor,
                         "drop supply agents below this capacity");

    // experiment
    auto* experiment = app.add_subcommand(
        "experiment", "Run a declarative sweep and write result tables");
    std::string exp_config, exp_out;
    experiment->add_option("--config", exp_config, "experiment JSON")
        ->required();
    experiment->add_option("-o,--output", exp_out, "output directory")
        ->required();

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "Compile supply/demand/adjacency CSVs into an instance");
    std::string in_supply, in_demand, in_adjacency, in_out;
    ingest->add_option("--supply", in_supply, "supply.csv")->required();
    ingest->add_option("--demand", in_demand, "demand.csv")->required();
    ingest->add_option("--adjacency", in_adjacency, "adjacency.csv")
        ->required();
    ingest->add_option("-o,--output", in_out, "output instance file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(generate)) {
        epora::Instance inst;
        if (gen_kind == "lower-bound") {
            inst = epora::generate_lower_bound_instance(gen_n);
        } else if (gen_kind == "homogeneous") {
            inst = epora::generate_homogeneous_synthetic(
                gen_n_supply, gen_n_demand, gen_avg_degree, gen_capacity,
                gen_kappa_floor, gen_seed);
        } else {
            inst = epora::generate_table1_shaped(gen_seed);
        }
        ensure_valid(inst, "generated instance failed validation");
        epora::save_instance(inst, gen_out);
        return 0;
    }

    if (app.got_subcommand(lp)) {
        epora::Instance inst = epora::load_instance(lp_file);
        ensure_valid(inst, lp_file);
        epora::InstanceIndex index = epora::build_index(inst);
        const epora::BenchmarkKind kind = lp_homogeneous
                                              ? epora::BenchmarkKind::Homogeneous
                                              : epora::BenchmarkKind::General;
        epora::LpSolution sol = epora::solve_instance_lp(
            inst, index, kind, lp_normalize, env_cache_dir());
        std::ofstream out(lp_out, std::ios::binary);
        if (!out)
            throw epora::EporaError("io_error", lp_out + ": cannot write");
        out << epora::lp_solution_to_json(sol,
                                          epora::lp_cache_key(inst, kind));
        return 0;
    }

    if (app.got_subcommand(simulate)) {
        epora::Instance inst = epora::load_instance(sim_instance);
        ensure_valid(inst, sim_instance);
        if (sim_b_floor > 1)
            inst = epora::filter_min_capacity(inst, sim_b_floor);
        if (sim_rho > 0.0) inst = epora::apply_scarcity(inst, sim_rho);
        epora::InstanceIndex index = epora::build_index(inst);
        const std::string cache = env_cache_dir();
        epora::LpSolution general = epora::solve_instance_lp(
            inst, index, epora::BenchmarkKind::General, false, cache);
        epora::PolicySpec spec = epora::parse_policy(sim_policy);
        epora::SamplingTable table;
        const epora::SamplingTable* table_ptr = nullptr;
        std::vector<int> tie_rank;
        if (spec.kind == epora::PolicyKind::Samp) {
            table = epora::build_samp_table(index, general);
            table_ptr = &table;
        } else if (spec.kind == epora::PolicyKind::SampS) {
            epora::LpSolution boosted = epora::solve_instance_lp(
                inst, index, epora::BenchmarkKind::Homogeneous, true, cache);
            table = epora::build_samp_s_table(index, boosted);
            table_ptr = &table;
        } else if (spec.kind == epora::PolicyKind::Greedy) {
            tie_rank = epora::greedy_tie_rank(inst);
        }
        epora::MetricsReport report =
            epora::run_many(index, spec, table_ptr, tie_rank, sim_reps,
                            sim_seed, general.s_star);
        std::vector<std::string> group_ids;
        for (const auto& g : inst.groups) group_ids.push_back(g.id);
        std::cout << epora::metrics_csv_header({"policy"}, group_ids)
                  << epora::metrics_csv_row({epora::policy_name(spec)}, report);
        return 0;
    }

    if (app.got_subcommand(experiment)) {
        epora::ExperimentConfig config =
            epora::load_experiment_config(exp_config);
        const std::string dir = epora::run_experiment(config, exp_out);
        std::cout << dir << "\n";
        return 0;
    }

    if (app.got_subcommand(ingest)) {
        epora::Instance inst =
            epora::ingest_csv(in_supply, in_demand, in_adjacency);
        ensure_valid(inst, "ingested instance failed validation");
        epora::save_instance(inst, in_out);
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const epora::EporaError& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
