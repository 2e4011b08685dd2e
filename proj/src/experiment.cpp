#include "epora/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "epora/error.hpp"
#include "epora/generators.hpp"
#include "epora/instance_io.hpp"
#include "epora/policy.hpp"
#include "epora/simulator.hpp"
#include "json.hpp"

namespace epora {

namespace {

using nlohmann::json;

const std::set<std::string> kSweepVariables = {"rho", "b_floor", "kappa_floor",
                                               "tau"};

[[noreturn]] void config_fail(const std::string& what) {
    throw EporaError("invalid_config", what);
}

GeneratorSpec parse_generator(const json& node) {
    GeneratorSpec gen;
    gen.name = node.at("generator").get<std::string>();
    if (gen.name != "lower-bound" && gen.name != "homogeneous" &&
        gen.name != "table1")
        config_fail("unknown generator '" + gen.name + "'");
    const json params = node.value("params", json::object());
    gen.n = params.value("n", gen.n);
    gen.n_supply = params.value("n_supply", gen.n_supply);
    gen.n_demand = params.value("n_demand", gen.n_demand);
    gen.avg_degree = params.value("avg_degree", gen.avg_degree);
    gen.capacity = params.value("capacity", gen.capacity);
    gen.kappa_floor = params.value("kappa_floor", gen.kappa_floor);
    gen.seed = params.value("seed", gen.seed);
    return gen;
}

Instance materialize_generator(const GeneratorSpec& gen) {
    if (gen.name == "lower-bound") return generate_lower_bound_instance(gen.n);
    if (gen.name == "homogeneous")
        return generate_homogeneous_synthetic(gen.n_supply, gen.n_demand,
                                              gen.avg_degree, gen.capacity,
                                              gen.kappa_floor, gen.seed);
    return generate_table1_shaped(gen.seed);
}

std::string resolve_cache_dir(const ExperimentConfig& config,
                              const std::filesystem::path& expdir) {
    const char* env = std::getenv("EPORA_LP_CACHE_DIR");
    if (env && *env) return env;
    if (config.lp_cache) return (expdir / "lp_cache").string();
    return "";
}

struct CellRuntime {
    Instance inst;
    InstanceIndex index;
    LpSolution general;
    bool has_boosted = false;
    LpSolution boosted;  // normalized homogeneous solution
    SamplingTable samp_table, samp_s_table;
    std::vector<int> tie_rank;
};

bool wants_policy(const std::vector<std::string>& policies,
                  const std::string& name) {
    return std::find(policies.begin(), policies.end(), name) != policies.end();
}

// Build everything a sweep cell needs: scarcity/floor transforms, benchmark
// solutions, sampling tables.
CellRuntime prepare_cell(const ExperimentConfig& config, const Instance& base,
                         const std::string& cache_dir, double value) {
    CellRuntime cell;
    const std::string& var = config.sweep.variable;
    Instance inst = base;
    if (var == "kappa_floor") {
        GeneratorSpec gen = config.generator;
        gen.kappa_floor = value;
        inst = materialize_generator(gen);
    }
    long long floor = config.b_floor;
    if (var == "b_floor") floor = static_cast<long long>(value);
    if (floor > 1) inst = filter_min_capacity(inst, floor);
    double rho = config.rho;
    if (var == "rho") rho = value;
    if (var != "tau" && rho > 0.0) inst = apply_scarcity(inst, rho);
    cell.index = build_index(inst);

    cell.general = solve_instance_lp(inst, cell.index, BenchmarkKind::General,
                                     false, cache_dir);
    if (wants_policy(config.policies, "samp"))
        cell.samp_table = build_samp_table(cell.index, cell.general);
    if (wants_policy(config.policies, "samp-s")) {
        cell.boosted = solve_instance_lp(
            inst, cell.index, BenchmarkKind::Homogeneous, true, cache_dir);
        cell.samp_s_table = build_samp_s_table(cell.index, cell.boosted);
        cell.has_boosted = true;
    }
    if (wants_policy(config.policies, "greedy"))
        cell.tie_rank = greedy_tie_rank(inst);
    cell.inst = std::move(inst);
    return cell;
}

MetricsReport run_cell_policy(const ExperimentConfig& config,
                              const CellRuntime& cell, const PolicySpec& spec) {
    const SamplingTable* table = nullptr;
    if (spec.kind == PolicyKind::Samp) table = &cell.samp_table;
    if (spec.kind == PolicyKind::SampS) table = &cell.samp_s_table;
    return run_many(cell.index, spec, table, cell.tie_rank,
                    config.replications, config.seed, cell.general.s_star);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EporaError("io_error", path.string() + ": cannot write");
    out << text;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_fail(e.what());
    }
    ExperimentConfig config;
    config.name = doc.at("name").get<std::string>();
    if (config.name.empty() ||
        config.name.find('/') != std::string::npos)
        config_fail("experiment name must be a nonempty path segment");

    const json& inst = doc.at("instance");
    if (inst.contains("path")) {
        config.from_file = true;
        config.instance_path = inst["path"].get<std::string>();
    } else {
        config.generator = parse_generator(inst);
    }

    config.policies = doc.at("policies").get<std::vector<std::string>>();
    if (config.policies.empty()) config_fail("policy list is empty");

    const json& sweep = doc.at("sweep");
    config.sweep.variable = sweep.at("variable").get<std::string>();
    if (!kSweepVariables.count(config.sweep.variable))
        config_fail("unknown sweep variable '" + config.sweep.variable + "'");
    config.sweep.values = sweep.at("values").get<std::vector<double>>();
    if (config.sweep.values.empty()) config_fail("sweep values are empty");

    config.replications = doc.value("replications", config.replications);
    if (config.replications < 1) config_fail("replications must be >= 1");
    config.seed = doc.value("seed", config.seed);
    config.lp_cache = doc.value("lp_cache", false);
    config.rho = doc.value("rho", config.rho);
    config.b_floor = doc.value("b_floor", config.b_floor);
    if (doc.contains("group_breakdown"))
        config.group_breakdown_rhos =
            doc["group_breakdown"].get<std::vector<double>>();

    const std::string& var = config.sweep.variable;
    for (double v : config.sweep.values) {
        if (var == "rho" && v < 1.0) config_fail("rho sweep values must be >= 1");
        if (var == "b_floor" && (v < 1.0 || v != std::floor(v)))
            config_fail("b_floor sweep values must be positive integers");
        if (var == "kappa_floor" && !(v > 0.0 && v <= 1.0))
            config_fail("kappa_floor sweep values must lie in (0, 1]");
        if (var == "tau" && !(v >= 0.0 && v <= 1.0))
            config_fail("tau sweep values must lie in [0, 1]");
    }
    if (var == "kappa_floor" &&
        (config.from_file || config.generator.name != "homogeneous"))
        config_fail("kappa_floor sweeps need the homogeneous generator");
    if (var == "tau") {
        if (config.from_file || config.generator.name != "lower-bound")
            config_fail("tau sweeps need the lower-bound generator");
        if (config.policies != std::vector<std::string>{"alg-tau"})
            config_fail("tau sweeps take exactly one policy entry: alg-tau");
    } else {
        for (const auto& p : config.policies) parse_policy(p);  // validate
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EporaError("io_error", path + ": cannot open");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_experiment_config(text);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["name"] = config.name;
    if (config.from_file) {
        doc["instance"] = {{"path", config.instance_path}};
    } else {
        json params;
        const GeneratorSpec& gen = config.generator;
        if (gen.name == "lower-bound") {
            params["n"] = gen.n;
        } else if (gen.name == "homogeneous") {
            params["n_supply"] = gen.n_supply;
            params["n_demand"] = gen.n_demand;
            params["avg_degree"] = gen.avg_degree;
            params["capacity"] = gen.capacity;
            params["kappa_floor"] = gen.kappa_floor;
            params["seed"] = gen.seed;
        } else {
            params["seed"] = gen.seed;
        }
        doc["instance"] = {{"generator", gen.name}, {"params", params}};
    }
    doc["policies"] = config.policies;
    doc["sweep"] = {{"variable", config.sweep.variable},
                    {"values", config.sweep.values}};
    doc["replications"] = config.replications;
    doc["seed"] = config.seed;
    doc["lp_cache"] = config.lp_cache;
    if (config.rho > 0.0) doc["rho"] = config.rho;
    if (config.b_floor > 1) doc["b_floor"] = config.b_floor;
    if (!config.group_breakdown_rhos.empty())
        doc["group_breakdown"] = config.group_breakdown_rhos;
    return doc.dump(2) + "\n";
}

LpDiagnostics make_lp_diagnostics(const InstanceIndex& index, double s_star) {
    LpDiagnostics diag;
    diag.s_star = s_star;
    diag.kappa_min = index.kappa_min;
    diag.scarcity_bound =
        static_cast<double>(index.capacity_total) / index.lambda_total;
    diag.b_min = static_cast<double>(index.capacity_min);
    diag.margin_kappa = std::abs(s_star - diag.kappa_min);
    diag.margin_scarcity = std::abs(s_star - diag.scarcity_bound);
    const double tol = 1e-4;
    if (diag.margin_kappa <= tol && diag.margin_kappa <= diag.margin_scarcity)
        diag.bottleneck = "disproportionality";
    else if (diag.margin_scarcity <= tol)
        diag.bottleneck = "scarcity";
    else if (diag.margin_kappa <= tol)
        diag.bottleneck = "disproportionality";
    else
        diag.bottleneck = "structural";
    return diag;
}

LpDiagnostics report_lp_diagnostics(const Instance& inst,
                                    const std::string& cache_dir) {
    InstanceIndex index = build_index(inst);
    LpSolution sol = solve_instance_lp(inst, index, BenchmarkKind::General,
                                       false, cache_dir);
    return make_lp_diagnostics(index, sol.s_star);
}

std::string run_experiment(const ExperimentConfig& config,
                           const std::string& outdir) {
    const std::filesystem::path expdir =
        std::filesystem::path(outdir) / config.name;
    std::filesystem::create_directories(expdir);
    const std::string cache_dir = resolve_cache_dir(config, expdir);

    Instance base = config.from_file ? load_instance(config.instance_path)
                                     : materialize_generator(config.generator);
    {
        ValidationReport report = validate(base);
        if (!report.ok())
            throw EporaError("invalid_instance",
                             "base instance failed validation: " +
                                 report.violations.front().code);
    }

    std::string results;
    json diagnostics = json::array();
    bool wrote_header = false;
    for (double value : config.sweep.values) {
        CellRuntime cell;
        try {
            cell = prepare_cell(config, base, cache_dir, value);
        } catch (const EporaError& e) {
            throw EporaError(e.code(), "cell " + config.sweep.variable + "=" +
                                           format_metric(value) + ": " +
                                           e.what());
        }
        LpDiagnostics diag = make_lp_diagnostics(cell.index,
                                                 cell.general.s_star);
        diag.sweep_value = value;
        diagnostics.push_back({{config.sweep.variable, value},
                               {"s_star", diag.s_star},
                               {"kappa_min", diag.kappa_min},
                               {"scarcity_bound", diag.scarcity_bound},
                               {"b_min", diag.b_min},
                               {"bottleneck", diag.bottleneck},
                               {"margin_kappa", diag.margin_kappa},
                               {"margin_scarcity", diag.margin_scarcity}});

        std::vector<std::string> group_ids;
        for (const auto& g : cell.inst.groups) group_ids.push_back(g.id);
        if (!wrote_header) {
            results += metrics_csv_header({config.sweep.variable, "policy"},
                                          group_ids);
            wrote_header = true;
        }
        for (const std::string& name : config.policies) {
            const std::string cell_label =
                config.sweep.variable + "=" + format_metric(value) +
                " policy=" + name;
            try {
                PolicySpec spec =
                    config.sweep.variable == "tau" && name == "alg-tau"
                        ? PolicySpec{PolicyKind::AlgTau, value}
                        : parse_policy(name);
                MetricsReport report = run_cell_policy(config, cell, spec);
                results += metrics_csv_row(
                    {format_metric(value), policy_name(spec)}, report);
            } catch (const EporaError& e) {
                throw EporaError(e.code(),
                                 "cell " + cell_label + ": " + e.what());
            }
        }
    }

    write_file(expdir / "results.csv", results);
    write_file(expdir / "config.json", experiment_config_to_json(config));
    write_file(expdir / "lp_diagnostics.json", diagnostics.dump(2) + "\n");

    // Per-group bar-chart data at the requested scarcity levels.
    for (double rho : config.group_breakdown_rhos) {
        ExperimentConfig one = config;
        one.sweep.variable = "rho";
        one.sweep.values = {rho};
        CellRuntime cell;
        try {
            cell = prepare_cell(one, base, cache_dir, rho);
        } catch (const EporaError& e) {
            throw EporaError(e.code(), "group breakdown rho=" +
                                           format_metric(rho) + ": " +
                                           e.what());
        }
        std::string asr_csv = "group";
        std::string rsr_csv = "group";
        for (const auto& p : config.policies) {
            asr_csv += "," + p;
            rsr_csv += "," + p;
        }
        asr_csv += '\n';
        rsr_csv += '\n';
        std::vector<MetricsReport> reports;
        for (const std::string& name : config.policies)
            reports.push_back(run_cell_policy(one, cell, parse_policy(name)));
        for (size_t g = 0; g < cell.inst.groups.size(); ++g) {
            asr_csv += cell.inst.groups[g].id;
            rsr_csv += cell.inst.groups[g].id;
            for (const MetricsReport& rep : reports) {
                asr_csv += "," + format_metric(rep.group_asr[g]);
                rsr_csv += "," + format_metric(rep.group_rsr[g]);
            }
            asr_csv += '\n';
            rsr_csv += '\n';
        }
        const std::string tag = format_metric(rho);
        write_file(expdir / ("groups_asr_rho" + tag + ".csv"), asr_csv);
        write_file(expdir / ("groups_rsr_rho" + tag + ".csv"), rsr_csv);
    }
    return expdir.string();
}

}  // namespace epora
