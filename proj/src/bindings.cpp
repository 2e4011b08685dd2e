#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "epora/error.hpp"
#include "epora/experiment.hpp"
#include "epora/generators.hpp"
#include "epora/instance.hpp"
#include "epora/instance_io.hpp"
#include "epora/lp.hpp"
#include "epora/poisson.hpp"
#include "epora/policy.hpp"
#include "epora/simulator.hpp"

namespace py = pybind11;

namespace {

epora::Instance parse_and_check(const std::string& text) {
    epora::Instance inst = epora::parse_instance_json(text);
    epora::ValidationReport report = epora::validate(inst);
    if (!report.ok()) {
        std::string detail = "instance failed validation:";
        for (const auto& v : report.violations)
            detail += " " + v.code + ";";
        throw epora::EporaError("invalid_instance", detail);
    }
    return inst;
}

epora::BenchmarkKind parse_kind(const std::string& kind) {
    if (kind == "general") return epora::BenchmarkKind::General;
    if (kind == "homogeneous") return epora::BenchmarkKind::Homogeneous;
    throw epora::EporaError("invalid_config",
                            "unknown benchmark kind: " + kind);
}

py::dict solve_lp(const std::string& instance_json, const std::string& kind,
                  bool normalize, const std::string& cache_dir) {
    epora::Instance inst = parse_and_check(instance_json);
    epora::InstanceIndex index = epora::build_index(inst);
    epora::LpSolution sol = epora::solve_instance_lp(
        inst, index, parse_kind(kind), normalize, cache_dir);
    py::dict out;
    out["s_star"] = sol.s_star;
    out["status"] = sol.status;
    out["pivots"] = sol.pivots;
    out["feasibility_residual"] = sol.feasibility_residual;
    out["x_edge"] = sol.x_edge;
    out["x_type"] = sol.x_j;
    out["x_supply"] = sol.x_i;
    out["x_group"] = sol.x_g;
    out["kappa_min"] = index.kappa_min;
    return out;
}

std::string simulate(const std::string& instance_json,
                     const std::string& policy, long long replications,
                     std::uint64_t seed, double rho, long long b_floor,
                     const std::string& cache_dir) {
    epora::Instance inst = parse_and_check(instance_json);
    if (b_floor > 1) inst = epora::filter_min_capacity(inst, b_floor);
    if (rho > 0.0) inst = epora::apply_scarcity(inst, rho);
    epora::InstanceIndex index = epora::build_index(inst);
    epora::LpSolution general = epora::solve_instance_lp(
        inst, index, epora::BenchmarkKind::General, false, cache_dir);
    epora::PolicySpec spec = epora::parse_policy(policy);
    epora::SamplingTable table;
    const epora::SamplingTable* table_ptr = nullptr;
    std::vector<int> tie_rank;
    if (spec.kind == epora::PolicyKind::Samp) {
        table = epora::build_samp_table(index, general);
        table_ptr = &table;
    } else if (spec.kind == epora::PolicyKind::SampS) {
        epora::LpSolution boosted = epora::solve_instance_lp(
            inst, index, epora::BenchmarkKind::Homogeneous, true, cache_dir);
        table = epora::build_samp_s_table(index, boosted);
        table_ptr = &table;
    } else if (spec.kind == epora::PolicyKind::Greedy) {
        tie_rank = epora::greedy_tie_rank(inst);
    }
    epora::MetricsReport report =
        epora::run_many(index, spec, table_ptr, tie_rank, replications, seed,
                        general.s_star);
    std::vector<std::string> group_ids;
    for (const auto& g : inst.groups) group_ids.push_back(g.id);
    return epora::metrics_to_json(report, group_ids);
}

py::list validate_instance(const std::string& instance_json) {
    epora::Instance inst = epora::parse_instance_json(instance_json);
    py::list out;
    for (const auto& v : epora::validate(inst).violations) {
        py::dict d;
        d["code"] = v.code;
        d["subject"] = v.subject;
        d["message"] = v.message;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "equity-aware online resource allocation core";

    py::register_exception<epora::EporaError>(m, "EporaError");

    m.def("poisson_pmf", &epora::poisson_pmf, py::arg("mean"), py::arg("k"));
    m.def("truncated_poisson_mean", &epora::truncated_poisson_mean,
          py::arg("mean"), py::arg("cap"));
    m.def("capacity_utilization", &epora::capacity_utilization, py::arg("s"),
          py::arg("b"), "E[min(Pois(b/s), b)] / b");
    m.def("alg_tau_envelope", &epora::alg_tau_envelope, py::arg("tau"));

    m.def(
        "generate_lower_bound",
        [](int n) {
            return epora::instance_to_json(
                epora::generate_lower_bound_instance(n));
        },
        py::arg("n"));
    m.def(
        "generate_homogeneous",
        [](int n_supply, int n_demand, int avg_degree, long long capacity,
           double kappa_floor, std::uint64_t seed) {
            return epora::instance_to_json(epora::generate_homogeneous_synthetic(
                n_supply, n_demand, avg_degree, capacity, kappa_floor, seed));
        },
        py::arg("n_supply"), py::arg("n_demand"), py::arg("avg_degree"),
        py::arg("capacity"), py::arg("kappa_floor"), py::arg("seed") = 0);
    m.def(
        "generate_table1",
        [](std::uint64_t seed) {
            return epora::instance_to_json(epora::generate_table1_shaped(seed));
        },
        py::arg("seed") = 0);

    m.def("validate_instance", &validate_instance, py::arg("instance_json"));
    m.def(
        "apply_scarcity",
        [](const std::string& text, double rho) {
            return epora::instance_to_json(
                epora::apply_scarcity(epora::parse_instance_json(text), rho));
        },
        py::arg("instance_json"), py::arg("rho"));
    m.def(
        "filter_min_capacity",
        [](const std::string& text, long long floor) {
            return epora::instance_to_json(epora::filter_min_capacity(
                epora::parse_instance_json(text), floor));
        },
        py::arg("instance_json"), py::arg("floor"));

    m.def("solve_lp", &solve_lp, py::arg("instance_json"),
          py::arg("kind") = "general", py::arg("normalize") = false,
          py::arg("cache_dir") = "");
    m.def("simulate", &simulate, py::arg("instance_json"), py::arg("policy"),
          py::arg("replications"), py::arg("seed"), py::arg("rho") = -1.0,
          py::arg("b_floor") = 1, py::arg("cache_dir") = "",
          "returns the metrics report as a JSON string");
    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& outdir) {
            return epora::run_experiment(
                epora::parse_experiment_config(config_json), outdir);
        },
        py::arg("config_json"), py::arg("outdir"));
}
