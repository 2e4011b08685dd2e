#include "epora/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epora/error.hpp"
#include "epora/instance_io.hpp"
#include "json.hpp"

namespace epora {

namespace {

using nlohmann::json;

int edge_count(const InstanceIndex& index) {
    return static_cast<int>(index.edges.size());
}

std::vector<double> zero_row(int width) {
    return std::vector<double>(width, 0.0);
}

// Per-type totals etc. derived from the edge values.
void fill_totals(const InstanceIndex& index, LpSolution& sol) {
    sol.x_j.assign(index.rate.size(), 0.0);
    sol.x_i.assign(index.capacity.size(), 0.0);
    for (size_t e = 0; e < index.edges.size(); ++e) {
        sol.x_i[index.edges[e].first] += sol.x_edge[e];
        sol.x_j[index.edges[e].second] += sol.x_edge[e];
    }
    sol.x_g.assign(index.group_members.size(), 0.0);
    for (size_t g = 0; g < index.group_members.size(); ++g)
        for (int j : index.group_members[g]) sol.x_g[g] += sol.x_j[j];
}

double worst_violation(const InstanceIndex& index, const LpSolution& sol) {
    double worst = 0.0;
    for (double xe : sol.x_edge) worst = std::max(worst, -xe);
    for (size_t j = 0; j < index.rate.size(); ++j)
        worst = std::max(worst, sol.x_j[j] - index.rate[j]);
    for (size_t i = 0; i < index.capacity.size(); ++i)
        worst = std::max(worst,
                         sol.x_i[i] - static_cast<double>(index.capacity[i]));
    const double lam = index.lambda_total;
    if (sol.kind == BenchmarkKind::General) {
        for (size_t g = 0; g < index.group_target.size(); ++g)
            worst = std::max(
                worst, sol.s_star * lam * index.group_target[g] - sol.x_g[g]);
    } else {
        for (size_t j = 0; j < index.rate.size(); ++j)
            worst = std::max(worst,
                             sol.s_star * lam * index.mu_j[j] - sol.x_j[j]);
    }
    return std::max(worst, -sol.s_star);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

BenchmarkLp build_general_lp(const InstanceIndex& index) {
    if (index.group_target.empty())
        throw EporaError("invalid_instance",
                         "no groups: the benchmark objective is unbounded");
    BenchmarkLp model;
    model.kind = BenchmarkKind::General;
    const int ne = edge_count(index);
    const int nv = ne + 1;
    model.s_var = ne;
    model.lp.num_vars = nv;
    model.lp.objective.assign(nv, 0.0);
    model.lp.objective[model.s_var] = 1.0;

    for (size_t j = 0; j < index.rate.size(); ++j) {
        auto row = zero_row(nv);
        for (int e : index.demand_edge_ids[j]) row[e] = 1.0;
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::LessEq);
        model.lp.rhs.push_back(index.rate[j]);
    }
    for (size_t g = 0; g < index.group_members.size(); ++g) {
        auto row = zero_row(nv);
        for (int j : index.group_members[g])
            for (int e : index.demand_edge_ids[j]) row[e] += 1.0;
        row[model.s_var] = -index.lambda_total * index.group_target[g];
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::GreaterEq);
        model.lp.rhs.push_back(0.0);
    }
    for (size_t i = 0; i < index.capacity.size(); ++i) {
        auto row = zero_row(nv);
        for (size_t e = 0; e < index.edges.size(); ++e)
            if (index.edges[e].first == static_cast<int>(i)) row[e] = 1.0;
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::LessEq);
        model.lp.rhs.push_back(static_cast<double>(index.capacity[i]));
    }
    return model;
}

BenchmarkLp build_homogeneous_lp(const InstanceIndex& index) {
    if (!index.homogeneous)
        throw EporaError("not_homogeneous",
                         "per-type benchmark needs singleton groups covering "
                         "every demand type");
    BenchmarkLp model;
    model.kind = BenchmarkKind::Homogeneous;
    const int ne = edge_count(index);
    const int nv = ne + 1;
    model.s_var = ne;
    model.lp.num_vars = nv;
    model.lp.objective.assign(nv, 0.0);
    model.lp.objective[model.s_var] = 1.0;

    for (size_t j = 0; j < index.rate.size(); ++j) {
        auto row = zero_row(nv);
        for (int e : index.demand_edge_ids[j]) row[e] = 1.0;
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::LessEq);
        model.lp.rhs.push_back(index.rate[j]);
    }
    for (size_t j = 0; j < index.rate.size(); ++j) {
        auto row = zero_row(nv);
        for (int e : index.demand_edge_ids[j]) row[e] = 1.0;
        row[model.s_var] = -index.lambda_total * index.mu_j[j];
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::GreaterEq);
        model.lp.rhs.push_back(0.0);
    }
    for (size_t i = 0; i < index.capacity.size(); ++i) {
        auto row = zero_row(nv);
        for (size_t e = 0; e < index.edges.size(); ++e)
            if (index.edges[e].first == static_cast<int>(i)) row[e] = 1.0;
        model.lp.rows.push_back(std::move(row));
        model.lp.relations.push_back(Relation::LessEq);
        model.lp.rhs.push_back(static_cast<double>(index.capacity[i]));
    }
    return model;
}

LpSolution solve_benchmark(const InstanceIndex& index, const BenchmarkLp& model,
                           double tolerance, LpBackend* backend) {
    DenseSimplexBackend fallback(1e-9);
    LpBackend* engine = backend ? backend : &fallback;
    SimplexResult res = engine->solve(model.lp);
    if (res.status != SolveStatus::Optimal)
        throw EporaError("solver_bug",
                         res.status == SolveStatus::Infeasible
                             ? "benchmark reported infeasible (x=0,s=0 is "
                               "always feasible)"
                             : "benchmark reported unbounded");
    LpSolution sol;
    sol.kind = model.kind;
    sol.s_star = std::max(0.0, res.x[model.s_var]);
    sol.x_edge.assign(res.x.begin(), res.x.begin() + model.s_var);
    for (double& xe : sol.x_edge) xe = std::max(0.0, xe);
    sol.status = "optimal";
    sol.pivots = res.pivots;
    fill_totals(index, sol);
    sol.feasibility_residual = worst_violation(index, sol);
    if (sol.feasibility_residual > tolerance)
        throw EporaError("solver_bug",
                         "feasibility residual " +
                             std::to_string(sol.feasibility_residual) +
                             " exceeds tolerance");
    return sol;
}

LemmaMuReport check_lemma_mu(const LpSolution& sol,
                             const InstanceIndex& index) {
    if (!index.homogeneous)
        throw EporaError("not_homogeneous",
                         "disproportionality bounds are per-type statements");
    double kap = index.kappa_j.empty() ? 0.0 : index.kappa_j[0];
    for (double k : index.kappa_j) kap = std::min(kap, k);
    LemmaMuReport rep;
    rep.margin_kappa = kap - sol.s_star;
    rep.margin_one = 1.0 - kap;
    rep.margin_scarcity =
        static_cast<double>(index.capacity_total) / index.lambda_total -
        sol.s_star;
    rep.ok = rep.margin_kappa >= -1e-7 && rep.margin_one >= -1e-12 &&
             rep.margin_scarcity >= -1e-7;
    return rep;
}

LpSolution normalize_homogeneous(const LpSolution& sol,
                                 const InstanceIndex& index) {
    if (sol.kind != BenchmarkKind::Homogeneous)
        throw EporaError("not_homogeneous",
                         "normalization applies to per-type solutions");
    LpSolution out = sol;
    const double lam = index.lambda_total;
    for (size_t j = 0; j < index.rate.size(); ++j) {
        const double floor_j = sol.s_star * lam * index.mu_j[j];
        const double total = sol.x_j[j];
        if (total < floor_j - 1e-6)
            throw EporaError("normalization_infeasible",
                             "type " + std::to_string(j) +
                                 " sits below its service floor");
        if (total > floor_j && total > 0.0) {
            const double f = floor_j / total;
            for (int e : index.demand_edge_ids[j]) out.x_edge[e] *= f;
        }
    }
    fill_totals(index, out);
    out.feasibility_residual = worst_violation(index, out);
    return out;
}

std::string lp_solution_to_json(const LpSolution& sol,
                                const std::string& instance_hash) {
    json doc;
    doc["schema"] = "epora-lp-solution";
    doc["model"] =
        sol.kind == BenchmarkKind::General ? "general" : "homogeneous";
    doc["instance_hash"] = instance_hash;
    doc["s_star"] = sol.s_star;
    doc["status"] = sol.status;
    doc["pivots"] = sol.pivots;
    doc["feasibility_residual"] = sol.feasibility_residual;
    doc["x"] = sol.x_edge;
    return doc.dump(2) + "\n";
}

LpSolution lp_solution_from_json(const std::string& text,
                                 const InstanceIndex& index,
                                 std::string* instance_hash_out) {
    json doc = json::parse(text);
    LpSolution sol;
    const std::string model = doc.at("model").get<std::string>();
    sol.kind = model == "homogeneous" ? BenchmarkKind::Homogeneous
                                      : BenchmarkKind::General;
    sol.s_star = doc.at("s_star").get<double>();
    sol.status = doc.at("status").get<std::string>();
    sol.pivots = doc.value("pivots", 0LL);
    sol.x_edge = doc.at("x").get<std::vector<double>>();
    if (sol.x_edge.size() != index.edges.size())
        throw EporaError("cache_mismatch",
                         "cached solution has a different edge count");
    if (instance_hash_out)
        *instance_hash_out = doc.value("instance_hash", std::string());
    fill_totals(index, sol);
    sol.feasibility_residual = worst_violation(index, sol);
    return sol;
}

std::string lp_cache_key(const Instance& inst, BenchmarkKind kind) {
    const std::string payload =
        instance_to_json(inst) +
        (kind == BenchmarkKind::General ? "|general" : "|homogeneous");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(payload)));
    return buf;
}

std::optional<LpSolution> lp_cache_load(const std::string& dir,
                                        const std::string& key,
                                        const InstanceIndex& index) {
    if (dir.empty()) return std::nullopt;
    const std::filesystem::path path =
        std::filesystem::path(dir) / (key + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        std::string stored_hash;
        LpSolution sol = lp_solution_from_json(buf.str(), index, &stored_hash);
        if (stored_hash != key) return std::nullopt;
        if (sol.feasibility_residual > 1e-7) return std::nullopt;
        return sol;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void lp_cache_store(const std::string& dir, const std::string& key,
                    const LpSolution& sol) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const std::filesystem::path path =
        std::filesystem::path(dir) / (key + ".json");
    const std::filesystem::path tmp =
        std::filesystem::path(dir) / (key + ".json.tmp");
    {
        std::ofstream out(tmp);
        if (!out) return;  // cache is best-effort
        out << lp_solution_to_json(sol, key);
    }
    std::filesystem::rename(tmp, path, ec);
}

LpSolution solve_instance_lp(const Instance& inst, const InstanceIndex& index,
                             BenchmarkKind kind, bool normalize,
                             const std::string& cache_dir) {
    const std::string key = cache_dir.empty() ? "" : lp_cache_key(inst, kind);
    if (!cache_dir.empty()) {
        auto cached = lp_cache_load(cache_dir, key, index);
        if (cached && cached->kind == kind)
            return normalize ? normalize_homogeneous(*cached, index) : *cached;
    }
    BenchmarkLp model = kind == BenchmarkKind::General
                            ? build_general_lp(index)
                            : build_homogeneous_lp(index);
    LpSolution sol = solve_benchmark(index, model);
    lp_cache_store(cache_dir, key, sol);
    return normalize ? normalize_homogeneous(sol, index) : sol;
}

}  // namespace epora
