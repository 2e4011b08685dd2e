#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epora/instance.hpp"
#include "epora/simplex.hpp"

namespace epora {

enum class BenchmarkKind { General, Homogeneous };

// Benchmark model: one variable per edge (ordered as InstanceIndex::edges)
// plus the objective variable s in the last slot.  Constraint order: demand
// caps, service floors (per group, or per type in the homogeneous variant),
// supply caps.
struct BenchmarkLp {
    BenchmarkKind kind = BenchmarkKind::General;
    DenseLp lp;
    int s_var = 0;  // index of s; edge k is variable k
};

struct LpSolution {
    BenchmarkKind kind = BenchmarkKind::General;
    double s_star = 0.0;
    std::vector<double> x_edge;  // by edge index
    std::vector<double> x_j;     // per demand type
    std::vector<double> x_i;     // per supply agent
    std::vector<double> x_g;     // per group
    std::string status;          // "optimal"
    double feasibility_residual = 0.0;
    long long pivots = 0;
};

// max s  s.t.  x_j <= lambda_j,  x_g >= s*lambda*mu_g,  x_i <= b_i,  x >= 0.
// Throws EporaError{"invalid_instance"} when the instance has no groups
// (s would be unbounded).
BenchmarkLp build_general_lp(const InstanceIndex& index);

// Same but with per-type floors x_j >= s*lambda*mu_j.  Requires singleton
// groups covering every type; throws EporaError{"not_homogeneous"} otherwise.
BenchmarkLp build_homogeneous_lp(const InstanceIndex& index);

// Solves via the dense simplex (or a caller-provided backend) and fills in
// the per-type / per-supply / per-group totals plus the worst constraint
// violation.  Throws EporaError{"solver_bug"} on infeasible/unbounded, both
// impossible by construction.
LpSolution solve_benchmark(const InstanceIndex& index, const BenchmarkLp& model,
                           double tolerance = 1e-7,
                           LpBackend* backend = nullptr);

// s* <= kappa_min <= 1 and s* <= B/lambda, with margins (how much slack each
// inequality has; negative margin = violation beyond tolerance).
struct LemmaMuReport {
    bool ok = false;
    double margin_kappa = 0.0;     // kappa_min - s*
    double margin_one = 0.0;       // 1 - kappa_min
    double margin_scarcity = 0.0;  // B/lambda - s*
};
LemmaMuReport check_lemma_mu(const LpSolution& sol, const InstanceIndex& index);

// Scales each type's edge values down so x_j equals s*lambda*mu_j exactly.
// Requires a homogeneous solution with every floor met; throws
// EporaError{"normalization_infeasible"} when some x_j sits more than 1e-6
// below its floor.
LpSolution normalize_homogeneous(const LpSolution& sol,
                                 const InstanceIndex& index);

// JSON round-trip for caching; x_j/x_i/x_g are recomputed from the instance
// on load, so only s*, the edge values and provenance are stored.
std::string lp_solution_to_json(const LpSolution& sol,
                                const std::string& instance_hash);
LpSolution lp_solution_from_json(const std::string& text,
                                 const InstanceIndex& index,
                                 std::string* instance_hash_out = nullptr);

// Content-addressed cache.  Key = FNV-1a over the canonical instance JSON
// plus the model kind.  Returns nothing on any miss/mismatch/parse problem.
std::string lp_cache_key(const Instance& inst, BenchmarkKind kind);
std::optional<LpSolution> lp_cache_load(const std::string& dir,
                                        const std::string& key,
                                        const InstanceIndex& index);
void lp_cache_store(const std::string& dir, const std::string& key,
                    const LpSolution& sol);

// Build + solve with optional caching (dir empty = no cache), the usual
// entry point for callers that just want the benchmark value.
LpSolution solve_instance_lp(const Instance& inst, const InstanceIndex& index,
                             BenchmarkKind kind, bool normalize,
                             const std::string& cache_dir = "");

}  // namespace epora
