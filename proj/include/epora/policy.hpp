#pragma once

#include <string>
#include <vector>

#include "epora/instance.hpp"
#include "epora/lp.hpp"
#include "epora/rng.hpp"

namespace epora {

enum class PolicyKind { Samp, SampS, Greedy, Uniform, Ranking, AlgTau };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Samp;
    double tau = 0.0;  // AlgTau only
};

// Accepts: samp | samp-s | greedy | uniform | ranking | alg-tau:<float>.
// Throws EporaError{"invalid_policy"} otherwise.
PolicySpec parse_policy(const std::string& name);
std::string policy_name(const PolicySpec& spec);

// Per-demand-type categorical distribution over neighbors, with the
// remaining mass meaning "reject".  cdf[j][k] is the cumulative probability
// of supply[j][0..k]; a uniform draw past cdf[j].back() rejects.
struct SamplingTable {
    std::vector<std::vector<int>> supply;
    std::vector<std::vector<double>> cdf;
    std::vector<double> row_sum;
};

// Row j assigns neighbor i probability x_ij/lambda_j.  Throws
// EporaError{"row_sum_exceeds_one"} when a row exceeds 1 beyond 1e-7;
// negative reject mass within 1e-9 is clamped to zero.
SamplingTable build_samp_table(const InstanceIndex& index,
                               const LpSolution& sol);

// Boosted rows from a normalized per-type solution: overrepresented types
// (kappa_j > 1) get x_ij/(lambda_j*s*), others x_ij/(lambda*mu_j*s*), which
// sums to exactly 1.  Throws EporaError{"degenerate_benchmark"} when
// s* <= 1e-12 and EporaError{"not_homogeneous"} on general solutions.
SamplingTable build_samp_s_table(const InstanceIndex& index,
                                 const LpSolution& sol);

enum class DecisionReason {
    Assigned,
    SampledReject,       // sampling landed on the reject mass
    SampledFull,         // sampled supply had no remaining capacity
    NoAvailableNeighbor,
    BelowThresholdTime,  // AlgTau common arrival before the threshold
};

struct Decision {
    int supply = -1;  // -1 on rejection
    DecisionReason reason = DecisionReason::NoAvailableNeighbor;
};

// One run's mutable state.  sigma/sigma_pos exist for Ranking/AlgTau,
// greedy_rank breaks capacity ties by smallest supply id.
struct PolicyState {
    std::vector<long long> remaining;
    std::vector<int> sigma;       // supply indices in permutation order
    std::vector<int> sigma_pos;   // inverse of sigma
    int sigma_cursor = 0;         // AlgTau: first position possibly free
};

// Capacity-tie order shared by all runs: rank by lexicographic supply id.
std::vector<int> greedy_tie_rank(const Instance& inst);

// Draws the per-run permutation when the policy needs one.  reset reuses the
// buffers of an existing state; init is reset applied to a blank one.
void reset_policy_state(const InstanceIndex& index, const PolicySpec& spec,
                        PolicyState& state, Rng& rng);
PolicyState init_policy_state(const InstanceIndex& index,
                              const PolicySpec& spec, Rng& rng);

// Feeds one arrival (type j at time t) through the policy.  SAMP variants
// consume exactly one uniform per arrival whether or not capacity remains,
// so the sampled sequence is independent of capacity state.
Decision decide(const PolicySpec& spec, const SamplingTable* table,
                const InstanceIndex& index, const std::vector<int>& tie_rank,
                PolicyState& state, int demand, double t, Rng& rng);

// True for instances shaped like generate_lower_bound_instance output: unit
// capacities, one type adjacent to everything, all other types on private
// dedicated supplies.  AlgTau and the clairvoyant below require this shape.
bool dedicated_edge_family(const InstanceIndex& index);

// Clairvoyant allocation for the dedicated-edge family produced by
// generate_lower_bound_instance: serve each degree-one type on its own
// supply first (at most one each), then pour the full-degree type into
// whatever supply is left.  Returns served counts per demand type.
// Throws EporaError{"wrong_instance_family"} on any other shape.
std::vector<long long> offline_rare_first(
    const InstanceIndex& index, const std::vector<long long>& arrivals);

}  // namespace epora
