#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epora/instance.hpp"
#include "epora/policy.hpp"
#include "epora/rng.hpp"

namespace epora {

struct Arrival {
    int type = 0;
    double t = 0.0;
};

// Type mix for the merged process, built once per instance; cdf is pinned to
// end at exactly 1 so every uniform draw lands on a type.
struct ArrivalSampler {
    double lambda = 0.0;
    std::vector<double> cdf;
};
ArrivalSampler build_arrival_sampler(const InstanceIndex& index);

// Exponential(lambda) inter-arrival gaps with categorical type marks,
// truncated beyond t = 1.  This is the exact joint law of the independent
// per-type Poisson processes, and it preserves arrival order, which the
// capacity-stateful policies depend on.
void generate_arrivals(const ArrivalSampler& sampler, Rng& rng,
                       std::vector<Arrival>& out);

struct RunOutcome {
    std::vector<long long> arrived;  // per demand type
    std::vector<long long> served;   // per demand type
};

// One replication: fresh policy state, arrivals in time order, separate RNG
// streams for the arrival process and the policy's own coins.
RunOutcome run_once(const InstanceIndex& index, const PolicySpec& spec,
                    const SamplingTable* table,
                    const std::vector<int>& tie_rank, std::uint64_t master_seed,
                    long long replication);

struct MetricsReport {
    long long replications = 0;
    double lambda = 0.0;         // analytic E[A]; the ASR denominator
    double s_star = 0.0;         // NaN when no benchmark was attached
    double mean_arrivals = 0.0;
    double mean_served = 0.0;
    std::vector<double> type_mean, type_se;    // served per type
    std::vector<double> group_mean, group_se;  // served per group
    std::vector<double> group_asr;  // group_mean / (lambda * mu_g)
    std::vector<double> group_rsr;  // group_mean / (mean_served * mu_g)
    double asr = 0.0, asr_se = 0.0;
    double rsr = 0.0, rsr_se = 0.0;
    // asr / s_star; NaN unless s_star > 0.  SEs come from the sample
    // standard deviation of the per-replication min-ratio statistic.
    double competitive_ratio = 0.0, competitive_ratio_se = 0.0;
};

// Replication r draws its streams from (master_seed, r); aggregation order
// is fixed by the replication index, so reruns are bit-identical.  Passing a
// benchmark value s_star > 0 fills in the competitive ratio.
MetricsReport run_many(const InstanceIndex& index, const PolicySpec& spec,
                       const SamplingTable* table,
                       const std::vector<int>& tie_rank,
                       long long replications, std::uint64_t master_seed,
                       double s_star = -1.0);

// Clairvoyant counterpart on the dedicated-edge family (s* = 1 there).
MetricsReport run_offline_rare_first(const InstanceIndex& index,
                                     long long replications,
                                     std::uint64_t master_seed);

// min(tau + 1/2 - tau^2/2, 1 - tau): the threshold policy's limiting ASR
// ceiling on the dedicated-edge family.
double alg_tau_envelope(double tau);

struct TauCell {
    double tau = 0.0;
    double asr = 0.0;
    double asr_se = 0.0;
    double envelope = 0.0;
};

// Threshold sweep on generate_lower_bound_instance(n).
std::vector<TauCell> alg_tau_sweep(int n, const std::vector<double>& taus,
                                   long long replications,
                                   std::uint64_t master_seed);

// "" for NaN, %.12g otherwise; the single formatting used in all CSV output.
std::string format_metric(double v);

// Flat row per (instance, policy, setting) cell.  Callers prepend their own
// lead columns (sweep variable, policy name, ...); group columns are named
// asr_<group id>, rsr_<group id> in instance group order.
std::string metrics_csv_header(const std::vector<std::string>& lead_columns,
                               const std::vector<std::string>& group_ids);
std::string metrics_csv_row(const std::vector<std::string>& lead_values,
                            const MetricsReport& report);

// Self-describing JSON twin of the CSV row; records that the ASR denominator
// is the analytic lambda rather than the realized arrival average.
std::string metrics_to_json(const MetricsReport& report,
                            const std::vector<std::string>& group_ids);

}  // namespace epora
