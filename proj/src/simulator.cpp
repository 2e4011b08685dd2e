#include "epora/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "epora/error.hpp"
#include "epora/generators.hpp"
#include "json.hpp"

namespace epora {

namespace {

constexpr std::uint64_t kPurposeArrival = 0x617272;  // "arr"
constexpr std::uint64_t kPurposePolicy = 0x706f6c;   // "pol"

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

int pick_type(const ArrivalSampler& sampler, double u) {
    auto it =
        std::upper_bound(sampler.cdf.begin(), sampler.cdf.end(), u);
    if (it == sampler.cdf.end()) --it;  // u == 1 cannot happen; belt and braces
    return static_cast<int>(it - sampler.cdf.begin());
}

void check_policy_inputs(const InstanceIndex& index, const PolicySpec& spec,
                         const SamplingTable* table,
                         const std::vector<int>& tie_rank) {
    switch (spec.kind) {
        case PolicyKind::Samp:
        case PolicyKind::SampS:
            if (!table || table->cdf.size() != index.rate.size())
                throw EporaError("missing_sampling_table",
                                 "sampling policies need a table built from "
                                 "the benchmark solution");
            break;
        case PolicyKind::Greedy:
            if (tie_rank.size() != index.capacity.size())
                throw EporaError("missing_tie_rank",
                                 "greedy needs the supply-id tie order");
            break;
        case PolicyKind::AlgTau:
            if (!dedicated_edge_family(index))
                throw EporaError("wrong_instance_family",
                                 "the threshold policy is defined on the "
                                 "dedicated-edge lower-bound family only");
            break;
        default:
            break;
    }
}

struct Accumulator {
    long long reps = 0;
    std::vector<long long> sum_x, sum_x_sq;    // per type
    std::vector<long long> sum_xg, sum_xg_sq;  // per group
    long long sum_arrivals = 0;
    long long sum_served = 0;
    double sum_minr = 0.0, sum_minr_sq = 0.0;
    double sum_rsr = 0.0, sum_rsr_sq = 0.0;

    explicit Accumulator(const InstanceIndex& index)
        : sum_x(index.rate.size(), 0),
          sum_x_sq(index.rate.size(), 0),
          sum_xg(index.group_members.size(), 0),
          sum_xg_sq(index.group_members.size(), 0) {}

    void add(const InstanceIndex& index, const std::vector<long long>& arrived,
             const std::vector<long long>& served) {
        ++reps;
        long long total_served = 0;
        for (size_t j = 0; j < served.size(); ++j) {
            sum_x[j] += served[j];
            sum_x_sq[j] += served[j] * served[j];
            total_served += served[j];
        }
        for (long long a : arrived) sum_arrivals += a;
        sum_served += total_served;
        double minr = std::numeric_limits<double>::infinity();
        double min_rel = std::numeric_limits<double>::infinity();
        for (size_t g = 0; g < index.group_members.size(); ++g) {
            long long xg = 0;
            for (int j : index.group_members[g]) xg += served[j];
            sum_xg[g] += xg;
            sum_xg_sq[g] += xg * xg;
            const double denom =
                index.lambda_total * index.group_target[g];
            minr = std::min(minr, static_cast<double>(xg) / denom);
            if (total_served > 0)
                min_rel = std::min(
                    min_rel, static_cast<double>(xg) /
                                 (static_cast<double>(total_served) *
                                  index.group_target[g]));
        }
        if (index.group_members.empty()) minr = 0.0;
        if (total_served == 0 || index.group_members.empty()) min_rel = 0.0;
        sum_minr += minr;
        sum_minr_sq += minr * minr;
        sum_rsr += min_rel;
        sum_rsr_sq += min_rel * min_rel;
    }

    MetricsReport finish(const InstanceIndex& index, double s_star) const {
        MetricsReport rep;
        rep.replications = reps;
        rep.lambda = index.lambda_total;
        rep.s_star = s_star > 0.0 ? s_star : nan_value();
        const double r = static_cast<double>(reps);
        auto mean_se = [&](long long sum, long long sum_sq, double* se) {
            const double mean = static_cast<double>(sum) / r;
            double var = 0.0;
            if (reps > 1)
                var = (static_cast<double>(sum_sq) -
                       static_cast<double>(sum) * mean) /
                      (r - 1.0);
            *se = var > 0.0 ? std::sqrt(var / r) : 0.0;
            return mean;
        };
        rep.mean_arrivals = static_cast<double>(sum_arrivals) / r;
        rep.mean_served = static_cast<double>(sum_served) / r;
        rep.type_mean.resize(sum_x.size());
        rep.type_se.resize(sum_x.size());
        for (size_t j = 0; j < sum_x.size(); ++j)
            rep.type_mean[j] = mean_se(sum_x[j], sum_x_sq[j], &rep.type_se[j]);
        rep.group_mean.resize(sum_xg.size());
        rep.group_se.resize(sum_xg.size());
        rep.group_asr.resize(sum_xg.size());
        rep.group_rsr.resize(sum_xg.size());
        double asr = std::numeric_limits<double>::infinity();
        double rsr = std::numeric_limits<double>::infinity();
        for (size_t g = 0; g < sum_xg.size(); ++g) {
            rep.group_mean[g] =
                mean_se(sum_xg[g], sum_xg_sq[g], &rep.group_se[g]);
            rep.group_asr[g] = rep.group_mean[g] /
                               (index.lambda_total * index.group_target[g]);
            rep.group_rsr[g] =
                rep.mean_served > 0.0
                    ? rep.group_mean[g] /
                          (rep.mean_served * index.group_target[g])
                    : 0.0;
            asr = std::min(asr, rep.group_asr[g]);
            rsr = std::min(rsr, rep.group_rsr[g]);
        }
        rep.asr = sum_xg.empty() ? 0.0 : asr;
        rep.rsr = sum_xg.empty() ? 0.0 : rsr;
        auto spread_se = [&](double sum, double sum_sq) {
            if (reps < 2) return 0.0;
            const double mean = sum / r;
            const double var = (sum_sq - sum * mean) / (r - 1.0);
            return var > 0.0 ? std::sqrt(var / r) : 0.0;
        };
        rep.asr_se = spread_se(sum_minr, sum_minr_sq);
        rep.rsr_se = spread_se(sum_rsr, sum_rsr_sq);
        if (s_star > 0.0) {
            rep.competitive_ratio = rep.asr / s_star;
            rep.competitive_ratio_se = rep.asr_se / s_star;
        } else {
            rep.competitive_ratio = nan_value();
            rep.competitive_ratio_se = nan_value();
        }
        return rep;
    }
};

// Shared replication loop; Serve fills `served` from the realized arrivals.
template <typename Serve>
MetricsReport replicate(const InstanceIndex& index, long long replications,
                        std::uint64_t master_seed, double s_star,
                        Serve&& serve) {
    if (replications < 1)
        throw EporaError("invalid_replications", "need at least 1 replication");
    Accumulator acc(index);
    ArrivalSampler sampler = build_arrival_sampler(index);
    std::vector<Arrival> arrivals;
    arrivals.reserve(static_cast<size_t>(
        sampler.lambda + 6.0 * std::sqrt(sampler.lambda) + 16.0));
    std::vector<long long> arrived(index.rate.size(), 0);
    std::vector<long long> served(index.rate.size(), 0);
    for (long long rep = 0; rep < replications; ++rep) {
        Rng arrival_rng = Rng::stream(master_seed, static_cast<std::uint64_t>(rep),
                                      kPurposeArrival);
        generate_arrivals(sampler, arrival_rng, arrivals);
        std::fill(arrived.begin(), arrived.end(), 0);
        std::fill(served.begin(), served.end(), 0);
        for (const Arrival& a : arrivals) ++arrived[a.type];
        serve(rep, arrivals, arrived, served);
        acc.add(index, arrived, served);
    }
    return acc.finish(index, s_star);
}

}  // namespace

ArrivalSampler build_arrival_sampler(const InstanceIndex& index) {
    ArrivalSampler sampler;
    sampler.lambda = index.lambda_total;
    if (sampler.lambda <= 0.0)
        throw EporaError("invalid_instance", "total arrival rate must be > 0");
    sampler.cdf.reserve(index.rate.size());
    double acc = 0.0;
    for (double r : index.rate) {
        acc += r / sampler.lambda;
        sampler.cdf.push_back(acc);
    }
    sampler.cdf.back() = 1.0;
    return sampler;
}

void generate_arrivals(const ArrivalSampler& sampler, Rng& rng,
                       std::vector<Arrival>& out) {
    out.clear();
    double t = rng.exponential(sampler.lambda);
    while (t <= 1.0) {
        out.push_back({pick_type(sampler, rng.u01()), t});
        t += rng.exponential(sampler.lambda);
    }
}

RunOutcome run_once(const InstanceIndex& index, const PolicySpec& spec,
                    const SamplingTable* table,
                    const std::vector<int>& tie_rank, std::uint64_t master_seed,
                    long long replication) {
    check_policy_inputs(index, spec, table, tie_rank);
    ArrivalSampler sampler = build_arrival_sampler(index);
    Rng arrival_rng = Rng::stream(
        master_seed, static_cast<std::uint64_t>(replication), kPurposeArrival);
    Rng policy_rng = Rng::stream(
        master_seed, static_cast<std::uint64_t>(replication), kPurposePolicy);
    std::vector<Arrival> arrivals;
    generate_arrivals(sampler, arrival_rng, arrivals);
    RunOutcome out;
    out.arrived.assign(index.rate.size(), 0);
    out.served.assign(index.rate.size(), 0);
    PolicyState state = init_policy_state(index, spec, policy_rng);
    for (const Arrival& a : arrivals) {
        ++out.arrived[a.type];
        Decision d =
            decide(spec, table, index, tie_rank, state, a.type, a.t, policy_rng);
        if (d.reason == DecisionReason::Assigned) ++out.served[a.type];
    }
    return out;
}

MetricsReport run_many(const InstanceIndex& index, const PolicySpec& spec,
                       const SamplingTable* table,
                       const std::vector<int>& tie_rank,
                       long long replications, std::uint64_t master_seed,
                       double s_star) {
    check_policy_inputs(index, spec, table, tie_rank);
    PolicyState state;
    return replicate(
        index, replications, master_seed, s_star,
        [&](long long rep, const std::vector<Arrival>& arrivals,
            const std::vector<long long>&, std::vector<long long>& served) {
            Rng policy_rng = Rng::stream(
                master_seed, static_cast<std::uint64_t>(rep), kPurposePolicy);
            reset_policy_state(index, spec, state, policy_rng);
            for (const Arrival& a : arrivals) {
                Decision d = decide(spec, table, index, tie_rank, state, a.type,
                                    a.t, policy_rng);
                if (d.reason == DecisionReason::Assigned) ++served[a.type];
            }
        });
}

MetricsReport run_offline_rare_first(const InstanceIndex& index,
                                     long long replications,
                                     std::uint64_t master_seed) {
    if (!dedicated_edge_family(index))
        throw EporaError("wrong_instance_family",
                         "clairvoyant allocation is defined for the "
                         "dedicated-edge lower-bound family only");
    // s* = 1 on this family: the per-type benchmark admits x_jj = lambda_j
    // for the dedicated types and fills capacity for the common one.
    return replicate(
        index, replications, master_seed, 1.0,
        [&](long long, const std::vector<Arrival>&,
            const std::vector<long long>& arrived,
            std::vector<long long>& served) {
            served = offline_rare_first(index, arrived);
        });
}

double alg_tau_envelope(double tau) {
    return std::min(tau + 0.5 - 0.5 * tau * tau, 1.0 - tau);
}

std::vector<TauCell> alg_tau_sweep(int n, const std::vector<double>& taus,
                                   long long replications,
                                   std::uint64_t master_seed) {
    Instance inst = generate_lower_bound_instance(n);
    InstanceIndex index = build_index(inst);
    std::vector<TauCell> cells;
    cells.reserve(taus.size());
    for (double tau : taus) {
        PolicySpec spec{PolicyKind::AlgTau, tau};
        MetricsReport rep = run_many(index, spec, nullptr, {}, replications,
                                     master_seed, 1.0);
        cells.push_back({tau, rep.asr, rep.asr_se, alg_tau_envelope(tau)});
    }
    return cells;
}

std::string format_metric(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string metrics_csv_header(const std::vector<std::string>& lead_columns,
                               const std::vector<std::string>& group_ids) {
    std::string line;
    for (const auto& c : lead_columns) {
        line += c;
        line += ',';
    }
    line +=
        "replications,s_star,asr,asr_se,rsr,rsr_se,competitive_ratio,"
        "competitive_ratio_se,mean_arrivals,mean_served";
    for (const auto& g : group_ids) line += ",asr_" + g;
    for (const auto& g : group_ids) line += ",rsr_" + g;
    line += '\n';
    return line;
}

std::string metrics_csv_row(const std::vector<std::string>& lead_values,
                            const MetricsReport& report) {
    std::string line;
    for (const auto& v : lead_values) {
        line += v;
        line += ',';
    }
    line += std::to_string(report.replications);
    line += ',' + format_metric(report.s_star);
    line += ',' + format_metric(report.asr);
    line += ',' + format_metric(report.asr_se);
    line += ',' + format_metric(report.rsr);
    line += ',' + format_metric(report.rsr_se);
    line += ',' + format_metric(report.competitive_ratio);
    line += ',' + format_metric(report.competitive_ratio_se);
    line += ',' + format_metric(report.mean_arrivals);
    line += ',' + format_metric(report.mean_served);
    for (double v : report.group_asr) line += ',' + format_metric(v);
    for (double v : report.group_rsr) line += ',' + format_metric(v);
    line += '\n';
    return line;
}

std::string metrics_to_json(const MetricsReport& report,
                            const std::vector<std::string>& group_ids) {
    nlohmann::json doc;
    doc["replications"] = report.replications;
    doc["asr_denominator"] = "analytic_lambda";
    doc["lambda"] = report.lambda;
    if (!std::isnan(report.s_star)) doc["s_star"] = report.s_star;
    doc["asr"] = report.asr;
    doc["asr_se"] = report.asr_se;
    doc["rsr"] = report.rsr;
    doc["rsr_se"] = report.rsr_se;
    if (!std::isnan(report.competitive_ratio)) {
        doc["competitive_ratio"] = report.competitive_ratio;
        doc["competitive_ratio_se"] = report.competitive_ratio_se;
    }
    doc["mean_arrivals"] = report.mean_arrivals;
    doc["mean_served"] = report.mean_served;
    doc["groups"] = nlohmann::json::array();
    for (size_t g = 0; g < group_ids.size() && g < report.group_mean.size();
         ++g) {
        doc["groups"].push_back({{"id", group_ids[g]},
                                 {"mean_served", report.group_mean[g]},
                                 {"se", report.group_se[g]},
                                 {"asr", report.group_asr[g]},
                                 {"rsr", report.group_rsr[g]}});
    }
    doc["type_mean_served"] = report.type_mean;
    doc["type_se"] = report.type_se;
    return doc.dump(2) + "\n";
}

}  // namespace epora
