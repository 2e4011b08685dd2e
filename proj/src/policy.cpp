#include "epora/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "epora/error.hpp"

namespace epora {

namespace {

// Dedicated-edge family check: unit capacities, one full-degree type, every
// other type with a single private supply, together covering all supplies.
bool is_dedicated_edge_family(const InstanceIndex& index, int* common_out) {
    const int n = static_cast<int>(index.capacity.size());
    if (n < 2) return false;
    for (long long b : index.capacity)
        if (b != 1) return false;
    int common = -1;
    std::vector<char> owned(n, 0);
    for (size_t j = 0; j < index.demand_neighbors.size(); ++j) {
        const auto& nbrs = index.demand_neighbors[j];
        if (static_cast<int>(nbrs.size()) == n) {
            if (common != -1) return false;
            common = static_cast<int>(j);
        } else if (nbrs.size() == 1) {
            if (owned[nbrs[0]]) return false;
            owned[nbrs[0]] = 1;
        } else {
            return false;
        }
    }
    if (common == -1) return false;
    for (char o : owned)
        if (!o) return false;
    if (common_out) *common_out = common;
    return true;
}

int sample_row(const SamplingTable& table, int demand, double u) {
    const auto& cdf = table.cdf[demand];
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return -1;
    return table.supply[demand][it - cdf.begin()];
}

}  // namespace

PolicySpec parse_policy(const std::string& name) {
    if (name == "samp") return {PolicyKind::Samp, 0.0};
    if (name == "samp-s") return {PolicyKind::SampS, 0.0};
    if (name == "greedy") return {PolicyKind::Greedy, 0.0};
    if (name == "uniform") return {PolicyKind::Uniform, 0.0};
    if (name == "ranking") return {PolicyKind::Ranking, 0.0};
    if (name.rfind("alg-tau:", 0) == 0) {
        const std::string arg = name.substr(8);
        try {
            size_t pos = 0;
            double tau = std::stod(arg, &pos);
            if (pos != arg.size() || !(tau >= 0.0 && tau <= 1.0))
                throw std::invalid_argument(arg);
            return {PolicyKind::AlgTau, tau};
        } catch (const std::exception&) {
            throw EporaError("invalid_policy",
                             "alg-tau threshold must be a real in [0,1], got '" +
                                 arg + "'");
        }
    }
    throw EporaError("invalid_policy", "unknown policy '" + name + "'");
}

std::string policy_name(const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicyKind::Samp: return "samp";
        case PolicyKind::SampS: return "samp-s";
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Uniform: return "uniform";
        case PolicyKind::Ranking: return "ranking";
        case PolicyKind::AlgTau: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "alg-tau:%g", spec.tau);
            return buf;
        }
    }
    return "?";
}

SamplingTable build_samp_table(const InstanceIndex& index,
                               const LpSolution& sol) {
    SamplingTable table;
    const size_t nj = index.rate.size();
    table.supply.resize(nj);
    table.cdf.resize(nj);
    table.row_sum.assign(nj, 0.0);
    for (size_t j = 0; j < nj; ++j) {
        double acc = 0.0;
        const auto& nbrs = index.demand_neighbors[j];
        const auto& eids = index.demand_edge_ids[j];
        table.supply[j] = nbrs;
        table.cdf[j].reserve(nbrs.size());
        for (size_t k = 0; k < nbrs.size(); ++k) {
            acc += sol.x_edge[eids[k]] / index.rate[j];
            table.cdf[j].push_back(acc);
        }
        table.row_sum[j] = acc;
        if (acc > 1.0 + 1e-7)
            throw EporaError("row_sum_exceeds_one",
                             "sampling row " + std::to_string(j) + " sums to " +
                                 std::to_string(acc));
        // Round-off can push the row a hair past 1; pin the tail back.
        if (acc > 1.0)
            for (double& c : table.cdf[j]) c = std::min(c, 1.0);
    }
    return table;
}

SamplingTable build_samp_s_table(const InstanceIndex& index,
                                 const LpSolution& sol) {
    if (sol.kind != BenchmarkKind::Homogeneous || !index.homogeneous)
        throw EporaError("not_homogeneous",
                         "boosted sampling needs the per-type benchmark");
    if (sol.s_star <= 1e-12)
        throw EporaError("degenerate_benchmark",
                         "boosted sampling undefined at s* = 0");
    SamplingTable table;
    const size_t nj = index.rate.size();
    const double lam = index.lambda_total;
    table.supply.resize(nj);
    table.cdf.resize(nj);
    table.row_sum.assign(nj, 0.0);
    for (size_t j = 0; j < nj; ++j) {
        const double denom = index.kappa_j[j] > 1.0
                                 ? index.rate[j] * sol.s_star
                                 : lam * index.mu_j[j] * sol.s_star;
        double acc = 0.0;
        const auto& nbrs = index.demand_neighbors[j];
        const auto& eids = index.demand_edge_ids[j];
        table.supply[j] = nbrs;
        table.cdf[j].reserve(nbrs.size());
        for (size_t k = 0; k < nbrs.size(); ++k) {
            acc += sol.x_edge[eids[k]] / denom;
            table.cdf[j].push_back(acc);
        }
        table.row_sum[j] = acc;
        if (acc > 1.0 + 1e-7)
            throw EporaError("row_sum_exceeds_one",
                             "boosted row " + std::to_string(j) + " sums to " +
                                 std::to_string(acc) +
                                 " (was the solution normalized?)");
        if (acc > 1.0)
            for (double& c : table.cdf[j]) c = std::min(c, 1.0);
    }
    return table;
}

std::vector<int> greedy_tie_rank(const Instance& inst) {
    std::vector<int> order(inst.supply.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return inst.supply[a].id < inst.supply[b].id;
    });
    std::vector<int> rank(inst.supply.size());
    for (size_t p = 0; p < order.size(); ++p)
        rank[order[p]] = static_cast<int>(p);
    return rank;
}

void reset_policy_state(const InstanceIndex& index, const PolicySpec& spec,
                        PolicyState& state, Rng& rng) {
    state.remaining = index.capacity;
    if (spec.kind == PolicyKind::Ranking || spec.kind == PolicyKind::AlgTau) {
        const int n = static_cast<int>(index.capacity.size());
        state.sigma.resize(n);
        state.sigma_pos.resize(n);
        std::iota(state.sigma.begin(), state.sigma.end(), 0);
        for (int k = n - 1; k > 0; --k)
            std::swap(state.sigma[k],
                      state.sigma[rng.below(static_cast<std::uint64_t>(k) + 1)]);
        for (int p = 0; p < n; ++p) state.sigma_pos[state.sigma[p]] = p;
    }
    state.sigma_cursor = 0;
}

PolicyState init_policy_state(const InstanceIndex& index,
                              const PolicySpec& spec, Rng& rng) {
    PolicyState state;
    reset_policy_state(index, spec, state, rng);
    return state;
}

Decision decide(const PolicySpec& spec, const SamplingTable* table,
                const InstanceIndex& index, const std::vector<int>& tie_rank,
                PolicyState& state, int demand, double t, Rng& rng) {
    switch (spec.kind) {
        case PolicyKind::Samp:
        case PolicyKind::SampS: {
            // One draw per arrival, capacity checked only afterwards.
            const double u = rng.u01();
            const int i = sample_row(*table, demand, u);
            if (i < 0) return {-1, DecisionReason::SampledReject};
            if (state.remaining[i] < 1)
                return {-1, DecisionReason::SampledFull};
            --state.remaining[i];
            return {i, DecisionReason::Assigned};
        }
        case PolicyKind::Greedy: {
            int best = -1;
            for (int i : index.demand_neighbors[demand]) {
                if (state.remaining[i] < 1) continue;
                if (best == -1 || state.remaining[i] > state.remaining[best] ||
                    (state.remaining[i] == state.remaining[best] &&
                     tie_rank[i] < tie_rank[best]))
                    best = i;
            }
            if (best == -1) return {-1, DecisionReason::NoAvailableNeighbor};
            --state.remaining[best];
            return {best, DecisionReason::Assigned};
        }
        case PolicyKind::Uniform: {
            int avail = 0;
            for (int i : index.demand_neighbors[demand])
                if (state.remaining[i] >= 1) ++avail;
            if (avail == 0) return {-1, DecisionReason::NoAvailableNeighbor};
            std::uint64_t pick = rng.below(static_cast<std::uint64_t>(avail));
            for (int i : index.demand_neighbors[demand]) {
                if (state.remaining[i] < 1) continue;
                if (pick == 0) {
                    --state.remaining[i];
                    return {i, DecisionReason::Assigned};
                }
                --pick;
            }
            return {-1, DecisionReason::NoAvailableNeighbor};  // unreachable
        }
        case PolicyKind::Ranking: {
            int best = -1;
            for (int i : index.demand_neighbors[demand]) {
                if (state.remaining[i] < 1) continue;
                if (best == -1 || state.sigma_pos[i] > state.sigma_pos[best])
                    best = i;
            }
            if (best == -1) return {-1, DecisionReason::NoAvailableNeighbor};
            --state.remaining[best];
            return {best, DecisionReason::Assigned};
        }
        case PolicyKind::AlgTau: {
            const auto& nbrs = index.demand_neighbors[demand];
            if (nbrs.size() == 1) {
                const int i = nbrs[0];
                if (state.remaining[i] < 1)
                    return {-1, DecisionReason::NoAvailableNeighbor};
                --state.remaining[i];
                return {i, DecisionReason::Assigned};
            }
            if (t < spec.tau)
                return {-1, DecisionReason::BelowThresholdTime};
            // First free supply in sigma order; everything before the cursor
            // is consumed for good, so the cursor only moves forward.
            const int n = static_cast<int>(state.sigma.size());
            while (state.sigma_cursor < n &&
                   state.remaining[state.sigma[state.sigma_cursor]] < 1)
                ++state.sigma_cursor;
            if (state.sigma_cursor >= n)
                return {-1, DecisionReason::NoAvailableNeighbor};
            const int i = state.sigma[state.sigma_cursor];
            --state.remaining[i];
            return {i, DecisionReason::Assigned};
        }
    }
    return {-1, DecisionReason::NoAvailableNeighbor};
}

bool dedicated_edge_family(const InstanceIndex& index) {
    return is_dedicated_edge_family(index, nullptr);
}

std::vector<long long> offline_rare_first(
    const InstanceIndex& index, const std::vector<long long>& arrivals) {
    int common = -1;
    if (!is_dedicated_edge_family(index, &common))
        throw EporaError("wrong_instance_family",
                         "clairvoyant allocation is defined for the "
                         "dedicated-edge lower-bound family only");
    std::vector<long long> served(index.rate.size(), 0);
    long long supplies_left = static_cast<long long>(index.capacity.size());
    for (size_t j = 0; j < index.rate.size(); ++j) {
        if (static_cast<int>(j) == common) continue;
        served[j] = std::min<long long>(arrivals[j], 1);
        supplies_left -= served[j];
    }
    served[common] = std::min(arrivals[common], supplies_left);
    return served;
}

}  // namespace epora
