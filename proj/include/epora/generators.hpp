#pragma once

#include <cstdint>

#include "epora/instance.hpp"

namespace epora {

// Hard instance family: n unit-capacity supplies, n rare types of rate 1/n
// adjacent only to their own supply, one common type of rate n-1 adjacent
// to everything, singleton groups with target rate_j / n.  The benchmark
// optimum serves everyone (s* = 1) while no online policy can beat
// 1 - 1/e + o(1) on it.
Instance generate_lower_bound_instance(int n);

// Random bipartite instance with singleton groups.  Every demand type gets
// avg_degree distinct uniform supply neighbors and a one-decimal
// disproportionality drawn from the grid {kappa_floor, kappa_floor + 0.1,
// ..., 2 - kappa_floor}; one type is pinned to kappa_floor so the minimum
// is exact.  Targets are redrawn until they sum to at least one (they do in
// a handful of tries since the grid is centered at one).  Graph and rates
// are drawn before the disproportionalities, so sweeping kappa_floor at a
// fixed seed keeps the same graph and rates.  Baseline rates sum to the
// total capacity (scarcity one).
Instance generate_homogeneous_synthetic(int n_supply, int n_demand,
                                        int avg_degree, long long capacity,
                                        double kappa_floor,
                                        std::uint64_t seed);

// Census-shaped instance: 87 counties on a trimmed grid adjacency (239
// county edges), 3 products per county (261 supplies), 5 demographic groups
// per county (435 demand types, ~8.5k edges via same-or-adjacent-county
// eligibility).  Capacities sum to exactly 10^4 with a heavy-tailed county
// profile (max ~1.8k, min 1); baseline arrival rates also sum to 10^4 with
// group arrival shares set so the five group disproportionalities are
// {0.85, 0.92, 0.78, 0.586, ~1.046}, i.e. the bottleneck group sits at
// kappa 0.586.  Group targets: {1.02, 4.98, 6, 4.78, 83.21}%.
Instance generate_table1_shaped(std::uint64_t seed);

}  // namespace epora
