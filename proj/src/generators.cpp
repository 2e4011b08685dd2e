#include "epora/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "epora/error.hpp"
#include "epora/rng.hpp"

namespace epora {

namespace {
constexpr std::uint64_t kPurposeGenerate = 0x67656e;
}  // namespace

Instance generate_lower_bound_instance(int n) {
    if (n < 2) throw std::invalid_argument("lower-bound instance needs n >= 2");
    Instance inst;
    double lam = n;
    for (int i = 0; i < n; ++i)
        inst.supply.push_back({"s" + std::to_string(i), 1});
    for (int j = 0; j < n; ++j) {
        std::string id = "r" + std::to_string(j);
        inst.demand.push_back({id, 1.0 / n});
        inst.edges.emplace_back("s" + std::to_string(j), id);
        inst.groups.push_back({id, {id}, (1.0 / n) / lam});
    }
    inst.demand.push_back({"c", double(n - 1)});
    for (int i = 0; i < n; ++i)
        inst.edges.emplace_back("s" + std::to_string(i), "c");
    inst.groups.push_back({"c", {"c"}, double(n - 1) / lam});
    return inst;
}

Instance generate_homogeneous_synthetic(int n_supply, int n_demand,
                                        int avg_degree, long long capacity,
                                        double kappa_floor,
                                        std::uint64_t seed) {
    if (n_supply < 1 || n_demand < 1)
        throw std::invalid_argument("instance dimensions must be positive");
    if (avg_degree < 1 || avg_degree > n_supply)
        throw std::invalid_argument("avg_degree must lie in [1, n_supply]");
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    if (!(kappa_floor > 0.0) || kappa_floor > 1.0 + 1e-12)
        throw std::invalid_argument("kappa_floor must lie in (0, 1]");

    Rng rng = Rng::stream(seed, 0, kPurposeGenerate);

    // Graph first, rates second, disproportionalities last: a kappa_floor
    // sweep at fixed seed then reuses the identical graph and rates.
    std::vector<std::vector<int>> nbrs(n_demand);
    std::vector<int> pool(n_supply);
    for (int i = 0; i < n_supply; ++i) pool[i] = i;
    for (int j = 0; j < n_demand; ++j) {
        for (int k = 0; k < avg_degree; ++k) {
            int pick = k + int(rng.below(std::uint64_t(n_supply - k)));
            std::swap(pool[k], pool[pick]);
            nbrs[j].push_back(pool[k]);
        }
        std::sort(nbrs[j].begin(), nbrs[j].end());
    }

    std::vector<double> share(n_demand);
    double tot = 0.0;
    for (int j = 0; j < n_demand; ++j) {
        share[j] = 0.8 + 0.4 * rng.u01();
        tot += share[j];
    }
    for (double& s : share) s /= tot;

    std::vector<double> grid;
    for (double k = kappa_floor; k <= 2.0 - kappa_floor + 1e-9; k += 0.1)
        grid.push_back(k);

    std::vector<double> kappa(n_demand);
    double mu_sum = 0.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (int j = 0; j < n_demand; ++j)
            kappa[j] = grid[rng.below(grid.size())];
        kappa[rng.below(std::uint64_t(n_demand))] = kappa_floor;
        mu_sum = 0.0;
        for (int j = 0; j < n_demand; ++j) mu_sum += share[j] / kappa[j];
        // the slack absorbs rounding when every kappa is 1 and the targets
        // are exactly the (normalized) shares
        if (mu_sum >= 1.0 - 1e-12) break;
    }
    if (mu_sum < 1.0 - 1e-12)
        throw EporaError("generator_stalled",
                         "could not draw targets summing to at least one");

    Instance inst;
    long long cap_total = capacity * n_supply;
    for (int i = 0; i < n_supply; ++i)
        inst.supply.push_back({"s" + std::to_string(i), capacity});
    for (int j = 0; j < n_demand; ++j) {
        std::string id = "d" + std::to_string(j);
        inst.demand.push_back({id, share[j] * double(cap_total)});
        for (int i : nbrs[j])
            inst.edges.emplace_back("s" + std::to_string(i), id);
        inst.groups.push_back({id, {id}, share[j] / kappa[j]});
    }
    return inst;
}

namespace {

// 87 nodes kept from a 10-wide grid, rook adjacency plus the first
// diagonals in index order until the county graph has exactly 239 edges.
std::vector<std::pair<int, int>> county_adjacency() {
    const int W = 10, N = 87;
    auto inside = [&](int x, int y) {
        return x >= 0 && x < W && y >= 0 && y * W + x < N;
    };
    std::set<std::pair<int, int>> edges;
    std::vector<std::pair<int, int>> diag;
    for (int c = 0; c < N; ++c) {
        int x = c % W, y = c / W;
        if (inside(x + 1, y)) edges.insert({c, y * W + x + 1});
        if (inside(x, y + 1)) edges.insert({c, (y + 1) * W + x});
        for (int dy : {1, -1}) {
            if (inside(x + 1, y + dy)) {
                int d = (y + dy) * W + x + 1;
                diag.push_back({std::min(c, d), std::max(c, d)});
            }
        }
    }
    std::sort(diag.begin(), diag.end());
    for (const auto& e : diag) {
        if (int(edges.size()) >= 239) break;
        edges.insert(e);
    }
    return {edges.begin(), edges.end()};
}

}  // namespace

Instance generate_table1_shaped(std::uint64_t seed) {
    const int kCounties = 87, kProducts = 3, kGroups = 5;
    const double kProductShare[kProducts] = {0.55, 0.38, 0.07};
    const double kTarget[kGroups] = {0.0102, 0.0498, 0.06, 0.0478, 0.8321};
    // Arriving shares chosen so the group disproportionalities come out at
    // {0.85, 0.92, 0.78, 0.586} with the last group absorbing the rest.
    const double kDispro[kGroups - 1] = {0.85, 0.92, 0.78, 0.586};
    double arriving[kGroups];
    double rest = 1.0;
    for (int g = 0; g + 1 < kGroups; ++g) {
        arriving[g] = kDispro[g] * kTarget[g];
        rest -= arriving[g];
    }
    arriving[kGroups - 1] = rest;

    Rng rng = Rng::stream(seed, 0, kPurposeGenerate);

    // Heavy-tailed county weights: one dominant county, geometric tail with
    // lognormal noise spanning about three orders of magnitude.
    std::vector<double> w(kCounties);
    const double q = std::exp(-std::log(1000.0) / 85.0);
    double tail = 0.0;
    w[0] = 0.3313;
    for (int c = 1; c < kCounties; ++c) {
        w[c] = std::pow(q, c) * std::exp(0.25 * rng.normal());
        tail += w[c];
    }
    for (int c = 1; c < kCounties; ++c) w[c] *= (1.0 - w[0]) / tail;

    // Demand-side county weights share the tail but the dominant county is
    // slightly lighter, which puts the largest arrival rate near 2.58e3.
    std::vector<double> v(kCounties);
    v[0] = 0.2963;
    double vtail = 0.0;
    for (int c = 1; c < kCounties; ++c) vtail += w[c];
    for (int c = 1; c < kCounties; ++c) v[c] = w[c] / vtail * (1.0 - v[0]);

    const double kBudget = 1e4;
    std::vector<std::vector<long long>> cap(kCounties,
                                            std::vector<long long>(kProducts));
    long long cap_sum = 0;
    for (int c = 0; c < kCounties; ++c)
        for (int p = 0; p < kProducts; ++p) {
            cap[c][p] = std::max(1LL,
                                 llround(kBudget * w[c] * kProductShare[p]));
            cap_sum += cap[c][p];
        }
    cap[0][0] += llround(kBudget) - cap_sum;  // repair total via largest agent

    auto edges = county_adjacency();
    std::vector<std::vector<int>> adj(kCounties);
    for (const auto& e : edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }

    Instance inst;
    auto sid = [](int c, int p) {
        return "c" + std::to_string(c) + "-p" + std::to_string(p);
    };
    auto did = [](int c, int g) {
        return "c" + std::to_string(c) + "-g" + std::to_string(g);
    };
    for (int c = 0; c < kCounties; ++c)
        for (int p = 0; p < kProducts; ++p)
            inst.supply.push_back({sid(c, p), cap[c][p]});
    for (int c = 0; c < kCounties; ++c)
        for (int g = 0; g < kGroups; ++g)
            inst.demand.push_back(
                {did(c, g), std::max(0.01, kBudget * v[c] * arriving[g])});
    for (int c = 0; c < kCounties; ++c) {
        std::vector<int> reach = {c};
        reach.insert(reach.end(), adj[c].begin(), adj[c].end());
        std::sort(reach.begin() + 1, reach.end());
        for (int g = 0; g < kGroups; ++g)
            for (int c2 : reach)
                for (int p = 0; p < kProducts; ++p)
                    inst.edges.emplace_back(sid(c2, p), did(c, g));
    }
    for (int g = 0; g < kGroups; ++g) {
        Group grp;
        grp.id = "g" + std::to_string(g);
        grp.target = kTarget[g];
        for (int c = 0; c < kCounties; ++c) grp.members.push_back(did(c, g));
        inst.groups.push_back(std::move(grp));
    }
    return inst;
}

}  // namespace epora
