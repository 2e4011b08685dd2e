#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "epora/error.hpp"
#include "epora/generators.hpp"
#include "epora/instance.hpp"
#include "epora/lp.hpp"
#include "epora/policy.hpp"
#include "epora/rng.hpp"

using namespace epora;

namespace {

const std::vector<int> kNoRank;

std::string thrown_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const EporaError& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("policy names parse and print") {
    for (const char* name :
         {"samp", "samp-s", "greedy", "uniform", "ranking"}) {
        PolicySpec spec = parse_policy(name);
        CHECK(policy_name(spec) == name);
    }
    PolicySpec spec = parse_policy("alg-tau:0.25");
    CHECK(spec.kind == PolicyKind::AlgTau);
    CHECK(spec.tau == 0.25);
    CHECK(policy_name(spec) == "alg-tau:0.25");
    CHECK(parse_policy("alg-tau:0").tau == 0.0);
    CHECK(parse_policy("alg-tau:1").tau == 1.0);

    for (const char* bad : {"", "SAMP", "samp ", "alg-tau:", "alg-tau:1.5",
                            "alg-tau:-0.1", "alg-tau:x", "rank"}) {
        CHECK(thrown_code([&] { parse_policy(bad); }) == "invalid_policy");
    }
}

TEST_CASE("sampling table mirrors the benchmark split") {
    // two units for a rate-4 type: x = 2, so the row keeps half its mass
    Instance inst;
    inst.supply = {{"i", 2}};
    inst.demand = {{"j", 4.0}};
    inst.edges = {{"i", "j"}};
    inst.groups = {{"j", {"j"}, 0.999}};
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_general_lp(ix));
    auto table = build_samp_table(ix, sol);
    REQUIRE(table.cdf.size() == 1);
    REQUIRE(table.cdf[0].size() == 1);
    CHECK(table.cdf[0][0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(table.row_sum[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(table.supply[0] == std::vector<int>{0});

    // inflated edge values are rejected
    auto bogus = sol;
    for (double& v : bogus.x_edge) v = 8.0;
    CHECK(thrown_code([&] { build_samp_table(ix, bogus); }) ==
          "row_sum_exceeds_one");
}

TEST_CASE("hard-family tables are the known closed forms") {
    const int n = 3;
    Instance inst = generate_lower_bound_instance(n);
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_general_lp(ix));
    REQUIRE(sol.s_star == doctest::Approx(1.0).epsilon(1e-9));

    auto samp = build_samp_table(ix, sol);
    for (int j = 0; j < n; ++j) {
        REQUIRE(samp.cdf[j].size() == 1);
        CHECK(samp.cdf[j][0] == doctest::Approx(1.0).epsilon(1e-9));
    }
    REQUIRE(samp.cdf[n].size() == n);
    for (int k = 0; k < n; ++k)
        CHECK(samp.cdf[n][k] ==
              doctest::Approx(double(k + 1) / n).epsilon(1e-9));
    CHECK(samp.row_sum[n] == doctest::Approx(1.0).epsilon(1e-9));

    // with s* = 1 and every disproportionality at one, the boosted table
    // degenerates to the plain one
    auto hsol = solve_instance_lp(inst, ix, BenchmarkKind::Homogeneous, true);
    auto boosted = build_samp_s_table(ix, hsol);
    for (size_t j = 0; j < samp.cdf.size(); ++j) {
        REQUIRE(boosted.cdf[j].size() == samp.cdf[j].size());
        for (size_t k = 0; k < samp.cdf[j].size(); ++k)
            CHECK(boosted.cdf[j][k] ==
                  doctest::Approx(samp.cdf[j][k]).epsilon(1e-9));
    }
}

TEST_CASE("boosted rows dominate plain rows") {
    Instance inst = generate_homogeneous_synthetic(10, 12, 3, 2, 0.7, 33);
    auto ix = build_index(inst);
    auto norm = solve_instance_lp(inst, ix, BenchmarkKind::Homogeneous, true);
    REQUIRE(norm.s_star > 0.0);

    auto samp = build_samp_table(ix, norm);
    auto boosted = build_samp_s_table(ix, norm);
    for (size_t j = 0; j < ix.rate.size(); ++j) {
        REQUIRE(boosted.cdf[j].size() == samp.cdf[j].size());
        for (size_t k = 0; k < samp.cdf[j].size(); ++k)
            CHECK(boosted.cdf[j][k] >= samp.cdf[j][k] - 1e-12);
        // boosted row mass: exactly 1 for underrepresented types, 1/kappa
        // for overrepresented ones
        if (ix.kappa_j[j] > 1.0)
            CHECK(boosted.row_sum[j] ==
                  doctest::Approx(1.0 / ix.kappa_j[j]).epsilon(1e-9));
        else
            CHECK(boosted.row_sum[j] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("boosted table rejects unsuitable solutions") {
    Instance inst = generate_homogeneous_synthetic(6, 8, 2, 2, 0.8, 2);
    auto ix = build_index(inst);
    auto gsol = solve_benchmark(ix, build_general_lp(ix));
    CHECK(thrown_code([&] { build_samp_s_table(ix, gsol); }) ==
          "not_homogeneous");

    // a starved type drives the benchmark to zero
    Instance dead;
    dead.supply = {{"i0", 1}, {"i1", 1}};
    dead.demand = {{"j0", 1.0}, {"j1", 1.0}};
    dead.edges = {{"i0", "j0"}, {"i1", "j0"}};
    dead.groups = {{"j0", {"j0"}, 0.5}, {"j1", {"j1"}, 0.5}};
    auto dx = build_index(dead);
    auto dsol = solve_benchmark(dx, build_homogeneous_lp(dx));
    REQUIRE(dsol.s_star == doctest::Approx(0.0));
    CHECK(thrown_code([&] { build_samp_s_table(dx, dsol); }) ==
          "degenerate_benchmark");
}

TEST_CASE("greedy prefers capacity then lexicographic id") {
    Instance inst;
    inst.supply = {{"i2", 3}, {"i1", 3}};  // declaration order != id order
    inst.demand = {{"j", 1.0}};
    inst.edges = {{"i2", "j"}, {"i1", "j"}};
    inst.groups = {{"g", {"j"}, 0.5}};
    auto ix = build_index(inst);
    auto rank = greedy_tie_rank(inst);
    CHECK(rank == std::vector<int>{1, 0});  // "i1" outranks "i2"

    PolicySpec spec = parse_policy("greedy");
    Rng rng = Rng::stream(1, 0, 7);
    auto state = init_policy_state(ix, spec, rng);

    // equal remaining: tie falls to "i1" (index 1)
    auto d = decide(spec, nullptr, ix, rank, state, 0, 0.1, rng);
    CHECK(d.supply == 1);
    // now i2 holds more
    d = decide(spec, nullptr, ix, rank, state, 0, 0.2, rng);
    CHECK(d.supply == 0);
    d = decide(spec, nullptr, ix, rank, state, 0, 0.3, rng);
    CHECK(d.supply == 1);
    // drain the rest, then nothing is left
    for (int k = 0; k < 3; ++k)
        CHECK(decide(spec, nullptr, ix, rank, state, 0, 0.5, rng).supply >= 0);
    d = decide(spec, nullptr, ix, rank, state, 0, 0.9, rng);
    CHECK(d.supply == -1);
    CHECK(d.reason == DecisionReason::NoAvailableNeighbor);
    CHECK(state.remaining == std::vector<long long>{0, 0});
}

TEST_CASE("ranking serves from the top of its permutation") {
    Instance inst;
    inst.supply = {{"a", 2}, {"b", 2}, {"c", 2}};
    inst.demand = {{"j", 1.0}};
    inst.edges = {{"a", "j"}, {"b", "j"}, {"c", "j"}};
    inst.groups = {{"g", {"j"}, 0.5}};
    auto ix = build_index(inst);
    PolicySpec spec = parse_policy("ranking");
    Rng rng = Rng::stream(3, 1, 7);
    auto state = init_policy_state(ix, spec, rng);

    // sigma_pos is the inverse permutation
    for (int p = 0; p < 3; ++p) CHECK(state.sigma_pos[state.sigma[p]] == p);

    int top = state.sigma[2];
    auto d = decide(spec, nullptr, ix, kNoRank, state, 0, 0.1, rng);
    CHECK(d.supply == top);
    d = decide(spec, nullptr, ix, kNoRank, state, 0, 0.2, rng);
    CHECK(d.supply == top);  // still has a unit left
    d = decide(spec, nullptr, ix, kNoRank, state, 0, 0.3, rng);
    CHECK(d.supply == state.sigma[1]);
    // with capacity to spare every arrival lands somewhere
    for (int k = 0; k < 3; ++k)
        CHECK(decide(spec, nullptr, ix, kNoRank, state, 0, 0.5, rng).supply >= 0);
    CHECK(decide(spec, nullptr, ix, kNoRank, state, 0, 0.9, rng).supply == -1);
}

TEST_CASE("threshold policy holds back common arrivals") {
    Instance inst = generate_lower_bound_instance(4);
    auto ix = build_index(inst);
    CHECK(dedicated_edge_family(ix));

    PolicySpec spec = parse_policy("alg-tau:0.5");
    Rng rng = Rng::stream(5, 0, 7);
    auto state = init_policy_state(ix, spec, rng);
    const int common = 4;

    // before the threshold the common type is turned away untouched
    auto d = decide(spec, nullptr, ix, kNoRank, state, common, 0.49, rng);
    CHECK(d.supply == -1);
    CHECK(d.reason == DecisionReason::BelowThresholdTime);
    // a rare type takes its dedicated supply no matter the clock
    d = decide(spec, nullptr, ix, kNoRank, state, 1, 0.1, rng);
    CHECK(d.supply == 1);
    d = decide(spec, nullptr, ix, kNoRank, state, 1, 0.2, rng);
    CHECK(d.reason == DecisionReason::NoAvailableNeighbor);
    // after the threshold commons fill the permutation from the front,
    // skipping anything already consumed
    std::vector<int> expected;
    for (int p = 0; p < 4; ++p)
        if (state.sigma[p] != 1) expected.push_back(state.sigma[p]);
    for (int want : expected) {
        d = decide(spec, nullptr, ix, kNoRank, state, common, 0.7, rng);
        CHECK(d.supply == want);
    }
    d = decide(spec, nullptr, ix, kNoRank, state, common, 0.9, rng);
    CHECK(d.reason == DecisionReason::NoAvailableNeighbor);

    // tau = 1 never serves a common arrival (times live in [0, 1))
    PolicySpec wall = parse_policy("alg-tau:1");
    Rng rng2 = Rng::stream(5, 1, 7);
    auto state2 = init_policy_state(ix, wall, rng2);
    for (double t : {0.0, 0.5, 0.999999}) {
        auto r = decide(wall, nullptr, ix, kNoRank, state2, common, t, rng2);
        CHECK(r.reason == DecisionReason::BelowThresholdTime);
    }
}

TEST_CASE("sampling consumes one draw per arrival regardless of capacity") {
    Instance inst = generate_lower_bound_instance(5);
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_general_lp(ix));
    auto table = build_samp_table(ix, sol);
    PolicySpec spec = parse_policy("samp");

    Rng rng_a = Rng::stream(11, 0, 7);
    Rng rng_b = Rng::stream(11, 0, 7);
    auto full = init_policy_state(ix, spec, rng_a);
    auto starved = init_policy_state(ix, spec, rng_b);
    for (long long& r : starved.remaining) r = 0;

    for (int k = 0; k < 50; ++k) {
        int j = k % 6;
        auto da = decide(spec, &table, ix, kNoRank, full, j, 0.01 * k, rng_a);
        auto db = decide(spec, &table, ix, kNoRank, starved, j, 0.01 * k, rng_b);
        // the starved copy can only differ by running out of capacity
        if (db.reason == DecisionReason::SampledReject)
            CHECK(da.reason == DecisionReason::SampledReject);
        if (da.reason == DecisionReason::SampledReject)
            CHECK(db.reason == DecisionReason::SampledReject);
        if (db.reason == DecisionReason::SampledFull)
            CHECK(da.supply >= -1);
    }
    // both streams consumed the same amount of randomness
    CHECK(rng_a.next() == rng_b.next());
}

TEST_CASE("every policy respects capacity") {
    Instance inst = generate_homogeneous_synthetic(8, 10, 3, 2, 0.7, 12);
    auto ix = build_index(inst);
    auto norm = solve_instance_lp(inst, ix, BenchmarkKind::Homogeneous, true);
    auto samp = build_samp_table(ix, norm);
    auto boosted = build_samp_s_table(ix, norm);
    auto rank = greedy_tie_rank(inst);

    for (const char* name : {"samp", "samp-s", "greedy", "uniform", "ranking"}) {
        PolicySpec spec = parse_policy(name);
        const SamplingTable* table =
            spec.kind == PolicyKind::Samp
                ? &samp
                : spec.kind == PolicyKind::SampS ? &boosted : nullptr;
        Rng rng = Rng::stream(21, 0, 7);
        auto state = init_policy_state(ix, spec, rng);
        std::vector<long long> assigned(ix.capacity.size(), 0);
        for (int k = 0; k < 500; ++k) {
            int j = int(rng.below(ix.rate.size()));
            auto d = decide(spec, table, ix, rank, state, j, 0.001 * k, rng);
            if (d.supply >= 0) {
                CHECK(d.reason == DecisionReason::Assigned);
                ++assigned[d.supply];
            }
        }
        for (size_t i = 0; i < ix.capacity.size(); ++i) {
            CHECK(state.remaining[i] >= 0);
            CHECK(assigned[i] + state.remaining[i] == ix.capacity[i]);
        }
    }
}

TEST_CASE("state reset reuses buffers and redraws the permutation") {
    Instance inst = generate_lower_bound_instance(30);
    auto ix = build_index(inst);
    PolicySpec spec = parse_policy("ranking");
    Rng rng = Rng::stream(2, 0, 7);
    auto state = init_policy_state(ix, spec, rng);
    auto sigma_first = state.sigma;
    state.remaining[3] = 0;
    state.sigma_cursor = 9;
    reset_policy_state(ix, spec, state, rng);
    CHECK(state.remaining == ix.capacity);
    CHECK(state.sigma_cursor == 0);
    CHECK(state.sigma != sigma_first);  // 1/30! chance of a false alarm
    for (int p = 0; p < 30; ++p) CHECK(state.sigma_pos[state.sigma[p]] == p);

    // plain policies skip the permutation entirely
    PolicySpec plain = parse_policy("greedy");
    PolicyState bare;
    Rng rng2 = Rng::stream(2, 1, 7);
    reset_policy_state(ix, plain, bare, rng2);
    CHECK(bare.sigma.empty());
    CHECK(bare.remaining == ix.capacity);
}

TEST_CASE("clairvoyant allocation on the dedicated-edge family") {
    Instance inst = generate_lower_bound_instance(2);
    auto ix = build_index(inst);
    // two rare arrivals for type 0, one common arrival: the duplicate rare
    // is lost, the common soaks up the untouched supply
    CHECK(offline_rare_first(ix, {2, 0, 1}) ==
          std::vector<long long>{1, 0, 1});
    CHECK(offline_rare_first(ix, {0, 0, 0}) ==
          std::vector<long long>{0, 0, 0});
    CHECK(offline_rare_first(ix, {0, 0, 9}) ==
          std::vector<long long>{0, 0, 2});
    CHECK(offline_rare_first(ix, {1, 1, 5}) ==
          std::vector<long long>{1, 1, 0});

    Instance other = generate_homogeneous_synthetic(4, 4, 2, 1, 0.9, 3);
    auto ox = build_index(other);
    CHECK(!dedicated_edge_family(ox));
    CHECK(thrown_code([&] { offline_rare_first(ox, {0, 0, 0, 0}); }) ==
          "wrong_instance_family");

    // capacity two breaks the family shape
    Instance fat = generate_lower_bound_instance(3);
    fat.supply[0].capacity = 2;
    CHECK(!dedicated_edge_family(build_index(fat)));
}
