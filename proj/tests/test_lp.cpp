#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "epora/error.hpp"
#include "epora/generators.hpp"
#include "epora/instance.hpp"
#include "epora/lp.hpp"
#include "epora/simplex.hpp"

using namespace epora;
namespace fs = std::filesystem;

namespace {

// Independent oracle: put every constraint into a.z <= c form (including
// z >= 0), enumerate all candidate vertices as solutions of square
// subsystems, keep the feasible ones, take the best objective.  Exponential,
// so only for a handful of variables, but shares no code with the simplex.
struct HalfSpaces {
    int d = 0;
    std::vector<std::vector<double>> a;
    std::vector<double> c;
};

HalfSpaces to_halfspaces(const DenseLp& lp) {
    HalfSpaces h;
    h.d = lp.num_vars;
    for (size_t r = 0; r < lp.rows.size(); ++r) {
        if (lp.relations[r] == Relation::LessEq ||
            lp.relations[r] == Relation::Equal) {
            h.a.push_back(lp.rows[r]);
            h.c.push_back(lp.rhs[r]);
        }
        if (lp.relations[r] == Relation::GreaterEq ||
            lp.relations[r] == Relation::Equal) {
            std::vector<double> neg(lp.rows[r]);
            for (double& v : neg) v = -v;
            h.a.push_back(std::move(neg));
            h.c.push_back(-lp.rhs[r]);
        }
    }
    for (int k = 0; k < lp.num_vars; ++k) {
        std::vector<double> row(lp.num_vars, 0.0);
        row[k] = -1.0;
        h.a.push_back(std::move(row));
        h.c.push_back(0.0);
    }
    return h;
}

// Gaussian elimination with partial pivoting; false when near-singular.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> b,
                  std::vector<double>& out) {
    const int d = int(b.size());
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-9) return false;
        std::swap(m[piv], m[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (int k = col; k < d; ++k) m[r][k] -= f * m[col][k];
            b[r] -= f * b[col];
        }
    }
    out.resize(d);
    for (int k = 0; k < d; ++k) out[k] = b[k] / m[k][k];
    return true;
}

double enumerate_optimum(const DenseLp& lp) {
    HalfSpaces h = to_halfspaces(lp);
    const int d = h.d;
    const int m = int(h.a.size());
    REQUIRE(d <= 8);  // keep C(m, d) manageable

    std::vector<int> pick(d);
    for (int k = 0; k < d; ++k) pick[k] = k;
    double best = -1e300;
    bool any = false;
    while (true) {
        std::vector<std::vector<double>> sub(d);
        std::vector<double> rhs(d);
        for (int k = 0; k < d; ++k) {
            sub[k] = h.a[pick[k]];
            rhs[k] = h.c[pick[k]];
        }
        std::vector<double> z;
        if (solve_square(std::move(sub), std::move(rhs), z)) {
            bool feasible = true;
            for (int r = 0; r < m && feasible; ++r) {
                double lhs = 0.0;
                for (int k = 0; k < d; ++k) lhs += h.a[r][k] * z[k];
                feasible = lhs <= h.c[r] + 1e-7;
            }
            if (feasible) {
                double obj = 0.0;
                for (int k = 0; k < d; ++k) obj += lp.objective[k] * z[k];
                best = std::max(best, obj);
                any = true;
            }
        }
        // next combination
        int k = d - 1;
        while (k >= 0 && pick[k] == m - d + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int j = k + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
    }
    REQUIRE(any);
    return best;
}

Instance random_small_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nsup(1, 3), ndem(1, 3);
    std::uniform_real_distribution<double> urate(0.3, 2.5);
    const int I = nsup(rng), J = ndem(rng);
    Instance inst;
    for (int i = 0; i < I; ++i)
        inst.supply.push_back({"i" + std::to_string(i),
                               1 + std::uniform_int_distribution<int>(0, 2)(rng)});
    int edges_left = 6;
    for (int j = 0; j < J; ++j) {
        std::string id = "j" + std::to_string(j);
        inst.demand.push_back({id, urate(rng)});
        int deg = std::uniform_int_distribution<int>(0, std::min(2, I))(rng);
        deg = std::min(deg, edges_left);
        std::vector<int> owners(I);
        for (int i = 0; i < I; ++i) owners[i] = i;
        std::shuffle(owners.begin(), owners.end(), rng);
        for (int k = 0; k < deg; ++k)
            inst.edges.emplace_back("i" + std::to_string(owners[k]), id);
        edges_left -= deg;
    }
    if (std::uniform_int_distribution<int>(0, 1)(rng) || J == 1) {
        std::uniform_real_distribution<double> ut(0.15, 0.45);
        for (int j = 0; j < J; ++j) {
            std::string id = "j" + std::to_string(j);
            inst.groups.push_back({id, {id}, ut(rng)});
        }
    } else {
        std::uniform_real_distribution<double> ut(0.2, 0.6);
        int split = std::uniform_int_distribution<int>(1, J - 1)(rng);
        Group a{"ga", {}, ut(rng)}, b{"gb", {}, ut(rng)};
        for (int j = 0; j < J; ++j)
            (j < split ? a : b).members.push_back("j" + std::to_string(j));
        inst.groups.push_back(a);
        inst.groups.push_back(b);
    }
    return inst;
}

Instance one_on_one(long long cap, double rate, double target) {
    Instance inst;
    inst.supply = {{"i", cap}};
    inst.demand = {{"j", rate}};
    inst.edges = {{"i", "j"}};
    inst.groups = {{"j", {"j"}, target}};
    return inst;
}

}  // namespace

TEST_CASE("simplex solves textbook problems") {
    // max 3x + 2y  st  x + y <= 4, x <= 2
    DenseLp lp;
    lp.num_vars = 2;
    lp.objective = {3, 2};
    lp.rows = {{1, 1}, {1, 0}};
    lp.relations = {Relation::LessEq, Relation::LessEq};
    lp.rhs = {4, 2};
    auto res = solve_simplex(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(res.x[0] == doctest::Approx(2.0));
    CHECK(res.x[1] == doctest::Approx(2.0));

    // equality constraint
    lp.rows = {{1, 1}, {1, 0}};
    lp.relations = {Relation::Equal, Relation::LessEq};
    lp.rhs = {2, 1.5};
    lp.objective = {1, 1};
    res = solve_simplex(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-12));

    // phase one actually needed
    lp.rows = {{1, 1}, {1, 0}, {0, 1}};
    lp.relations = {Relation::GreaterEq, Relation::LessEq, Relation::LessEq};
    lp.rhs = {2, 3, 3};
    res = solve_simplex(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(6.0).epsilon(1e-12));

    // infeasible
    lp.rows = {{1, 0}, {1, 0}};
    lp.relations = {Relation::GreaterEq, Relation::LessEq};
    lp.rhs = {2, 1};
    CHECK(solve_simplex(lp).status == SolveStatus::Infeasible);

    // unbounded
    lp.rows = {{0, 1}};
    lp.relations = {Relation::LessEq};
    lp.rhs = {1};
    CHECK(solve_simplex(lp).status == SolveStatus::Unbounded);
}

TEST_CASE("simplex survives the classic cycling example") {
    // Dantzig's rule cycles forever on this one without anti-cycling.
    DenseLp lp;
    lp.num_vars = 4;
    lp.objective = {0.75, -150.0, 0.02, -6.0};
    lp.rows = {{0.25, -60.0, -0.04, 9.0},
               {0.5, -90.0, -0.02, 3.0},
               {0.0, 0.0, 1.0, 0.0}};
    lp.relations = {Relation::LessEq, Relation::LessEq, Relation::LessEq};
    lp.rhs = {0.0, 0.0, 1.0};
    auto res = solve_simplex(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("simplex rejects malformed problems") {
    DenseLp lp;
    lp.num_vars = 1;
    lp.objective = {1.0};
    lp.rows = {{1.0, 2.0}};
    lp.relations = {Relation::LessEq};
    lp.rhs = {1.0};
    try {
        solve_simplex(lp);
        FAIL("expected throw");
    } catch (const EporaError& e) {
        CHECK(std::string(e.code()) == "lp_shape");
    }
}

TEST_CASE("benchmark model shape") {
    auto ix = build_index(one_on_one(2, 4.0, 0.9));
    auto model = build_general_lp(ix);
    CHECK(model.lp.num_vars == 2);  // one edge + s
    CHECK(model.s_var == 1);
    CHECK(model.lp.rows.size() == 3);  // demand cap, floor, supply cap

    Instance hard = generate_lower_bound_instance(3);
    auto hx = build_index(hard);
    model = build_general_lp(hx);
    CHECK(model.lp.num_vars == 7);       // six edges + s
    CHECK(model.lp.rows.size() == 11);   // 4 demand + 4 group + 3 supply

    Instance nogroups = one_on_one(2, 4.0, 0.9);
    nogroups.groups.clear();
    try {
        build_general_lp(build_index(nogroups));
        FAIL("expected throw");
    } catch (const EporaError& e) {
        CHECK(std::string(e.code()) == "invalid_instance");
    }
}

TEST_CASE("hand-solved benchmark") {
    // one agent with two units, one type with rate 4 and full target:
    // max s st x <= 4, x >= 4s, x <= 2  ->  s* = 1/2.
    auto ix = build_index(one_on_one(2, 4.0, 1.0 - 1e-9));
    auto sol = solve_benchmark(ix, build_general_lp(ix));
    CHECK(sol.status == "optimal");
    CHECK(sol.s_star == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(sol.x_j[0] == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(sol.feasibility_residual <= 1e-7);

    auto hsol = solve_benchmark(ix, build_homogeneous_lp(ix));
    CHECK(hsol.s_star == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("hard family is fully servable offline") {
    for (int n : {2, 5, 10, 50}) {
        Instance inst = generate_lower_bound_instance(n);
        auto ix = build_index(inst);
        auto sol = solve_benchmark(ix, build_general_lp(ix));
        CHECK(sol.s_star == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(sol.feasibility_residual <= 1e-7);
    }
}

TEST_CASE("no edges means no service floor can hold") {
    Instance inst = one_on_one(2, 4.0, 0.5);
    inst.edges.clear();
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_general_lp(ix));
    CHECK(sol.status == "optimal");
    CHECK(sol.s_star == doctest::Approx(0.0));
}

TEST_CASE("simplex matches vertex enumeration on random instances") {
    std::mt19937_64 rng(20260814);
    for (int trial = 0; trial < 40; ++trial) {
        Instance inst = random_small_instance(rng);
        auto ix = build_index(inst);
        auto model = build_general_lp(ix);
        auto sol = solve_benchmark(ix, model);
        double oracle = enumerate_optimum(model.lp);
        CHECK(sol.s_star == doctest::Approx(oracle).epsilon(1e-6));
        CHECK(sol.feasibility_residual <= 1e-7);

        // reported totals are plain sums of the edge values
        for (size_t j = 0; j < ix.rate.size(); ++j) {
            double sum = 0.0;
            for (int e : ix.demand_edge_ids[j]) sum += sol.x_edge[e];
            CHECK(sol.x_j[j] == doctest::Approx(sum).epsilon(1e-12));
        }
        double total_j = 0.0, total_i = 0.0;
        for (double v : sol.x_j) total_j += v;
        for (double v : sol.x_i) total_i += v;
        CHECK(total_j == doctest::Approx(total_i).epsilon(1e-9));
    }
}

TEST_CASE("general and per-type benchmarks agree on singleton groups") {
    for (std::uint64_t seed : {3ULL, 5ULL, 11ULL}) {
        Instance inst = generate_homogeneous_synthetic(12, 14, 3, 3, 0.6, seed);
        auto ix = build_index(inst);
        auto g = solve_benchmark(ix, build_general_lp(ix));
        auto h = solve_benchmark(ix, build_homogeneous_lp(ix));
        CHECK(std::abs(g.s_star - h.s_star) <= 1e-7);
    }
    Instance table = generate_table1_shaped(1);
    try {
        build_homogeneous_lp(build_index(table));
        FAIL("expected throw");
    } catch (const EporaError& e) {
        CHECK(std::string(e.code()) == "not_homogeneous");
    }
}

TEST_CASE("benchmark value never exceeds its structural bounds") {
    std::mt19937_64 seeds(99);
    for (int trial = 0; trial < 30; ++trial) {
        int ns = 2 + int(seeds() % 28), nd = 2 + int(seeds() % 28);
        int deg = 1 + int(seeds() % std::min(ns, 5));
        long long cap = 1 + int(seeds() % 6);
        double floor = 0.3 + 0.1 * double(seeds() % 8);
        Instance inst = generate_homogeneous_synthetic(
            ns, nd, deg, cap, floor, seeds());
        auto ix = build_index(inst);
        auto sol = solve_benchmark(ix, build_homogeneous_lp(ix));
        auto rep = check_lemma_mu(sol, ix);
        CHECK(rep.ok);
        CHECK(rep.margin_kappa >= -1e-7);
        CHECK(rep.margin_one >= -1e-12);
        CHECK(rep.margin_scarcity >= -1e-7);
    }
}

TEST_CASE("normalization pins every type to its floor") {
    // two types share two units; the slack type keeps extra service that
    // normalization must strip
    Instance inst;
    inst.supply = {{"i", 2}};
    inst.demand = {{"j0", 1.0}, {"j1", 1.0}};
    inst.edges = {{"i", "j0"}, {"i", "j1"}};
    inst.groups = {{"j0", {"j0"}, 0.9}, {"j1", {"j1"}, 0.1}};
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_homogeneous_lp(ix));
    CHECK(sol.s_star == doctest::Approx(5.0 / 9.0).epsilon(1e-9));

    auto norm = normalize_homogeneous(sol, ix);
    CHECK(norm.s_star == sol.s_star);
    for (size_t j = 0; j < ix.rate.size(); ++j)
        CHECK(norm.x_j[j] ==
              doctest::Approx(sol.s_star * ix.lambda_total * ix.mu_j[j])
                  .epsilon(1e-9));
    for (size_t e = 0; e < norm.x_edge.size(); ++e)
        CHECK(norm.x_edge[e] <= sol.x_edge[e] + 1e-12);
    CHECK(norm.feasibility_residual <= 1e-7);

    // already tight solutions pass through unchanged
    auto again = normalize_homogeneous(norm, ix);
    for (size_t e = 0; e < norm.x_edge.size(); ++e)
        CHECK(again.x_edge[e] == doctest::Approx(norm.x_edge[e]).epsilon(1e-12));

    // a solution below its floor cannot be repaired by scaling down
    auto broken = sol;
    for (double& v : broken.x_edge) v *= 0.2;
    broken.x_j[0] *= 0.2;
    broken.x_j[1] *= 0.2;
    try {
        normalize_homogeneous(broken, ix);
        FAIL("expected throw");
    } catch (const EporaError& e) {
        CHECK(std::string(e.code()) == "normalization_infeasible");
    }

    // general-model solutions are not eligible
    auto gsol = solve_benchmark(ix, build_general_lp(ix));
    CHECK_THROWS_AS(normalize_homogeneous(gsol, ix), EporaError);
}

TEST_CASE("solution json round trip") {
    Instance inst = generate_homogeneous_synthetic(8, 10, 2, 3, 0.7, 21);
    auto ix = build_index(inst);
    auto sol = solve_benchmark(ix, build_homogeneous_lp(ix));
    std::string text = lp_solution_to_json(sol, "deadbeef00000000");
    std::string hash;
    auto back = lp_solution_from_json(text, ix, &hash);
    CHECK(hash == "deadbeef00000000");
    CHECK(back.s_star == sol.s_star);
    CHECK(back.kind == sol.kind);
    CHECK(back.x_edge == sol.x_edge);
    CHECK(back.feasibility_residual <= 1e-7);

    // an index with a different edge count rejects the payload
    Instance other = generate_homogeneous_synthetic(8, 10, 1, 3, 0.7, 21);
    auto ox = build_index(other);
    try {
        lp_solution_from_json(text, ox);
        FAIL("expected throw");
    } catch (const EporaError& e) {
        CHECK(std::string(e.code()) == "cache_mismatch");
    }
}

TEST_CASE("content-addressed cache") {
    fs::path dir = fs::temp_directory_path() / "epora_lp_cache_test";
    fs::remove_all(dir);

    Instance inst = generate_homogeneous_synthetic(10, 12, 3, 2, 0.8, 4);
    auto ix = build_index(inst);
    std::string key_g = lp_cache_key(inst, BenchmarkKind::General);
    std::string key_h = lp_cache_key(inst, BenchmarkKind::Homogeneous);
    CHECK(key_g != key_h);
    CHECK(key_g.size() == 16);
    CHECK(lp_cache_key(generate_lower_bound_instance(4),
                       BenchmarkKind::General) != key_g);

    auto first = solve_instance_lp(inst, ix, BenchmarkKind::General, false,
                                   dir.string());
    CHECK(fs::exists(dir / (key_g + ".json")));
    auto second = solve_instance_lp(inst, ix, BenchmarkKind::General, false,
                                    dir.string());
    CHECK(second.s_star == first.s_star);
    CHECK(second.x_edge == first.x_edge);

    // stale or foreign files are ignored, not trusted
    {
        std::ofstream out(dir / (key_h + ".json"));
        out << "{ this is not json";
    }
    auto hsol = solve_instance_lp(inst, ix, BenchmarkKind::Homogeneous, false,
                                  dir.string());
    CHECK(hsol.status == "optimal");
    CHECK(lp_cache_load(dir.string(), "0000000000000000", ix) == std::nullopt);

    // the stored payload carries its own key, so a renamed file misses
    fs::copy_file(dir / (key_g + ".json"), dir / (key_h + ".json"),
                  fs::copy_options::overwrite_existing);
    CHECK(lp_cache_load(dir.string(), key_h, ix) == std::nullopt);

    fs::remove_all(dir);
}

TEST_CASE("solver is deterministic") {
    Instance inst = generate_homogeneous_synthetic(25, 30, 4, 3, 0.6, 17);
    auto ix = build_index(inst);
    auto model = build_general_lp(ix);
    auto a = solve_benchmark(ix, model);
    auto b = solve_benchmark(ix, model);
    CHECK(a.s_star == b.s_star);
    CHECK(a.x_edge == b.x_edge);
    CHECK(a.pivots == b.pivots);

    DenseSimplexBackend backend;
    auto c = solve_benchmark(ix, model, 1e-7, &backend);
    CHECK(c.s_star == a.s_star);
}
