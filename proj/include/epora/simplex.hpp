#pragma once

#include <vector>

namespace epora {

enum class Relation { LessEq, GreaterEq, Equal };

// Dense LP: maximize objective . x  subject to
//   rows[k] . x  (relations[k])  rhs[k]   for every k,   x >= 0.
struct DenseLp {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<Relation> relations;
    std::vector<double> rhs;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct SimplexResult {
    SolveStatus status = SolveStatus::Optimal;
    double objective = 0.0;
    std::vector<double> x;
    long long pivots = 0;
};

// Two-phase dense simplex on the dictionary form.  Entering variable: most
// negative reduced cost, ties by smallest variable index; leaving variable:
// minimum ratio, ties by smallest basic index.  After a long stretch without
// objective improvement the entering rule permanently switches to Bland's
// rule for that solve, which guarantees termination.  Fully deterministic.
SimplexResult solve_simplex(const DenseLp& lp, double eps = 1e-9);

// Seam for swapping in an external solver.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual SimplexResult solve(const DenseLp& lp) = 0;
};

class DenseSimplexBackend final : public LpBackend {
public:
    explicit DenseSimplexBackend(double eps = 1e-9) : eps_(eps) {}
    SimplexResult solve(const DenseLp& lp) override {
        return solve_simplex(lp, eps_);
    }

private:
    double eps_;
};

}  // namespace epora
