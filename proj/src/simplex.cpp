#include "epora/simplex.hpp"

#include <cmath>
#include <utility>

#include "epora/error.hpp"

namespace epora {

namespace {

// Dictionary tableau.  Columns 0..n-1 hold the nonbasic variables, column n
// the phase-one auxiliary variable, column n+1 the right-hand side.  Rows
// 0..m-1 are the constraints, row m the true objective, row m+1 the
// phase-one objective.  basic_/nonbasic_ track which variable lives where;
// the auxiliary variable is identified as -1.
class Dictionary {
public:
    Dictionary(const std::vector<std::vector<double>>& a,
               const std::vector<double>& b, const std::vector<double>& c,
               double eps)
        : m_(static_cast<int>(b.size())),
          n_(static_cast<int>(c.size())),
          eps_(eps),
          nonbasic_(n_ + 1),
          basic_(m_),
          d_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) d_[i][j] = a[i][j];
            basic_[i] = n_ + i;  // slack of row i
            d_[i][n_] = -1.0;
            d_[i][n_ + 1] = b[i];
        }
        for (int j = 0; j < n_; ++j) {
            nonbasic_[j] = j;
            d_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        d_[m_ + 1][n_] = 1.0;
    }

    SimplexResult run() {
        SimplexResult res;
        if (m_ > 0) {
            int r = 0;
            for (int i = 1; i < m_; ++i)
                if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
            if (d_[r][n_ + 1] < -eps_) {
                pivot(r, n_);
                if (!optimize(2) || d_[m_ + 1][n_ + 1] < -eps_) {
                    res.status = SolveStatus::Infeasible;
                    res.pivots = pivots_;
                    return res;
                }
                for (int i = 0; i < m_; ++i) {
                    if (basic_[i] != -1) continue;
                    // Auxiliary basic at level zero: drive it out through the
                    // numerically largest admissible column.
                    int s = -1;
                    for (int j = 0; j < n_; ++j)
                        if (std::abs(d_[i][j]) > eps_ &&
                            (s == -1 ||
                             std::abs(d_[i][j]) > std::abs(d_[i][s])))
                            s = j;
                    if (s != -1) pivot(i, s);
                }
            }
        }
        if (!optimize(1)) {
            res.status = SolveStatus::Unbounded;
            res.pivots = pivots_;
            return res;
        }
        res.status = SolveStatus::Optimal;
        res.x.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && basic_[i] < n_)
                res.x[basic_[i]] = d_[i][n_ + 1];
        res.objective = d_[m_][n_ + 1];
        res.pivots = pivots_;
        return res;
    }

private:
    void pivot(int r, int s) {
        std::vector<double>& ar = d_[r];
        const double inv = 1.0 / ar[s];
        for (int i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            std::vector<double>& bi = d_[i];
            const double f = bi[s] * inv;
            if (f != 0.0)
                for (int j = 0; j < n_ + 2; ++j) bi[j] -= f * ar[j];
            bi[s] = -f;
        }
        for (int j = 0; j < n_ + 2; ++j) ar[j] *= inv;
        ar[s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
        ++pivots_;
    }

    // phase 1 optimizes the true objective (row m_), phase 2 the phase-one
    // objective (row m_+1); phase 1 must not let the auxiliary re-enter.
    bool optimize(int phase) {
        const int x = m_ + phase - 1;
        bool bland = false;
        long long since_gain = 0;
        const long long stall_limit = 4LL * (m_ + n_) + 64;
        double last = d_[x][n_ + 1];
        for (;;) {
            int s = -1;
            if (bland) {
                for (int j = 0; j <= n_; ++j) {
                    if (nonbasic_[j] == -phase) continue;
                    if (d_[x][j] < -eps_ &&
                        (s == -1 || nonbasic_[j] < nonbasic_[s]))
                        s = j;
                }
            } else {
                for (int j = 0; j <= n_; ++j) {
                    if (nonbasic_[j] == -phase) continue;
                    if (s == -1 ||
                        std::pair<double, int>(d_[x][j], nonbasic_[j]) <
                            std::pair<double, int>(d_[x][s], nonbasic_[s]))
                        s = j;
                }
            }
            if (s == -1 || d_[x][s] >= -eps_) return true;
            int r = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (d_[i][s] <= eps_) continue;
                const double ratio = d_[i][n_ + 1] / d_[i][s];
                if (r == -1 || ratio < best ||
                    (ratio == best && basic_[i] < basic_[r])) {
                    r = i;
                    best = ratio;
                }
            }
            if (r == -1) return false;
            pivot(r, s);
            if (!bland) {
                const double now = d_[x][n_ + 1];
                if (now > last + 1e-12 * (1.0 + std::abs(last))) {
                    last = now;
                    since_gain = 0;
                } else if (++since_gain > stall_limit) {
                    bland = true;
                }
            }
        }
    }

    int m_, n_;
    double eps_;
    std::vector<int> nonbasic_;
    std::vector<int> basic_;
    std::vector<std::vector<double>> d_;
    long long pivots_ = 0;
};

}  // namespace

SimplexResult solve_simplex(const DenseLp& lp, double eps) {
    const int n = lp.num_vars;
    const size_t k = lp.rows.size();
    if (lp.objective.size() != static_cast<size_t>(n) ||
        lp.relations.size() != k || lp.rhs.size() != k)
        throw EporaError("lp_shape", "inconsistent LP dimensions");
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    a.reserve(k);
    b.reserve(k);
    for (size_t i = 0; i < k; ++i) {
        if (lp.rows[i].size() != static_cast<size_t>(n))
            throw EporaError("lp_shape", "row width mismatch");
        switch (lp.relations[i]) {
            case Relation::LessEq:
                a.push_back(lp.rows[i]);
                b.push_back(lp.rhs[i]);
                break;
            case Relation::GreaterEq: {
                std::vector<double> neg(lp.rows[i]);
                for (double& v : neg) v = -v;
                a.push_back(std::move(neg));
                b.push_back(-lp.rhs[i]);
                break;
            }
            case Relation::Equal: {
                a.push_back(lp.rows[i]);
                b.push_back(lp.rhs[i]);
                std::vector<double> neg(lp.rows[i]);
                for (double& v : neg) v = -v;
                a.push_back(std::move(neg));
                b.push_back(-lp.rhs[i]);
                break;
            }
        }
    }
    Dictionary dict(a, b, lp.objective, eps);
    return dict.run();
}

}  // namespace epora
