#include "qsn/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsn {

namespace {

// Dense tableau: m rows over n real columns plus m artificial columns. The
// artificial block starts as the identity, so after any pivot sequence it
// holds B^{-1} and the cost row over it yields the duals for free.
struct Tableau {
    std::size_t m, n;
    std::vector<std::vector<double>> rows;  // m x (n + m)
    std::vector<double> rhs;                // >= 0 throughout
    std::vector<double> cost;               // reduced costs, n + m
    double objective = 0.0;
    std::vector<std::size_t> basis;         // basis[i] = column basic in row i
    double pivot_tol;

    std::size_t width() const { return n + m; }

    void pivot(std::size_t row, std::size_t col) {
        objective += cost[col] * rhs[row] / rows[row][col];
        const double p = rows[row][col];
        for (auto& v : rows[row]) v /= p;
        rhs[row] /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = rows[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width(); ++j) rows[i][j] -= f * rows[row][j];
            rhs[i] -= f * rhs[row];
            if (rhs[i] < 0.0 && rhs[i] > -1e-12) rhs[i] = 0.0;
        }
        const double fc = cost[col];
        if (fc != 0.0)
            for (std::size_t j = 0; j < width(); ++j) cost[j] -= fc * rows[row][j];
        basis[row] = col;
    }

    // Bland: entering = lowest-index eligible column with negative reduced
    // cost; leaving = min ratio, ties to the lowest basic index.
    LpStatus iterate(bool allow_artificial) {
        const std::size_t limit = allow_artificial ? width() : n;
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            std::size_t enter = width();
            for (std::size_t j = 0; j < limit; ++j) {
                if (cost[j] < -pivot_tol) {
                    enter = j;
                    break;
                }
            }
            if (enter == width()) return LpStatus::optimal;

            std::size_t leave = m;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (rows[i][enter] <= pivot_tol) continue;
                const double ratio = rhs[i] / rows[i][enter];
                if (ratio < best_ratio - 1e-15 ||
                    (std::abs(ratio - best_ratio) <= 1e-15 &&
                     (leave == m || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave == m) return LpStatus::unbounded;
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex failed to converge");
    }
};

}  // namespace

LpResult solve_lp(const Matrix& a, const std::vector<double>& b, const std::vector<double>* c,
                  double pivot_tol, double feas_tol) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) throw std::invalid_argument("rhs length mismatch");
    if (c && c->size() != n) throw std::invalid_argument("objective length mismatch");

    std::vector<double> flip(m, 1.0);
    Tableau t;
    t.m = m;
    t.n = n;
    t.pivot_tol = pivot_tol;
    t.rows.assign(m, std::vector<double>(n + m, 0.0));
    t.rhs.resize(m);
    t.basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        flip[i] = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.rows[i][j] = flip[i] * a(i, j);
        t.rows[i][n + i] = 1.0;
        t.rhs[i] = flip[i] * b[i];
        t.basis[i] = n + i;
    }

    // Phase 1: minimize the artificial sum.
    t.cost.assign(n + m, 0.0);
    t.objective = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        t.objective += t.rhs[i];
        for (std::size_t j = 0; j < n; ++j) t.cost[j] -= t.rows[i][j];
    }
    if (t.iterate(true) != LpStatus::optimal)
        throw std::runtime_error("phase-1 simplex reported unbounded");

    LpResult result;
    result.dual.resize(m);
    // Reduced cost of artificial i is 1 - y_i, so y falls straight out.
    for (std::size_t i = 0; i < m; ++i) result.dual[i] = flip[i] * (1.0 - t.cost[n + i]);

    if (t.objective > feas_tol) {
        result.status = LpStatus::infeasible;
        result.infeasibility = t.objective;
        return result;
    }

    // Drive leftover artificials out of the basis; rows with no real pivot
    // are redundant and their artificial stays parked at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t.rows[i][j]) > pivot_tol) {
                t.pivot(i, j);
                break;
            }
        }
    }

    if (c) {
        // Phase 2 over the real columns only.
        t.cost.assign(n + m, 0.0);
        for (std::size_t j = 0; j < n; ++j) t.cost[j] = (*c)[j];
        t.objective = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] >= n) continue;
            const double cb = (*c)[t.basis[i]];
            if (cb == 0.0) continue;
            t.objective += cb * t.rhs[i];
            for (std::size_t j = 0; j < t.width(); ++j) t.cost[j] -= cb * t.rows[i][j];
        }
        const LpStatus st = t.iterate(false);
        if (st == LpStatus::unbounded) {
            result.status = LpStatus::unbounded;
            return result;
        }
        for (std::size_t i = 0; i < m; ++i) result.dual[i] = flip[i] * (0.0 - t.cost[n + i]);
    }

    result.status = LpStatus::optimal;
    result.objective = t.objective;
    result.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) result.x[t.basis[i]] = t.rhs[i];
    return result;
}

}  // namespace qsn
