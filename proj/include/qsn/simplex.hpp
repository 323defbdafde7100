#pragma once

#include <cstddef>
#include <vector>

#include "qsn/linalg.hpp"

namespace qsn {

enum class LpStatus { optimal, infeasible, unbounded };

// Outcome of min c.x s.t. A x = b, x >= 0.
//
// `dual` always refers to the original (unflipped) rows. On infeasible
// problems it is the phase-1 dual: dual . A_j <= tol for every column j and
// dual . b = infeasibility > 0, which is exactly the separating vector the
// Farkas construction needs.
struct LpResult {
    LpStatus status = LpStatus::optimal;
    std::vector<double> x;
    double objective = 0.0;
    double infeasibility = 0.0;
    std::vector<double> dual;
};

// Dense two-phase primal simplex with Bland's anti-cycling rule. Instances
// here are tiny (a handful of equality rows), so robustness wins over speed.
// Pass c = nullptr for a pure feasibility solve.
LpResult solve_lp(const Matrix& a, const std::vector<double>& b, const std::vector<double>* c,
                  double pivot_tol = 1e-10, double feas_tol = 1e-9);

}  // namespace qsn
