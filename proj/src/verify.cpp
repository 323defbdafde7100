#include "qsn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qsn/cnot.hpp"
#include "qsn/errors.hpp"
#include "qsn/simplex.hpp"

namespace qsn {

namespace {

void apply_gate(StateVector& state, const Gate& g) {
    const std::size_t tbit = std::size_t{1} << g.target;
    if (g.kind == Gate::Kind::x) {
        for (std::size_t i = 0; i < state.size(); ++i)
            if (i & tbit) std::swap(state[i], state[i ^ tbit]);
    } else {
        const std::size_t cbit = std::size_t{1} << g.control;
        for (std::size_t i = 0; i < state.size(); ++i)
            if ((i & cbit) && (i & tbit)) std::swap(state[i], state[i ^ tbit]);
    }
}

void apply_block(StateVector& state, const std::vector<Gate>& block) {
    for (const Gate& g : block) apply_gate(state, g);
}

// exp(-i dt/2 sum_j fields[j] sigma_j^z): diagonal, phase per basis state.
void apply_phase_step(StateVector& state, std::span<const double> fields, double dt) {
    const std::size_t d = fields.size();
    for (std::size_t i = 0; i < state.size(); ++i) {
        double zsum = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            zsum += (i & (std::size_t{1} << j)) ? -fields[j] : fields[j];
        state[i] *= std::polar(1.0, -0.5 * dt * zsum);
    }
}

StateVector initial_state(const GateSequence& gates) {
    if (gates.qubits > kMaxSimQubits)
        throw DimensionTooLargeError("dense simulation supports at most 14 qubits");
    StateVector state(std::size_t{1} << gates.qubits, Amplitude{0.0, 0.0});
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    state[0] = inv_sqrt2;
    state[std::size_t{1} << gates.anchor] = inv_sqrt2;
    return state;
}

// Basis-state image of a branch under a permutation block.
std::size_t permute_index(std::size_t index, const std::vector<Gate>& block) {
    for (const Gate& g : block) {
        const std::size_t tbit = std::size_t{1} << g.target;
        if (g.kind == Gate::Kind::x)
            index ^= tbit;
        else if (index & (std::size_t{1} << g.control))
            index ^= tbit;
    }
    return index;
}

std::size_t branch_index(const StateFamily& fam, bool complement) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < fam.dim(); ++j) {
        const int s = fam.signs[j];
        if ((s == -1 && !complement) || (s == 1 && complement)) idx |= std::size_t{1} << j;
    }
    return idx;
}

}  // namespace

void statevector_scan(const GateSequence& gates, const ProtocolSchedule& s,
                      std::span<const double> fields, double t,
                      const std::function<void(std::size_t, const StateVector&)>& on_boundary) {
    if (fields.size() != s.dim()) throw DimensionMismatchError("field vector dimension mismatch");
    if (gates.transitions.size() + 1 != s.size())
        throw DimensionMismatchError("gate sequence does not match schedule length");
    StateVector state = initial_state(gates);
    apply_block(state, gates.prep);
    on_boundary(0, state);
    for (std::size_t n = 0; n < s.size(); ++n) {
        apply_phase_step(state, fields, s.fractions[n] * t);
        if (n + 1 < s.size()) apply_block(state, gates.transitions[n]);
        on_boundary(n + 1, state);
    }
}

StateVector statevector_evolve(const GateSequence& gates, const ProtocolSchedule& s,
                               std::span<const double> fields, double t) {
    StateVector final_state;
    statevector_scan(gates, s, fields, t,
                     [&](std::size_t boundary, const StateVector& state) {
                         if (boundary == s.size()) final_state = state;
                     });
    apply_block(final_state, gates.measurement);
    return final_state;
}

Matrix qfim_generator_sum(const ProtocolSchedule& s, double t) {
    if (s.dim() > kMaxSimQubits)
        throw DimensionTooLargeError("generator sum supports at most 14 qubits");
    const GateSequence gates = compile_gates(s);
    const std::size_t d = s.dim();

    // Walk the two branches through the permutation blocks, accumulating the
    // diagonal entries of the time-integrated generators.
    std::size_t branch_a = branch_index(s.families.front(), false);
    std::size_t branch_b = branch_index(s.families.front(), true);
    std::vector<double> acc_a(d, 0.0), acc_b(d, 0.0);
    for (std::size_t n = 0; n < s.size(); ++n) {
        const double dt = s.fractions[n] * t;
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t bit = std::size_t{1} << j;
            acc_a[j] -= dt * ((branch_a & bit) ? -0.5 : 0.5);
            acc_b[j] -= dt * ((branch_b & bit) ? -0.5 : 0.5);
        }
        if (n + 1 < s.size()) {
            branch_a = permute_index(branch_a, gates.transitions[n]);
            branch_b = permute_index(branch_b, gates.transitions[n]);
        }
    }

    // Equal-weight two-point distribution: 4 Cov(H_i, H_j) reduces to the
    // product of branch differences.
    Matrix f(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            f(i, j) = (acc_a[i] - acc_b[i]) * (acc_a[j] - acc_b[j]);
    return f;
}

Matrix qfim_finite_difference(const GateSequence& gates, const ProtocolSchedule& s,
                              std::span<const double> fields, double t, double step) {
    const std::size_t d = s.dim();
    if (d > kMaxFiniteDiffQubits)
        throw DimensionTooLargeError("finite differences support at most 12 qubits");
    if (fields.size() != d) throw DimensionMismatchError("field vector dimension mismatch");

    const StateVector psi = statevector_evolve(gates, s, fields, t);
    std::vector<StateVector> dpsi(d);
    std::vector<double> shifted(fields.begin(), fields.end());
    for (std::size_t i = 0; i < d; ++i) {
        shifted[i] = fields[i] + step;
        const StateVector plus = statevector_evolve(gates, s, shifted, t);
        shifted[i] = fields[i] - step;
        const StateVector minus = statevector_evolve(gates, s, shifted, t);
        shifted[i] = fields[i];
        dpsi[i].resize(psi.size());
        for (std::size_t a = 0; a < psi.size(); ++a)
            dpsi[i][a] = (plus[a] - minus[a]) / (2.0 * step);
    }

    auto inner = [](const StateVector& a, const StateVector& b) {
        Amplitude sum{0.0, 0.0};
        for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
        return sum;
    };

    Matrix f(d, d);
    std::vector<Amplitude> overlap(d);
    for (std::size_t i = 0; i < d; ++i) overlap[i] = inner(dpsi[i], psi);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const Amplitude term = inner(dpsi[i], dpsi[j]) - overlap[i] * std::conj(overlap[j]);
            f(i, j) = 4.0 * term.real();
        }
    return f;
}

SaturabilityReport check_saturability(const Matrix& qfim, const FunctionCoefficients& fc, double t,
                                      double tol) {
    const std::size_t d = fc.dim();
    if (qfim.rows() != d || qfim.cols() != d)
        throw DimensionMismatchError("Fisher matrix dimension mismatch");

    SaturabilityReport report;
    report.tolerance = tol * t * t;
    const std::size_t L = fc.max_set.size();

    if (L == 1) {
        report.lambda = {1.0};
    } else {
        // Minimax over the weight simplex: variables (lambda, z), constraints
        //   sum_i M_ji lambda_i - target_j <= z   (both signs), sum lambda = 1.
        Matrix m(d, L);
        for (std::size_t col = 0; col < L; ++col) {
            const std::size_t i = fc.max_set[col];
            const double sign_ratio = (fc.weights[fc.pivot] > 0 ? 1.0 : -1.0) *
                                      (fc.weights[i] > 0 ? 1.0 : -1.0);
            for (std::size_t j = 0; j < d; ++j)
                m(j, col) = sign_ratio * qfim(j, i);
        }
        const std::size_t vars = L + 1 + 2 * d;  // lambda, z, slack per inequality
        Matrix a(2 * d + 1, vars);
        std::vector<double> b(2 * d + 1, 0.0);
        std::vector<double> cost(vars, 0.0);
        cost[L] = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double target = fc.normalized[j] * t * t;
            for (std::size_t col = 0; col < L; ++col) {
                a(2 * j, col) = m(j, col);
                a(2 * j + 1, col) = -m(j, col);
            }
            a(2 * j, L) = -1.0;
            a(2 * j, L + 1 + 2 * j) = 1.0;
            b[2 * j] = target;
            a(2 * j + 1, L) = -1.0;
            a(2 * j + 1, L + 1 + 2 * j + 1) = 1.0;
            b[2 * j + 1] = -target;
        }
        for (std::size_t col = 0; col < L; ++col) a(2 * d, col) = 1.0;
        b[2 * d] = 1.0;
        const LpResult lp = solve_lp(a, b, &cost);
        if (lp.status != LpStatus::optimal)
            throw std::runtime_error("lambda search LP did not solve");
        report.lambda.assign(lp.x.begin(), lp.x.begin() + L);
    }

    report.row_residuals.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double lhs = 0.0;
        for (std::size_t col = 0; col < L; ++col) {
            const std::size_t i = fc.max_set[col];
            const double ratio = (fc.weights[fc.pivot] > 0 ? 1.0 : -1.0) /
                                 (fc.weights[i] > 0 ? 1.0 : -1.0);
            lhs += ratio * qfim(j, i) * report.lambda[col];
        }
        report.row_residuals[j] = std::abs(lhs - fc.normalized[j] * t * t);
    }
    report.passed =
        *std::max_element(report.row_residuals.begin(), report.row_residuals.end()) <=
        report.tolerance;
    return report;
}

BasisTransform make_basis_transform(const FunctionCoefficients& fc,
                                    std::span<const double> lambda) {
    const std::size_t d = fc.dim();
    if (lambda.size() != fc.max_set.size())
        throw DimensionMismatchError("lambda length differs from max-set size");

    BasisTransform bt;
    bt.beta.assign(d, 0.0);
    for (std::size_t col = 0; col < fc.max_set.size(); ++col) {
        const std::size_t i = fc.max_set[col];
        bt.beta[i] = lambda[col] * (fc.weights[i] > 0 ? 1.0 : -1.0) / fc.inf_norm;
    }

    // Base completion: weights row first, standard basis rows for the rest,
    // each made orthogonal to beta so beta really is the first dual column.
    Matrix j_inv(d, d);
    for (std::size_t j = 0; j < d; ++j) j_inv(0, j) = fc.weights[j];
    std::size_t row = 1;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == fc.pivot) continue;
        for (std::size_t col2 = 0; col2 < d; ++col2)
            j_inv(row, col2) = (col2 == j ? 1.0 : 0.0) - bt.beta[j] * fc.weights[col2];
        ++row;
    }
    bt.jacobian_inverse = j_inv;
    try {
        bt.jacobian = j_inv.inverse();
    } catch (const std::runtime_error&) {
        throw SingularJacobianError();
    }
    return bt;
}

QBasisConditions transform_to_q_basis(const Matrix& qfim, const FunctionCoefficients& fc,
                                      std::span<const double> lambda, double t, double tol) {
    const BasisTransform bt = make_basis_transform(fc, lambda);
    QBasisConditions out;
    out.f_q = bt.jacobian.transposed() * qfim * bt.jacobian;
    // The first dual column carries a 1/pivot factor, so compare with the
    // pivot scaled back in; at |pivot| = 1 this is the bare condition.
    const double pivot = fc.weights[fc.pivot];
    out.f11_ok = std::abs(pivot * pivot * out.f_q(0, 0) - t * t) <= tol * t * t;
    double worst = 0.0;
    for (std::size_t i = 1; i < fc.dim(); ++i)
        worst = std::max({worst, std::abs(out.f_q(0, i)), std::abs(out.f_q(i, 0))});
    out.offdiag_ok = std::abs(pivot) * worst <= tol * t * t;
    return out;
}

bool probe_form_ok(const StateVector& state, const FunctionCoefficients& fc, double tol) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (std::abs(state[i]) > tol) {
            live.push_back(i);
            if (live.size() > 2) return false;
        }
    }
    if (live.size() != 2) return false;
    for (std::size_t i : live)
        if (std::abs(std::abs(state[i]) - inv_sqrt2) > tol) return false;
    for (std::size_t q : fc.max_set) {
        double expect = 0.0;
        for (std::size_t i : live) {
            const double p = std::norm(state[i]);
            expect += (i & (std::size_t{1} << q)) ? -p : p;
        }
        if (std::abs(expect) > tol) return false;
    }
    return true;
}

bool check_probe_form(const GateSequence& gates, const ProtocolSchedule& s,
                      std::span<const double> fields, const FunctionCoefficients& fc,
                      std::span<const std::size_t> boundaries) {
    bool ok = true;
    statevector_scan(gates, s, fields, s.total_time,
                     [&](std::size_t boundary, const StateVector& state) {
                         if (!ok) return;
                         if (std::find(boundaries.begin(), boundaries.end(), boundary) ==
                             boundaries.end())
                             return;
                         ok = probe_form_ok(state, fc);
                     });
    return ok;
}

double probabilistic_bound(int family_count, double t) {
    if (family_count < 1) throw std::invalid_argument("family count must be positive");
    return t * t / (static_cast<double>(family_count) * family_count);
}

}  // namespace qsn
