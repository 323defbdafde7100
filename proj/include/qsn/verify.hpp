#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "qsn/coefficients.hpp"
#include "qsn/gates.hpp"
#include "qsn/linalg.hpp"
#include "qsn/schedule.hpp"

namespace qsn {

using Amplitude = std::complex<double>;
using StateVector = std::vector<Amplitude>;

// Dense simulation caps; qubit j is bit j of the basis index (little-endian).
inline constexpr std::size_t kMaxSimQubits = 14;
inline constexpr std::size_t kMaxFiniteDiffQubits = 12;

// Full evolution: preparation block, then per segment a diagonal phase step
// followed by its transition block, and finally the measurement block.
StateVector statevector_evolve(const GateSequence& gates, const ProtocolSchedule& s,
                               std::span<const double> fields, double t);

// Same walk, but invokes the callback at every segment boundary: index 0 is
// the prepared state, index n the state after segment n (and its transition),
// index N the state after the last segment before the measurement block.
void statevector_scan(const GateSequence& gates, const ProtocolSchedule& s,
                      std::span<const double> fields, double t,
                      const std::function<void(std::size_t, const StateVector&)>& on_boundary);

// Fisher matrix from the time-evolved generators, exact for this gate set:
// CNOT/X blocks are basis permutations, so the diagonal generators conjugate
// to diagonals and only the two branch indices matter.
Matrix qfim_generator_sum(const ProtocolSchedule& s, double t);

// Central-difference Fisher matrix from statevector derivatives; the
// theta-dependent oracle for the two closed-form routes.
Matrix qfim_finite_difference(const GateSequence& gates, const ProtocolSchedule& s,
                              std::span<const double> fields, double t, double step = 1e-4);

struct SaturabilityReport {
    std::vector<double> row_residuals;
    std::vector<double> lambda;  // weights over the max set, sums to 1
    bool passed = false;
    double tolerance = 0.0;  // absolute residual bound actually applied (tol * t^2)
};

// Row condition on the Fisher matrix. A single maximum checks the pivot row
// directly; multiple maxima search the simplex weighting that minimizes the
// worst row residual (a small minimax LP).
SaturabilityReport check_saturability(const Matrix& qfim, const FunctionCoefficients& fc, double t,
                                      double tol = 1e-8);

struct BasisTransform {
    std::vector<double> beta;  // first dual-basis column
    Matrix jacobian;           // beta in column 0
    Matrix jacobian_inverse;   // weights row first
};

BasisTransform make_basis_transform(const FunctionCoefficients& fc,
                                    std::span<const double> lambda);

struct QBasisConditions {
    Matrix f_q;
    bool f11_ok = false;
    bool offdiag_ok = false;
};

// Jacobian-conjugated Fisher matrix and the two scalar conditions it must
// meet for the single-parameter bound to be saturable.
QBasisConditions transform_to_q_basis(const Matrix& qfim, const FunctionCoefficients& fc,
                                      std::span<const double> lambda, double t,
                                      double tol = 1e-8);

// Two computational-basis amplitudes of modulus 1/sqrt(2) and zero z
// expectation on every max-set qubit.
bool probe_form_ok(const StateVector& state, const FunctionCoefficients& fc, double tol = 1e-9);

// Evaluates probe_form_ok at the requested segment boundaries (see
// statevector_scan for the boundary indexing).
bool check_probe_form(const GateSequence& gates, const ProtocolSchedule& s,
                      std::span<const double> fields, const FunctionCoefficients& fc,
                      std::span<const std::size_t> boundaries);

// Ceiling on the pivot Fisher element for protocols that pick one family per
// run instead of switching coherently.
double probabilistic_bound(int family_count, double t);

}  // namespace qsn
