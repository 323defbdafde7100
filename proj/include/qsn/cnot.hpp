#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsn/coefficients.hpp"
#include "qsn/gates.hpp"
#include "qsn/schedule.hpp"

namespace qsn {

struct CostBreakdown {
    int prep = 0;
    int intermediate = 0;
    int measurement = 0;
    int total = 0;
};

// CNOTs needed to morph one family into the next: qubits whose support
// membership changes. Sign flips inside the common support are free (single-
// qubit gates only).
int transition_cost(const StateFamily& a, const StateFamily& b);

CostBreakdown protocol_cost(const ProtocolSchedule& s, bool include_prep = true,
                            bool include_meas = true);

enum class OrderingMethod { brute, held_karp };

// Reorders families to minimize the summed transition cost (an open-path
// search under the support-difference metric). Preserves the (family,
// fraction) multiset. brute handles up to 10 families, held_karp up to 20;
// the two agree, including tie-breaks (lexicographically smallest optimal
// ordering).
ProtocolSchedule optimal_ordering(const ProtocolSchedule& s, OrderingMethod method);

struct GreedyStep {
    std::vector<std::size_t> active;  // entangled qubits during this step
    double elapsed;                   // cumulative time fraction after the step
};

struct GreedyTrace {
    std::vector<GreedyStep> steps;
    std::vector<double> residual;  // unmet per-qubit requirement at termination
};

struct GreedyResult {
    std::optional<ProtocolSchedule> schedule;  // empty when the greedy fails
    GreedyTrace trace;

    bool failed() const { return !schedule.has_value(); }
};

// Builds sensitivity smallest-requirement-first with at most min_entanglement
// qubits active at once; each qubit is disentangled exactly once. Fails (with
// residuals) when the pivot requirement runs out before the others are met.
GreedyResult greedy_protocol(const FunctionCoefficients& fc);

// Nested-support ladder: start fully entangled on the nonzero-weight qubits,
// drop the smallest-|weight| qubit as its requirement completes. Linear
// intermediate CNOT cost, non-echoed.
ProtocolSchedule disentangling_protocol(const FunctionCoefficients& fc);

// Full-weight families that differ only by sign flips, so transitions use no
// CNOTs at all.
ProtocolSchedule echoing_protocol(const FunctionCoefficients& fc);

// Explicit CNOT/X realization of a schedule. The anchor is the smallest qubit
// carrying sign +1 in every family; throws PivotNotInSupportError when no
// such qubit exists. Block CNOT counts match protocol_cost exactly.
GateSequence compile_gates(const ProtocolSchedule& s);

struct BenchmarkRow {
    int sensors = 0;
    int instance = 0;
    std::uint64_t seed = 0;
    std::string method;       // "random" or "greedy"
    int cnot_intermediate = 0;
    int cnot_total = 0;
    bool failed = false;
};

// Random positive-coefficient instances per sensor count; rows for the
// random-vertex-plus-optimal-ordering method and the greedy construction.
// Per-instance seeds derive as seed ^ (d * 2^40 + instance).
std::vector<BenchmarkRow> cnot_benchmark(int d_min, int d_max, int instances, std::uint64_t seed,
                                         int threads = 1);

// Log-log slope of mean intermediate cost against sensor count for one
// method, skipping failed rows.
double benchmark_cost_exponent(const std::vector<BenchmarkRow>& rows, const std::string& method);

}  // namespace qsn
