#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsn/coefficients.hpp"
#include "qsn/linalg.hpp"

namespace qsn {

// One family of two-branch (cat-like) probe states, labeled by the sign each
// qubit contributes to the relative phase: +1, -1, or 0 when the qubit sits
// disentangled in |0>.
struct StateFamily {
    std::vector<int> signs;

    std::size_t dim() const { return signs.size(); }

    int weight() const {
        int w = 0;
        for (int s : signs) w += (s != 0);
        return w;
    }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < signs.size(); ++j)
            if (signs[j] != 0) out.push_back(j);
        return out;
    }

    bool operator==(const StateFamily&) const = default;
};

// Ordered plan: run family n for fraction `fractions[n]` of the total time.
// Zero fractions are dropped at construction, fractions sum to 1 within 1e-9.
struct ProtocolSchedule {
    std::vector<StateFamily> families;
    std::vector<double> fractions;
    double total_time = 1.0;
    bool optimal = false;
    bool non_echoed = false;

    std::size_t dim() const { return families.empty() ? 0 : families.front().dim(); }
    std::size_t size() const { return families.size(); }
};

// Validating constructor: drops zero entries, rejects negative fractions and
// sums away from 1, and fills the optimality/non-echo flags when the target
// coefficients are supplied.
ProtocolSchedule make_schedule(std::vector<StateFamily> families, std::vector<double> fractions,
                               double total_time = 1.0, const FunctionCoefficients* fc = nullptr);

// Per-qubit accumulated sensitivity sum_n fractions[n] * signs^(n).
std::vector<double> schedule_sensitivity(const ProtocolSchedule& s);

// Time-weighted mean family weight.
double average_entanglement(const ProtocolSchedule& s);

// True when every used family's signs agree with the normalized target signs
// (no spin echo anywhere).
bool is_non_echoed(const ProtocolSchedule& s, const FunctionCoefficients& fc);

// Relative phase accumulated between the two branches after time t under
// field values `fields`.
double branch_phase(const ProtocolSchedule& s, std::span<const double> fields, double t);

// Closed-form Fisher information matrix t^2 * c c^T with c the schedule
// sensitivity; rank <= 1 by construction.
Matrix analytic_qfim(const ProtocolSchedule& s, double t);

}  // namespace qsn
