#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsn/coefficients.hpp"
#include "qsn/schedule.hpp"

namespace qsn {

enum class ColumnMode { general, non_echoed };

inline constexpr std::size_t kDefaultColumnCap = 1'000'000;

// Admissible sign columns for the feasibility system: max-set rows fixed,
// zero-weight rows zero, weight at most `entanglement_cap`; non_echoed mode
// additionally restricts every entry to the target sign or zero.
struct ColumnSet {
    std::vector<StateFamily> columns;
    ColumnMode mode = ColumnMode::general;
    int entanglement_cap = 0;
};

// Number of admissible columns without materializing them (saturates at a
// value above any practical cap).
std::size_t count_admissible_columns(const FunctionCoefficients& fc, int entanglement_cap,
                                     ColumnMode mode);

// Throws TooLargeError when the column count exceeds `cap`. Enumeration order
// is lexicographic over free indices with per-index value order +s, -s, 0
// (general) or +s, 0 (non_echoed), s being the target sign.
ColumnSet enumerate_families(const FunctionCoefficients& fc, int entanglement_cap, ColumnMode mode,
                             std::size_t cap = kDefaultColumnCap);

struct ScheduleSolution {
    std::optional<ProtocolSchedule> schedule;  // empty => infeasible
    double infeasibility = 0.0;                // phase-1 objective when infeasible
    std::vector<double> vertex;                // raw fractions per column (zeros kept)
};

// Basic feasible solution of  columns . p = normalized,  p >= 0.  With an
// objective, a vertex minimizing it. Residual of any returned schedule is
// below 1e-9.
ScheduleSolution solve_schedule(const ColumnSet& cs, const FunctionCoefficients& fc,
                                const std::vector<double>* objective = nullptr);

// Vertex reached by minimizing a seeded uniform-random objective; at most d
// families, deterministic per seed. Throws InfeasibleError when the cap is
// below the feasibility threshold.
ProtocolSchedule random_vertex_schedule(const FunctionCoefficients& fc, int entanglement_cap,
                                        ColumnMode mode, std::uint64_t seed);

// Separating vector for infeasible instances: column . y >= 0 for every
// admissible column and normalized . y = -1. Empty when the system is
// feasible.
struct FarkasCertificate {
    std::vector<double> y;
};

std::optional<FarkasCertificate> farkas_certificate(const FunctionCoefficients& fc,
                                                    int entanglement_cap,
                                                    ColumnMode mode = ColumnMode::general);

// Admissible column minimizing column . y: max-set rows fixed, then the
// (cap - |max_set|) eligible indices with largest |y_j| get -sgn(y_j)
// (non_echoed: the target sign, and only where that lowers the dot product).
// Ties break to the smallest index.
StateFamily pricing_oracle(std::span<const double> y, int entanglement_cap, ColumnMode mode,
                           const FunctionCoefficients& fc);

struct DesignOptions {
    bool non_echoed = true;
    std::optional<int> entanglement_cap;       // defaults to fc.min_entanglement
    const std::vector<double>* objective = nullptr;  // indexed like enumerate_families
    std::size_t column_cap = kDefaultColumnCap;
};

// End-to-end design: enumerate when the column set is small, otherwise column
// generation driven by the pricing oracle. Throws InfeasibleError (carrying a
// certificate) only when the caller forces the cap below min_entanglement.
ProtocolSchedule design_protocol(const FunctionCoefficients& fc, const DesignOptions& opts = {});

}  // namespace qsn
