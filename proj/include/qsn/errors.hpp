#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsn {

// Raised by normalize() when every input coefficient is zero.
struct AllZeroError : std::invalid_argument {
    AllZeroError() : std::invalid_argument("all coefficients are zero") {}
};

struct DimensionMismatchError : std::invalid_argument {
    explicit DimensionMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// Column enumeration would exceed the configured cap.
struct TooLargeError : std::runtime_error {
    TooLargeError(std::size_t count, std::size_t cap)
        : std::runtime_error("admissible column count " + std::to_string(count) +
                             " exceeds cap " + std::to_string(cap)),
          count(count), cap(cap) {}
    std::size_t count;
    std::size_t cap;
};

struct TooManyFamiliesError : std::invalid_argument {
    explicit TooManyFamiliesError(const std::string& what) : std::invalid_argument(what) {}
};

// Dense statevector paths refuse to allocate beyond their qubit caps.
struct DimensionTooLargeError : std::invalid_argument {
    explicit DimensionTooLargeError(const std::string& what) : std::invalid_argument(what) {}
};

struct PivotNotInSupportError : std::invalid_argument {
    explicit PivotNotInSupportError(std::size_t family_index)
        : std::invalid_argument("pivot qubit missing from support of family " +
                                std::to_string(family_index)) {}
};

struct SingularJacobianError : std::runtime_error {
    SingularJacobianError() : std::runtime_error("basis transform Jacobian is singular") {}
};

struct PriorViolationError : std::invalid_argument {
    explicit PriorViolationError(const std::string& what) : std::invalid_argument(what) {}
};

// Carries the phase-1 objective (how far from feasible) and, when one was
// computed, the dual certificate of infeasibility.
struct InfeasibleError : std::runtime_error {
    InfeasibleError(double infeasibility, std::vector<double> certificate)
        : std::runtime_error("system has no nonnegative solution (phase-1 objective " +
                             std::to_string(infeasibility) + ")"),
          infeasibility(infeasibility), certificate(std::move(certificate)) {}
    double infeasibility;
    std::vector<double> certificate;
};

}  // namespace qsn
