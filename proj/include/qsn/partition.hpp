#pragma once

#include <cstddef>
#include <vector>

#include "qsn/coefficients.hpp"

namespace qsn {

// Grouping of sensors into independently-estimated blocks, contiguous in the
// magnitude-descending order. Every block satisfies the entanglement cap
// condition sum |w| / max |w| <= cap, so each sub-problem is solvable with
// cap-partite states.
struct Partition {
    std::vector<std::vector<std::size_t>> blocks;  // original indices
    double variance_times_t2 = 0.0;                // sum of per-block max |w|^2
};

// Dynamic program over the sorted order minimizing the summed squared block
// maxima. Zero-weight sensors land in a free singleton tail.
Partition optimal_partition(const FunctionCoefficients& fc, int entanglement_cap);

// (1/t^2) * sum over blocks of the squared largest magnitude.
double partition_variance(const Partition& p, const FunctionCoefficients& fc, double t);

}  // namespace qsn
