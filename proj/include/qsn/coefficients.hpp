#pragma once

#include <cstddef>
#include <vector>

namespace qsn {

// Target of the estimation task: the known weights of the linear combination
// q = weights . fields, together with the derived quantities every other
// module keys off.
//
// `pivot` is the smallest index attaining max |weights[i]| and `max_set` holds
// all such indices. `normalized` divides by the signed pivot coefficient, so
// normalized[pivot] == +1 and |normalized[i]| <= 1 throughout.
struct FunctionCoefficients {
    std::vector<double> weights;
    std::vector<double> normalized;
    std::size_t pivot = 0;
    std::vector<std::size_t> max_set;
    double one_norm = 0.0;
    double inf_norm = 0.0;
    int min_entanglement = 0;  // smallest k with k-1 < one_norm/inf_norm <= k

    std::size_t dim() const { return weights.size(); }

    // Sign a cat-state family must carry on qubit j in {-1, 0, +1}:
    // sgn(normalized[j]). Zero-weight qubits get 0.
    int target_sign(std::size_t j) const {
        const double v = normalized[j];
        return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    }
};

// Throws AllZeroError when every entry vanishes.
FunctionCoefficients normalize(const std::vector<double>& weights);

// Unique k with k-1 < one_norm/inf_norm <= k. Integer ratios resolve to the
// ratio itself (comparison slack 1e-9 before the ceiling).
int minimum_entanglement_k(const FunctionCoefficients& fc);

}  // namespace qsn
