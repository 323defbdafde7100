#include "qsn/coefficients.hpp"

#include <cmath>

#include "qsn/errors.hpp"

namespace qsn {

FunctionCoefficients normalize(const std::vector<double>& weights) {
    FunctionCoefficients fc;
    fc.weights = weights;
    fc.one_norm = 0.0;
    fc.inf_norm = 0.0;
    for (double w : weights) {
        fc.one_norm += std::abs(w);
        fc.inf_norm = std::max(fc.inf_norm, std::abs(w));
    }
    if (weights.empty() || fc.inf_norm == 0.0) throw AllZeroError();

    for (std::size_t i = 0; i < weights.size(); ++i)
        if (std::abs(weights[i]) == fc.inf_norm) fc.max_set.push_back(i);
    fc.pivot = fc.max_set.front();

    const double pivot_value = weights[fc.pivot];
    fc.normalized.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) fc.normalized[i] = weights[i] / pivot_value;

    fc.min_entanglement = minimum_entanglement_k(fc);
    return fc;
}

int minimum_entanglement_k(const FunctionCoefficients& fc) {
    const double ratio = fc.one_norm / fc.inf_norm;
    int k = static_cast<int>(std::ceil(ratio - 1e-9));
    return k < 1 ? 1 : k;
}

}  // namespace qsn
