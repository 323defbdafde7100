#include "qsn/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsn {

Partition optimal_partition(const FunctionCoefficients& fc, int entanglement_cap) {
    if (entanglement_cap < 1) throw std::invalid_argument("entanglement cap must be positive");

    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < fc.dim(); ++j)
        if (fc.weights[j] != 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(fc.weights[a]) > std::abs(fc.weights[b]);
    });
    const std::size_t m = order.size();
    std::vector<double> mag(m);
    for (std::size_t r = 0; r < m; ++r) mag[r] = std::abs(fc.weights[order[r]]);

    // best[j] = least cost covering the first j sorted sensors; a block
    // [i..j) is allowed while its magnitude sum stays within cap * mag[i].
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(m + 1, inf);
    std::vector<std::size_t> cut(m + 1, 0);
    best[0] = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        double block_sum = 0.0;
        // Feasibility is not monotone while extending a block toward larger
        // magnitudes (the bound grows with the block maximum), so scan all i.
        for (std::size_t i = j; i-- > 0;) {
            block_sum += mag[i];
            if (block_sum > entanglement_cap * mag[i] + 1e-12) continue;
            const double cost = best[i] + mag[i] * mag[i];
            if (cost < best[j]) {
                best[j] = cost;
                cut[j] = i;
            }
        }
    }

    Partition p;
    p.variance_times_t2 = m == 0 ? 0.0 : best[m];
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t j = m; j > 0; j = cut[j]) spans.emplace_back(cut[j], j);
    std::reverse(spans.begin(), spans.end());
    for (const auto& [lo, hi] : spans) {
        std::vector<std::size_t> block;
        for (std::size_t r = lo; r < hi; ++r) block.push_back(order[r]);
        p.blocks.push_back(std::move(block));
    }
    for (std::size_t j = 0; j < fc.dim(); ++j)
        if (fc.weights[j] == 0.0) p.blocks.push_back({j});
    return p;
}

double partition_variance(const Partition& p, const FunctionCoefficients& fc, double t) {
    if (t <= 0.0) throw std::invalid_argument("time must be positive");
    double sum = 0.0;
    for (const auto& block : p.blocks) {
        double peak = 0.0;
        for (std::size_t j : block) peak = std::max(peak, std::abs(fc.weights[j]));
        sum += peak * peak;
    }
    return sum / (t * t);
}

}  // namespace qsn
