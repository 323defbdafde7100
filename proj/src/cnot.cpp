#include "qsn/cnot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "qsn/errors.hpp"
#include "qsn/rng.hpp"
#include "qsn/solver.hpp"

namespace qsn {

namespace {

constexpr double kZeroTol = 1e-12;

// Nonzero-weight indices sorted by magnitude descending, ties to the
// smaller index.
std::vector<std::size_t> descending_support(const FunctionCoefficients& fc) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < fc.dim(); ++j)
        if (fc.weights[j] != 0.0) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(fc.weights[a]) > std::abs(fc.weights[b]);
    });
    return idx;
}

std::vector<std::vector<int>> cost_matrix(const ProtocolSchedule& s) {
    const std::size_t n = s.size();
    std::vector<std::vector<int>> c(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            c[i][j] = c[j][i] = transition_cost(s.families[i], s.families[j]);
    return c;
}

ProtocolSchedule apply_order(const ProtocolSchedule& s, const std::vector<std::size_t>& order) {
    ProtocolSchedule out = s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.families[i] = s.families[order[i]];
        out.fractions[i] = s.fractions[order[i]];
    }
    return out;
}

std::vector<std::size_t> brute_order(const std::vector<std::vector<int>>& c) {
    const std::size_t n = c.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    long best_cost = std::numeric_limits<long>::max();
    do {
        long cost = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            cost += c[perm[i]][perm[i + 1]];
            if (cost >= best_cost) break;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Held-Karp over path suffixes: h[S][j] = cheapest path that starts at j and
// visits exactly the members of S. Reconstruction picks the smallest vertex
// at every step, which reproduces the brute-force lexicographic tie-break.
std::vector<std::size_t> held_karp_order(const std::vector<std::vector<int>>& c) {
    const std::size_t n = c.size();
    const std::size_t full = (std::size_t{1} << n) - 1;
    const int inf = std::numeric_limits<int>::max() / 4;
    std::vector<std::vector<int>> h(full + 1, std::vector<int>(n, inf));
    for (std::size_t j = 0; j < n; ++j) h[std::size_t{1} << j][j] = 0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            const std::size_t rest = mask ^ (std::size_t{1} << j);
            if (!rest) continue;
            int best = inf;
            for (std::size_t m = 0; m < n; ++m)
                if (rest & (std::size_t{1} << m)) best = std::min(best, c[j][m] + h[rest][m]);
            h[mask][j] = best;
        }
    }
    std::size_t start = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (h[full][j] < h[full][start]) start = j;

    std::vector<std::size_t> order{start};
    std::size_t mask = full, cur = start;
    while (order.size() < n) {
        const std::size_t rest = mask ^ (std::size_t{1} << cur);
        for (std::size_t m = 0; m < n; ++m) {
            if (!(rest & (std::size_t{1} << m))) continue;
            if (c[cur][m] + h[rest][m] == h[mask][cur]) {
                order.push_back(m);
                mask = rest;
                cur = m;
                break;
            }
        }
    }
    return order;
}

}  // namespace

int transition_cost(const StateFamily& a, const StateFamily& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("family dimension mismatch");
    int cost = 0;
    for (std::size_t j = 0; j < a.dim(); ++j) cost += ((a.signs[j] != 0) != (b.signs[j] != 0));
    return cost;
}

CostBreakdown protocol_cost(const ProtocolSchedule& s, bool include_prep, bool include_meas) {
    CostBreakdown out;
    if (include_prep) out.prep = s.families.front().weight() - 1;
    if (include_meas) out.measurement = s.families.back().weight() - 1;
    for (std::size_t n = 0; n + 1 < s.size(); ++n)
        out.intermediate += transition_cost(s.families[n], s.families[n + 1]);
    out.total = out.prep + out.intermediate + out.measurement;
    return out;
}

ProtocolSchedule optimal_ordering(const ProtocolSchedule& s, OrderingMethod method) {
    const std::size_t n = s.size();
    if (n <= 1) return s;
    if (method == OrderingMethod::brute && n > 10)
        throw TooManyFamiliesError("brute ordering supports at most 10 families");
    if (method == OrderingMethod::held_karp && n > 20)
        throw TooManyFamiliesError("held_karp ordering supports at most 20 families");
    const auto c = cost_matrix(s);
    const auto order = method == OrderingMethod::brute ? brute_order(c) : held_karp_order(c);
    return apply_order(s, order);
}

GreedyResult greedy_protocol(const FunctionCoefficients& fc) {
    const std::size_t d = fc.dim();
    const int cap = fc.min_entanglement;

    std::vector<double> remaining(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) remaining[j] = std::abs(fc.normalized[j]);

    // Qubits outside the max set queue up smallest requirement first.
    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < d; ++j)
        if (!std::binary_search(fc.max_set.begin(), fc.max_set.end(), j) && fc.weights[j] != 0.0)
            pending.push_back(j);
    std::stable_sort(pending.begin(), pending.end(),
                     [&](std::size_t a, std::size_t b) { return remaining[a] < remaining[b]; });
    std::size_t next_pending = 0;

    std::vector<std::size_t> active(fc.max_set);
    while (static_cast<int>(active.size()) < cap && next_pending < pending.size())
        active.push_back(pending[next_pending++]);
    std::sort(active.begin(), active.end());

    GreedyResult result;
    std::vector<StateFamily> families;
    std::vector<double> fractions;
    double elapsed = 0.0;

    while (true) {
        double step = std::numeric_limits<double>::infinity();
        for (std::size_t j : active) step = std::min(step, remaining[j]);
        if (step > kZeroTol) {
            StateFamily fam;
            fam.signs.assign(d, 0);
            for (std::size_t j : active) fam.signs[j] = fc.target_sign(j);
            families.push_back(std::move(fam));
            fractions.push_back(step);
            for (std::size_t j : active) remaining[j] -= step;
            elapsed += step;
            result.trace.steps.push_back({active, elapsed});
        }
        if (remaining[fc.pivot] <= kZeroTol) break;

        std::vector<std::size_t> still;
        for (std::size_t j : active)
            if (remaining[j] > kZeroTol ||
                std::binary_search(fc.max_set.begin(), fc.max_set.end(), j))
                still.push_back(j);
        active = std::move(still);
        while (static_cast<int>(active.size()) < cap && next_pending < pending.size())
            active.push_back(pending[next_pending++]);
        std::sort(active.begin(), active.end());
    }

    result.trace.residual.assign(d, 0.0);
    bool ok = true;
    for (std::size_t j = 0; j < d; ++j) {
        result.trace.residual[j] = std::max(remaining[j], 0.0);
        if (result.trace.residual[j] > 1e-9) ok = false;
    }
    if (ok) {
        // Absorb termination round-off into the last fraction.
        const double drift = 1.0 - elapsed;
        fractions.back() += drift;
        result.schedule = make_schedule(std::move(families), std::move(fractions), 1.0, &fc);
    }
    return result;
}

ProtocolSchedule disentangling_protocol(const FunctionCoefficients& fc) {
    const auto idx = descending_support(fc);
    const std::size_t m = idx.size();
    std::vector<StateFamily> families;
    std::vector<double> fractions;
    for (std::size_t n = 0; n < m; ++n) {
        StateFamily fam;
        fam.signs.assign(fc.dim(), 0);
        for (std::size_t r = 0; r + n < m; ++r) fam.signs[idx[r]] = fc.target_sign(idx[r]);
        const double hi = std::abs(fc.normalized[idx[m - n - 1]]);
        const double lo = n == 0 ? 0.0 : std::abs(fc.normalized[idx[m - n]]);
        families.push_back(std::move(fam));
        fractions.push_back(hi - lo);
    }
    return make_schedule(std::move(families), std::move(fractions), 1.0, &fc);
}

ProtocolSchedule echoing_protocol(const FunctionCoefficients& fc) {
    const auto idx = descending_support(fc);
    const std::size_t m = idx.size();
    std::vector<StateFamily> families;
    std::vector<double> fractions;
    for (std::size_t n = 0; n < m; ++n) {
        StateFamily fam;
        fam.signs.assign(fc.dim(), 0);
        // Flip the n smallest-weight qubits relative to the target signs.
        for (std::size_t r = 0; r < m; ++r) {
            const int s = fc.target_sign(idx[r]);
            fam.signs[idx[r]] = (r + n >= m) ? -s : s;
        }
        families.push_back(std::move(fam));
        if (n == 0) {
            fractions.push_back((1.0 + std::abs(fc.normalized[idx[m - 1]])) / 2.0);
        } else {
            const double hi = std::abs(fc.normalized[idx[m - n - 1]]);
            const double lo = std::abs(fc.normalized[idx[m - n]]);
            fractions.push_back((hi - lo) / 2.0);
        }
    }
    return make_schedule(std::move(families), std::move(fractions), 1.0, &fc);
}

GateSequence compile_gates(const ProtocolSchedule& s) {
    const std::size_t d = s.dim();
    std::size_t anchor = d;
    for (std::size_t j = 0; j < d && anchor == d; ++j) {
        bool always_plus = true;
        for (const auto& fam : s.families) always_plus &= (fam.signs[j] == 1);
        if (always_plus) anchor = j;
    }
    if (anchor == d) throw PivotNotInSupportError(0);

    GateSequence seq;
    seq.qubits = d;
    seq.anchor = anchor;

    const auto& first = s.families.front();
    for (std::size_t j = 0; j < d; ++j)
        if (j != anchor && first.signs[j] != 0) seq.prep.push_back(make_cnot(anchor, j));
    for (std::size_t j = 0; j < d; ++j)
        if (first.signs[j] == -1) seq.prep.push_back(make_x(j));

    for (std::size_t n = 0; n + 1 < s.size(); ++n) {
        const auto& a = s.families[n];
        const auto& b = s.families[n + 1];
        std::vector<Gate> block;
        for (std::size_t j = 0; j < d; ++j) {
            if (a.signs[j] != 0 && b.signs[j] == 0) {
                if (a.signs[j] == -1) block.push_back(make_x(j));
                block.push_back(make_cnot(anchor, j));
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (a.signs[j] == 0 && b.signs[j] != 0) {
                block.push_back(make_cnot(anchor, j));
                if (b.signs[j] == -1) block.push_back(make_x(j));
            }
        }
        for (std::size_t j = 0; j < d; ++j)
            if (a.signs[j] != 0 && b.signs[j] != 0 && a.signs[j] != b.signs[j])
                block.push_back(make_x(j));
        seq.transitions.push_back(std::move(block));
    }

    const auto& last = s.families.back();
    for (std::size_t j = 0; j < d; ++j) {
        if (j == anchor || last.signs[j] == 0) continue;
        if (last.signs[j] == -1) seq.measurement.push_back(make_x(j));
        seq.measurement.push_back(make_cnot(anchor, j));
    }
    return seq;
}

std::vector<BenchmarkRow> cnot_benchmark(int d_min, int d_max, int instances, std::uint64_t seed,
                                         int threads) {
    if (d_min < 3 || d_max < d_min) throw std::invalid_argument("bad sensor-count range");
    if (instances < 1) throw std::invalid_argument("instances must be positive");

    struct Task {
        int sensors;
        int instance;
    };
    std::vector<Task> tasks;
    for (int d = d_min; d <= d_max; ++d)
        for (int i = 0; i < instances; ++i) tasks.push_back({d, i});

    std::vector<BenchmarkRow> rows(tasks.size() * 2);
    auto run_task = [&](std::size_t t) {
        const auto [d, inst] = tasks[t];
        const std::uint64_t inst_seed =
            seed ^ (static_cast<std::uint64_t>(d) * (std::uint64_t{1} << 40) +
                    static_cast<std::uint64_t>(inst));
        Rng rng = Rng::stream(inst_seed, 0);
        std::vector<double> weights(d);
        weights[0] = 1.0;
        for (int j = 1; j < d; ++j) {
            double u = rng.next_double();
            if (u == 0.0) u = 0.5;
            weights[j] = u;
        }
        const FunctionCoefficients fc = normalize(weights);

        BenchmarkRow random_row{d, inst, inst_seed, "random", 0, 0, false};
        ProtocolSchedule vertex =
            random_vertex_schedule(fc, fc.min_entanglement, ColumnMode::non_echoed, inst_seed);
        vertex = optimal_ordering(vertex, vertex.size() <= 10 ? OrderingMethod::brute
                                                              : OrderingMethod::held_karp);
        const CostBreakdown vc = protocol_cost(vertex);
        random_row.cnot_intermediate = vc.intermediate;
        random_row.cnot_total = vc.total;

        BenchmarkRow greedy_row{d, inst, inst_seed, "greedy", 0, 0, false};
        const GreedyResult greedy = greedy_protocol(fc);
        if (greedy.failed()) {
            greedy_row.failed = true;
        } else {
            const CostBreakdown gc = protocol_cost(*greedy.schedule);
            greedy_row.cnot_intermediate = gc.intermediate;
            greedy_row.cnot_total = gc.total;
        }
        rows[2 * t] = std::move(random_row);
        rows[2 * t + 1] = std::move(greedy_row);
    };

    threads = std::max(1, threads);
    if (threads == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        std::size_t chunk = (tasks.size() + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(tasks.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi, w] {
                try {
                    for (std::size_t t = lo; t < hi; ++t) run_task(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return rows;
}

double benchmark_cost_exponent(const std::vector<BenchmarkRow>& rows, const std::string& method) {
    std::vector<double> log_d, log_cost;
    int current = -1;
    double sum = 0.0;
    int count = 0;
    auto flush = [&] {
        if (count > 0 && sum > 0.0) {
            log_d.push_back(std::log(static_cast<double>(current)));
            log_cost.push_back(std::log(sum / count));
        }
    };
    for (const auto& row : rows) {
        if (row.method != method || row.failed) continue;
        if (row.sensors != current) {
            flush();
            current = row.sensors;
            sum = 0.0;
            count = 0;
        }
        sum += row.cnot_intermediate;
        ++count;
    }
    flush();
    if (log_d.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_slope(log_d, log_cost);
}

}  // namespace qsn
