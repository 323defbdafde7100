#include "qsn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "qsn/errors.hpp"
#include "qsn/rng.hpp"
#include "qsn/simplex.hpp"

namespace qsn {

namespace {

constexpr double kResidualTol = 1e-9;

bool in_max_set(const FunctionCoefficients& fc, std::size_t j) {
    return std::binary_search(fc.max_set.begin(), fc.max_set.end(), j);
}

std::vector<std::size_t> free_indices(const FunctionCoefficients& fc) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < fc.dim(); ++j)
        if (!in_max_set(fc, j) && fc.weights[j] != 0.0) out.push_back(j);
    return out;
}

StateFamily base_column(const FunctionCoefficients& fc) {
    StateFamily base;
    base.signs.assign(fc.dim(), 0);
    for (std::size_t j : fc.max_set) base.signs[j] = fc.target_sign(j);
    return base;
}

Matrix columns_to_matrix(const std::vector<StateFamily>& columns, std::size_t d) {
    Matrix a(d, columns.size());
    for (std::size_t n = 0; n < columns.size(); ++n)
        for (std::size_t i = 0; i < d; ++i) a(i, n) = columns[n].signs[i];
    return a;
}

ProtocolSchedule schedule_from_vertex(const std::vector<StateFamily>& columns,
                                      const std::vector<double>& p,
                                      const FunctionCoefficients& fc) {
    std::vector<StateFamily> used;
    std::vector<double> fractions;
    for (std::size_t n = 0; n < columns.size(); ++n) {
        if (p[n] > 0.0) {
            used.push_back(columns[n]);
            fractions.push_back(p[n]);
        }
    }
    auto s = make_schedule(std::move(used), std::move(fractions), 1.0, &fc);
    const auto c = schedule_sensitivity(s);
    for (std::size_t j = 0; j < c.size(); ++j)
        if (std::abs(c[j] - fc.normalized[j]) > kResidualTol)
            throw std::runtime_error("vertex residual above tolerance");
    return s;
}

// Shift along the pivot row (always +1 in every admissible column) until the
// worst column clears zero, then rescale to normalized . y = -1.
std::vector<double> polish_certificate(std::vector<double> y, const FunctionCoefficients& fc,
                                       int cap, ColumnMode mode) {
    if (cap >= static_cast<int>(fc.max_set.size())) {
        const StateFamily worst = pricing_oracle(y, cap, mode, fc);
        double low = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) low += worst.signs[j] * y[j];
        if (low < 0.0) y[fc.pivot] -= low;
    }
    const double value = dot(fc.normalized, y);
    if (value >= 0.0) throw std::runtime_error("certificate lost separation");
    for (double& v : y) v /= -value;
    return y;
}

// No admissible column at all (cap below the max-set size): any vector that
// is negative against the target and clears the pivot row separates. Keeping
// the pivot coordinate at zero also satisfies the bare pivot-only column.
// A target supported only on the pivot needs the pivot coordinate itself,
// which is harmless because that case only arises at cap 0.
std::vector<double> off_pivot_certificate(const FunctionCoefficients& fc) {
    std::vector<double> y(fc.dim(), 0.0);
    bool separated = false;
    for (std::size_t j = 0; j < fc.dim(); ++j) {
        if (j == fc.pivot) continue;
        y[j] = -fc.normalized[j];
        separated |= y[j] != 0.0;
    }
    if (!separated) y[fc.pivot] = -1.0;
    return y;
}

struct SystemOutcome {
    std::optional<ProtocolSchedule> schedule;
    double infeasibility = 0.0;
    std::vector<double> certificate;  // unpolished dual when infeasible
    std::vector<double> vertex;
};

SystemOutcome solve_over_columns(const std::vector<StateFamily>& columns,
                                 const FunctionCoefficients& fc,
                                 const std::vector<double>* objective) {
    SystemOutcome out;
    if (columns.empty()) {
        out.infeasibility = fc.one_norm / fc.inf_norm;
        out.certificate = off_pivot_certificate(fc);
        return out;
    }
    const Matrix a = columns_to_matrix(columns, fc.dim());
    const LpResult lp = solve_lp(a, fc.normalized, objective);
    if (lp.status == LpStatus::infeasible) {
        out.infeasibility = lp.infeasibility;
        out.certificate.resize(fc.dim());
        for (std::size_t i = 0; i < fc.dim(); ++i) out.certificate[i] = -lp.dual[i];
        return out;
    }
    if (lp.status == LpStatus::unbounded) throw std::runtime_error("objective is unbounded");
    out.schedule = schedule_from_vertex(columns, lp.x, fc);
    out.vertex = lp.x;
    return out;
}

// Column generation: grow a restricted master until it is feasible or the
// pricing oracle certifies that no admissible column can cut the dual.
SystemOutcome solve_generated(const FunctionCoefficients& fc, int cap, ColumnMode mode) {
    SystemOutcome out;
    if (cap < static_cast<int>(fc.max_set.size())) {
        out.infeasibility = fc.one_norm / fc.inf_norm;
        out.certificate = off_pivot_certificate(fc);
        return out;
    }

    // Seed with the nested-support ladder truncated to the cap.
    std::vector<std::size_t> order(fc.dim());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(fc.weights[a]) > std::abs(fc.weights[b]);
    });
    std::vector<StateFamily> columns;
    std::set<std::vector<int>> seen;
    StateFamily ladder;
    ladder.signs.assign(fc.dim(), 0);
    for (int w = 0; w < cap && w < static_cast<int>(fc.dim()); ++w) {
        const std::size_t j = order[w];
        if (fc.weights[j] == 0.0) break;
        ladder.signs[j] = fc.target_sign(j);
        if (seen.insert(ladder.signs).second) columns.push_back(ladder);
    }

    for (int round = 0; round < 100000; ++round) {
        const Matrix a = columns_to_matrix(columns, fc.dim());
        const LpResult lp = solve_lp(a, fc.normalized, nullptr);
        if (lp.status == LpStatus::optimal) {
            out.schedule = schedule_from_vertex(columns, lp.x, fc);
            out.vertex = lp.x;
            return out;
        }
        // Price against the phase-1 dual: a column improves iff dual . col > 0.
        std::vector<double> neg_dual(fc.dim());
        for (std::size_t i = 0; i < fc.dim(); ++i) neg_dual[i] = -lp.dual[i];
        const StateFamily candidate = pricing_oracle(neg_dual, cap, mode, fc);
        double gain = 0.0;
        for (std::size_t i = 0; i < fc.dim(); ++i) gain += candidate.signs[i] * lp.dual[i];
        if (gain <= 1e-10) {
            out.infeasibility = lp.infeasibility;
            out.certificate = std::move(neg_dual);
            return out;
        }
        if (!seen.insert(candidate.signs).second)
            throw std::runtime_error("pricing repeated a column");
        columns.push_back(candidate);
    }
    throw std::runtime_error("column generation failed to converge");
}

SystemOutcome solve_system(const FunctionCoefficients& fc, int cap, ColumnMode mode,
                           const std::vector<double>* objective, std::size_t column_cap) {
    const std::size_t count = count_admissible_columns(fc, cap, mode);
    if (count == 0) return solve_over_columns({}, fc, nullptr);
    if (count <= column_cap) {
        const ColumnSet cs = enumerate_families(fc, cap, mode, column_cap);
        return solve_over_columns(cs.columns, fc, objective);
    }
    if (objective)
        throw TooLargeError(count_admissible_columns(fc, cap, mode), column_cap);
    return solve_generated(fc, cap, mode);
}

}  // namespace

std::size_t count_admissible_columns(const FunctionCoefficients& fc, int entanglement_cap,
                                     ColumnMode mode) {
    const int fixed = static_cast<int>(fc.max_set.size());
    if (entanglement_cap < fixed) return 0;
    const std::size_t free_count = free_indices(fc).size();
    const int slots = std::min<int>(entanglement_cap - fixed, static_cast<int>(free_count));
    const double per_pick = mode == ColumnMode::general ? 2.0 : 1.0;
    double total = 0.0, choose = 1.0, scale = 1.0;
    for (int w = 0; w <= slots; ++w) {
        total += choose * scale;
        if (total > 4e18) return static_cast<std::size_t>(-1);
        choose *= static_cast<double>(free_count - w) / (w + 1);
        scale *= per_pick;
    }
    return static_cast<std::size_t>(total);
}

ColumnSet enumerate_families(const FunctionCoefficients& fc, int entanglement_cap, ColumnMode mode,
                             std::size_t cap) {
    if (entanglement_cap < 1 || entanglement_cap > static_cast<int>(fc.dim()))
        throw std::invalid_argument("entanglement cap out of range");
    const std::size_t count = count_admissible_columns(fc, entanglement_cap, mode);
    if (count > cap) throw TooLargeError(count, cap);

    ColumnSet cs;
    cs.mode = mode;
    cs.entanglement_cap = entanglement_cap;
    const auto free = free_indices(fc);
    const int slots = entanglement_cap - static_cast<int>(fc.max_set.size());
    if (slots < 0) return cs;

    StateFamily current = base_column(fc);
    cs.columns.reserve(count);
    // Depth-first over free indices. General mode walks +1, -1, 0 per index;
    // non_echoed walks target sign then 0. Keeps the layout lexicographic and
    // reproducible.
    auto emit = [&](auto&& self, std::size_t at, int used) -> void {
        if (at == free.size()) {
            cs.columns.push_back(current);
            return;
        }
        const std::size_t j = free[at];
        if (used < slots) {
            if (mode == ColumnMode::general) {
                current.signs[j] = 1;
                self(self, at + 1, used + 1);
                current.signs[j] = -1;
                self(self, at + 1, used + 1);
            } else {
                current.signs[j] = fc.target_sign(j);
                self(self, at + 1, used + 1);
            }
            current.signs[j] = 0;
        }
        self(self, at + 1, used);
    };
    emit(emit, 0, 0);
    return cs;
}

ScheduleSolution solve_schedule(const ColumnSet& cs, const FunctionCoefficients& fc,
                                const std::vector<double>* objective) {
    if (cs.columns.empty()) throw std::invalid_argument("column set is empty");
    if (objective && objective->size() != cs.columns.size())
        throw DimensionMismatchError("objective length differs from column count");
    SystemOutcome out = solve_over_columns(cs.columns, fc, objective);
    ScheduleSolution sol;
    sol.schedule = std::move(out.schedule);
    sol.infeasibility = out.infeasibility;
    sol.vertex = std::move(out.vertex);
    return sol;
}

ProtocolSchedule random_vertex_schedule(const FunctionCoefficients& fc, int entanglement_cap,
                                        ColumnMode mode, std::uint64_t seed) {
    const ColumnSet cs = enumerate_families(fc, entanglement_cap, mode);
    Rng rng = Rng::stream(seed, 0);
    std::vector<double> objective(cs.columns.size());
    for (double& v : objective) v = rng.next_double();
    ScheduleSolution sol = solve_schedule(cs, fc, &objective);
    if (!sol.schedule) {
        auto cert = farkas_certificate(fc, entanglement_cap, mode);
        throw InfeasibleError(sol.infeasibility, cert ? cert->y : std::vector<double>{});
    }
    return *sol.schedule;
}

std::optional<FarkasCertificate> farkas_certificate(const FunctionCoefficients& fc,
                                                    int entanglement_cap, ColumnMode mode) {
    if (entanglement_cap < 0) throw std::invalid_argument("entanglement cap must be nonnegative");
    SystemOutcome out = solve_system(fc, entanglement_cap, mode, nullptr, kDefaultColumnCap);
    if (out.schedule) return std::nullopt;
    FarkasCertificate cert;
    cert.y = polish_certificate(std::move(out.certificate), fc, entanglement_cap, mode);
    return cert;
}

StateFamily pricing_oracle(std::span<const double> y, int entanglement_cap, ColumnMode mode,
                           const FunctionCoefficients& fc) {
    if (y.size() != fc.dim()) throw DimensionMismatchError("dual vector dimension mismatch");
    StateFamily column = base_column(fc);
    const int slots = entanglement_cap - static_cast<int>(fc.max_set.size());
    if (slots <= 0) return column;

    std::vector<std::size_t> eligible;
    for (std::size_t j : free_indices(fc)) {
        if (mode == ColumnMode::non_echoed && fc.target_sign(j) * y[j] >= 0.0) continue;
        eligible.push_back(j);
    }
    std::stable_sort(eligible.begin(), eligible.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(y[a]) > std::abs(y[b]); });
    const std::size_t take = std::min<std::size_t>(slots, eligible.size());
    for (std::size_t r = 0; r < take; ++r) {
        const std::size_t j = eligible[r];
        if (mode == ColumnMode::non_echoed)
            column.signs[j] = fc.target_sign(j);
        else
            column.signs[j] = y[j] > 0.0 ? -1 : (y[j] < 0.0 ? 1 : 0);
    }
    return column;
}

ProtocolSchedule design_protocol(const FunctionCoefficients& fc, const DesignOptions& opts) {
    const int cap = opts.entanglement_cap.value_or(fc.min_entanglement);
    if (cap < 1) throw std::invalid_argument("entanglement cap must be positive");
    const ColumnMode mode = opts.non_echoed ? ColumnMode::non_echoed : ColumnMode::general;
    SystemOutcome out = solve_system(fc, cap, mode, opts.objective, opts.column_cap);
    if (!out.schedule) {
        auto y = polish_certificate(std::move(out.certificate), fc, cap, mode);
        throw InfeasibleError(out.infeasibility, std::move(y));
    }
    return *std::move(out.schedule);
}

}  // namespace qsn
