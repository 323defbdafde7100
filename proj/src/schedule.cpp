#include "qsn/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "qsn/errors.hpp"

namespace qsn {

namespace {
constexpr double kScheduleTol = 1e-9;
}

ProtocolSchedule make_schedule(std::vector<StateFamily> families, std::vector<double> fractions,
                               double total_time, const FunctionCoefficients* fc) {
    if (families.size() != fractions.size())
        throw DimensionMismatchError("family and fraction counts differ");
    if (total_time <= 0.0) throw std::invalid_argument("total_time must be positive");

    if (families.empty()) throw std::invalid_argument("schedule has no families");
    const std::size_t dim = families.front().dim();
    for (const auto& family : families)
        if (!family.dim() || family.dim() != dim)
            throw DimensionMismatchError("families must share one dimension");

    ProtocolSchedule s;
    s.total_time = total_time;
    double sum = 0.0;
    for (std::size_t n = 0; n < families.size(); ++n) {
        if (fractions[n] < -kScheduleTol)
            throw std::invalid_argument("negative time fraction");
        if (fractions[n] <= 0.0) continue;  // zero-fraction families are dropped
        s.families.push_back(std::move(families[n]));
        s.fractions.push_back(fractions[n]);
        sum += fractions[n];
    }
    if (s.families.empty()) throw std::invalid_argument("schedule has no used families");
    if (std::abs(sum - 1.0) > kScheduleTol)
        throw std::invalid_argument("time fractions sum to " + std::to_string(sum));

    if (fc) {
        if (fc->dim() != s.dim()) throw DimensionMismatchError("coefficient dimension mismatch");
        const auto c = schedule_sensitivity(s);
        double residual = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j)
            residual = std::max(residual, std::abs(c[j] - fc->normalized[j]));
        s.optimal = residual < kScheduleTol;
        s.non_echoed = is_non_echoed(s, *fc);
    }
    return s;
}

std::vector<double> schedule_sensitivity(const ProtocolSchedule& s) {
    std::vector<double> c(s.dim(), 0.0);
    for (std::size_t n = 0; n < s.size(); ++n)
        for (std::size_t j = 0; j < c.size(); ++j)
            c[j] += s.fractions[n] * s.families[n].signs[j];
    return c;
}

double average_entanglement(const ProtocolSchedule& s) {
    double avg = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) avg += s.fractions[n] * s.families[n].weight();
    return avg;
}

bool is_non_echoed(const ProtocolSchedule& s, const FunctionCoefficients& fc) {
    if (fc.dim() != s.dim()) throw DimensionMismatchError("coefficient dimension mismatch");
    for (const auto& family : s.families)
        for (std::size_t j = 0; j < family.signs.size(); ++j)
            if (family.signs[j] != 0 && family.signs[j] != fc.target_sign(j)) return false;
    return true;
}

double branch_phase(const ProtocolSchedule& s, std::span<const double> fields, double t) {
    if (fields.size() != s.dim()) throw DimensionMismatchError("field vector dimension mismatch");
    const auto c = schedule_sensitivity(s);
    double phase = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) phase += c[j] * fields[j];
    return phase * t;
}

Matrix analytic_qfim(const ProtocolSchedule& s, double t) {
    const auto c = schedule_sensitivity(s);
    const std::size_t d = c.size();
    Matrix f(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) f(i, j) = t * t * c[i] * c[j];
    return f;
}

}  // namespace qsn
