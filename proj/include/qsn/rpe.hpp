#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsn/coefficients.hpp"
#include "qsn/rng.hpp"
#include "qsn/schedule.hpp"

namespace qsn {

// Stage plan for robust phase estimation. Stage j (1-based) evolves for
// multiplier 2^{j-1} times the base time and is measured 2*repetitions[j-1]
// times (half along x, half along y).
struct RpeConfig {
    int stages = 0;
    std::vector<int> repetitions;
    double base_time = 0.0;    // delta t
    double prior_width = 0.0;  // width of the q interval mapped onto [0, 2pi)
    double offset = 0.0;       // affine shift applied to q before phase mapping

    std::vector<std::int64_t> multipliers() const;
    double total_time() const;  // 2 * base_time * sum(rep_j * 2^{j-1})
};

// base_time = 2*pi*inf_norm/prior_width so the prior fills one phase turn;
// repetitions default to 2 + 3*(stages - j).
RpeConfig default_rpe_config(int stages, double prior_width, const FunctionCoefficients& fc);

struct StageProbabilities {
    double x_zero;  // (1 + cos(M*phase)) / 2
    double y_zero;  // (1 + sin(M*phase)) / 2
};

StageProbabilities stage_probabilities(double phase, std::int64_t multiplier);

// Slow route for end-to-end integration checks: compiles and evolves the
// schedule for the stage's duration (fields chosen so weights . fields equals
// the true value) and reads the measurement statistics off the final state.
// Dense simulation, so the schedule caps at 14 qubits.
StageProbabilities stage_probabilities_from_state(const ProtocolSchedule& s,
                                                  const FunctionCoefficients& fc,
                                                  double true_value, std::int64_t multiplier,
                                                  double base_time);

// Empirical stage estimate in [0, 2pi): two-argument arctangent of the
// centered zero-outcome frequencies over `repetitions` draws per axis.
double stage_sample(double phase, std::int64_t multiplier, int repetitions, Rng& rng);

// Stage-by-stage refinement: stage j proposes multiplier_j candidates and the
// one circularly closest to the running estimate wins (ties to the smaller
// branch index).
double combine_stages(std::span<const double> stage_phases,
                      std::span<const std::int64_t> multipliers);

struct RpeResult {
    double estimate = 0.0;
    std::vector<double> stage_estimates;
    int trials = 1;
    double mse = 0.0;    // squared circular error (the prior interval wraps)
    double bound = 0.0;  // (24.26*pi)^2 * inf_norm^2 / total_time^2
};

// One full multi-stage run against exact stage statistics. Throws
// PriorViolationError when the mapped phase leaves [0, 2pi).
RpeResult rpe_run(double true_value, const FunctionCoefficients& fc, const RpeConfig& config,
                  Rng& rng);

struct MseCurvePoint {
    int stages = 0;
    double total_time = 0.0;
    int trials = 0;
    double mse = 0.0;
    double bound = 0.0;
};

struct MseCurve {
    std::vector<MseCurvePoint> points;
    double slope = 0.0;  // log-log slope of mse against total time
};

// Monte Carlo error curve over stage counts. Without a fixed true value each
// trial draws one uniformly from the prior. Deterministic per seed and
// independent of the thread count.
MseCurve mse_benchmark(std::optional<double> true_value, const FunctionCoefficients& fc,
                       std::span<const int> stage_counts, int trials, std::uint64_t seed,
                       double prior_width, int threads = 1);

}  // namespace qsn
