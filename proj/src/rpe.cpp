#include "qsn/rpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "qsn/cnot.hpp"
#include "qsn/errors.hpp"
#include "qsn/linalg.hpp"
#include "qsn/verify.hpp"

namespace qsn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundConstant = 24.26 * std::numbers::pi;

double circular_distance(double a, double b) {
    const double r = std::abs(std::fmod(a - b, kTwoPi));
    return std::min(r, kTwoPi - r);
}

}  // namespace

std::vector<std::int64_t> RpeConfig::multipliers() const {
    std::vector<std::int64_t> m(stages);
    for (int j = 0; j < stages; ++j) m[j] = std::int64_t{1} << j;
    return m;
}

double RpeConfig::total_time() const {
    double sum = 0.0;
    for (int j = 0; j < stages; ++j)
        sum += static_cast<double>(repetitions[j]) * static_cast<double>(std::int64_t{1} << j);
    return 2.0 * base_time * sum;
}

RpeConfig default_rpe_config(int stages, double prior_width, const FunctionCoefficients& fc) {
    if (stages < 1) throw std::invalid_argument("stage count must be positive");
    if (prior_width <= 0.0) throw std::invalid_argument("prior width must be positive");
    RpeConfig config;
    config.stages = stages;
    config.prior_width = prior_width;
    config.base_time = kTwoPi * fc.inf_norm / prior_width;
    config.repetitions.resize(stages);
    for (int j = 1; j <= stages; ++j) config.repetitions[j - 1] = 2 + 3 * (stages - j);
    return config;
}

StageProbabilities stage_probabilities(double phase, std::int64_t multiplier) {
    if (multiplier < 1) throw std::invalid_argument("multiplier must be positive");
    const double m_phase = static_cast<double>(multiplier) * phase;
    return {(1.0 + std::cos(m_phase)) / 2.0, (1.0 + std::sin(m_phase)) / 2.0};
}

StageProbabilities stage_probabilities_from_state(const ProtocolSchedule& s,
                                                  const FunctionCoefficients& fc,
                                                  double true_value, std::int64_t multiplier,
                                                  double base_time) {
    const GateSequence gates = compile_gates(s);
    // Any field vector with weights . fields = true_value works; spread it
    // along the weights for reproducibility.
    double norm2 = 0.0;
    for (double w : fc.weights) norm2 += w * w;
    std::vector<double> fields(fc.dim());
    for (std::size_t j = 0; j < fc.dim(); ++j)
        fields[j] = true_value * fc.weights[j] / norm2;
    const StateVector state =
        statevector_evolve(gates, s, fields, static_cast<double>(multiplier) * base_time);
    const Amplitude zero = state[0];
    const Amplitude one = state[std::size_t{1} << gates.anchor];
    // Anchor in (|0> + e^{i phi}|1>)/sqrt(2): x and y measurement statistics.
    const Amplitude ix = Amplitude{0.0, 1.0};
    return {0.5 * std::norm(zero + one), 0.5 * std::norm(zero - ix * one)};
}

double stage_sample(double phase, std::int64_t multiplier, int repetitions, Rng& rng) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be positive");
    const StageProbabilities p = stage_probabilities(phase, multiplier);
    int zeros_x = 0, zeros_y = 0;
    for (int r = 0; r < repetitions; ++r) zeros_x += rng.bernoulli(p.x_zero);
    for (int r = 0; r < repetitions; ++r) zeros_y += rng.bernoulli(p.y_zero);
    const double fx = static_cast<double>(zeros_x) / repetitions;
    const double fy = static_cast<double>(zeros_y) / repetitions;
    const double angle = std::atan2(2.0 * fy - 1.0, 2.0 * fx - 1.0);
    return angle < 0.0 ? angle + kTwoPi : angle;
}

double combine_stages(std::span<const double> stage_phases,
                      std::span<const std::int64_t> multipliers) {
    if (stage_phases.empty() || stage_phases.size() != multipliers.size())
        throw DimensionMismatchError("stage estimate and multiplier lengths differ");
    for (std::size_t j = 0; j < multipliers.size(); ++j)
        if (multipliers[j] != std::int64_t{1} << j)
            throw std::invalid_argument("multipliers must double per stage");

    double estimate = stage_phases[0];
    for (std::size_t j = 1; j < stage_phases.size(); ++j) {
        const double m = static_cast<double>(multipliers[j]);
        double best = 0.0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::int64_t branch = 0; branch < multipliers[j]; ++branch) {
            const double candidate = (stage_phases[j] + kTwoPi * branch) / m;
            const double dist = circular_distance(candidate, estimate);
            if (dist < best_dist) {
                best_dist = dist;
                best = candidate;
            }
        }
        estimate = best;
    }
    return estimate;
}

RpeResult rpe_run(double true_value, const FunctionCoefficients& fc, const RpeConfig& config,
                  Rng& rng) {
    const double pivot_value = fc.weights[fc.pivot];
    const double phase = (true_value - config.offset) * config.base_time / pivot_value;
    if (phase < -1e-12 || phase >= kTwoPi)
        throw PriorViolationError("value maps to phase " + std::to_string(phase) +
                                  " outside [0, 2pi)");

    const auto mult = config.multipliers();
    RpeResult result;
    result.stage_estimates.resize(config.stages);
    for (int j = 0; j < config.stages; ++j)
        result.stage_estimates[j] = stage_sample(phase, mult[j], config.repetitions[j], rng);
    const double phase_estimate = combine_stages(result.stage_estimates, mult);
    result.estimate = config.offset + pivot_value * phase_estimate / config.base_time;

    const double t = config.total_time();
    result.bound = kBoundConstant * kBoundConstant * fc.inf_norm * fc.inf_norm / (t * t);
    const double scale = std::abs(pivot_value) / config.base_time;
    const double err = scale * circular_distance(phase_estimate, std::max(phase, 0.0));
    result.mse = err * err;
    return result;
}

MseCurve mse_benchmark(std::optional<double> true_value, const FunctionCoefficients& fc,
                       std::span<const int> stage_counts, int trials, std::uint64_t seed,
                       double prior_width, int threads) {
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    MseCurve curve;
    const double pivot_sign = fc.weights[fc.pivot] > 0 ? 1.0 : -1.0;
    if (true_value) {
        // Fail before any worker spawns; the mapping is stage-count free.
        const double phase = *true_value * kTwoPi / (prior_width * pivot_sign);
        if (phase < -1e-12 || phase >= kTwoPi)
            throw PriorViolationError("value outside the declared prior");
    }

    for (const int stages : stage_counts) {
        const RpeConfig config = default_rpe_config(stages, prior_width, fc);
        std::vector<double> squared_errors(trials, 0.0);

        auto run_trial = [&](int trial) {
            Rng rng = Rng::stream(seed, (static_cast<std::uint64_t>(stages) << 32) |
                                            static_cast<std::uint64_t>(trial));
            double q = true_value ? *true_value
                                  : config.offset + pivot_sign * prior_width * rng.next_double();
            const RpeResult one = rpe_run(q, fc, config, rng);
            squared_errors[trial] = one.mse;
        };

        const int workers = std::max(1, threads);
        if (workers == 1) {
            for (int trial = 0; trial < trials; ++trial) run_trial(trial);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            const int chunk = (trials + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const int lo = w * chunk;
                const int hi = std::min(trials, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi, w] {
                    try {
                        for (int trial = lo; trial < hi; ++trial) run_trial(trial);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (const auto& e : errors)
                if (e) std::rethrow_exception(e);
        }

        MseCurvePoint point;
        point.stages = stages;
        point.total_time = config.total_time();
        point.trials = trials;
        point.mse = pairwise_sum(squared_errors) / trials;
        point.bound = kBoundConstant * kBoundConstant * fc.inf_norm * fc.inf_norm /
                      (point.total_time * point.total_time);
        curve.points.push_back(point);
    }

    if (curve.points.size() >= 2) {
        std::vector<double> log_t, log_mse;
        for (const auto& p : curve.points) {
            if (p.mse <= 0.0) continue;
            log_t.push_back(std::log(p.total_time));
            log_mse.push_back(std::log(p.mse));
        }
        if (log_t.size() >= 2) curve.slope = fit_slope(log_t, log_mse);
    }
    return curve;
}

}  // namespace qsn
