// Acceptance suite: ten end-to-end criteria, one pass/fail line each.
// Usage: acceptance_tests [path-to-cli] [work-dir]
// The CLI path enables the process-level round-trip criterion; without it
// that criterion runs through the library layer instead.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsn/cnot.hpp"
#include "qsn/coefficients.hpp"
#include "qsn/errors.hpp"
#include "qsn/json_io.hpp"
#include "qsn/linalg.hpp"
#include "qsn/partition.hpp"
#include "qsn/rng.hpp"
#include "qsn/rpe.hpp"
#include "qsn/solver.hpp"
#include "qsn/verify.hpp"

using namespace qsn;

namespace {

struct Harness {
    int failures = 0;

    void run(int number, const std::string& name, double budget_seconds,
             const std::function<bool(std::string&)>& body) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && budget_seconds > 0.0 && secs > budget_seconds) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("over the ") +
                      std::to_string(budget_seconds) + "s budget";
        }
        std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number,
                    name.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::vector<double> random_weights(Rng& rng, std::size_t d, bool positive = false) {
    std::vector<double> w(d);
    bool any = false;
    for (auto& v : w) {
        v = positive ? rng.uniform(0.01, 1.0) : rng.uniform(-1.0, 1.0);
        any |= v != 0.0;
    }
    if (!any) w[0] = 1.0;
    return w;
}

double max_residual(const ProtocolSchedule& s, const FunctionCoefficients& fc) {
    const auto c = schedule_sensitivity(s);
    double r = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        r = std::max(r, std::abs(c[j] - fc.normalized[j]));
    return r;
}

double fraction_of(const ProtocolSchedule& s, const std::vector<int>& signs) {
    for (std::size_t n = 0; n < s.size(); ++n)
        if (s.families[n].signs == signs) return s.fractions[n];
    return 0.0;
}

// ---- criterion bodies ----------------------------------------------------

bool worked_example(std::string& detail) {
    const auto fc = normalize({1.0, 0.5});
    const auto designed = design_protocol(fc);
    const double delta =
        fraction_of(designed, {1, 1}) - fraction_of(designed, {1, -1});
    if (std::abs(delta - 0.5) > 1e-9) {
        detail = "p1 - p2 = " + std::to_string(delta);
        return false;
    }
    double sum = 0.0;
    for (double p : designed.fractions) {
        if (p < 0.0) return false;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9 || max_residual(designed, fc) > 1e-9) return false;

    // The two-family vertex via the "minimize the echoed column" objective.
    const auto cs = enumerate_families(fc, 2, ColumnMode::general);
    const std::vector<double> objective{0.0, 1.0, 0.0};
    const auto sol = solve_schedule(cs, fc, &objective);
    if (!sol.schedule || std::abs(sol.vertex[0] - 0.5) > 1e-9 ||
        std::abs(sol.vertex[1]) > 1e-9 || std::abs(sol.vertex[2] - 0.5) > 1e-9) {
        detail = "expected vertex (0.5, 0, 0.5)";
        return false;
    }
    const auto fcm = normalize({1.0, -0.5});
    const auto csm = enumerate_families(fcm, 2, ColumnMode::general);
    const auto solm = solve_schedule(csm, fcm, &objective);
    if (!solm.schedule || std::abs(solm.vertex[0]) > 1e-9 ||
        std::abs(solm.vertex[1] - 0.5) > 1e-9 || std::abs(solm.vertex[2] - 0.5) > 1e-9) {
        detail = "expected mirrored vertex (0, 0.5, 0.5)";
        return false;
    }
    return true;
}

bool entanglement_threshold(std::string& detail) {
    Rng rng(20240801);
    int checked = 0;
    for (std::size_t d = 2; d <= 8; ++d) {
        for (int it = 0; it < 1000; ++it) {
            const auto fc = normalize(random_weights(rng, d));
            const int k = fc.min_entanglement;
            const auto cs = enumerate_families(fc, k, ColumnMode::general);
            const auto sol = solve_schedule(cs, fc, nullptr);
            if (!sol.schedule || max_residual(*sol.schedule, fc) > 1e-9) {
                detail = "feasible direction failed at d=" + std::to_string(d);
                return false;
            }
            const double ratio = fc.one_norm / fc.inf_norm;
            if (ratio > k - 1 + 1e-9) {
                const auto cert = farkas_certificate(fc, k - 1);
                if (!cert) {
                    detail = "missing certificate below threshold at d=" + std::to_string(d);
                    return false;
                }
                if (dot(fc.normalized, cert->y) > -1e-6) {
                    detail = "certificate not separating";
                    return false;
                }
                if (k - 1 >= 1) {
                    const auto below = enumerate_families(fc, k - 1, ColumnMode::general);
                    for (const auto& col : below.columns) {
                        double v = 0.0;
                        for (std::size_t j = 0; j < d; ++j) v += col.signs[j] * cert->y[j];
                        if (v < -1e-9) {
                            detail = "certificate violated by an admissible column";
                            return false;
                        }
                    }
                }
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " instances, zero counterexamples";
    return true;
}

bool qfim_equivalence(std::string& detail) {
    Rng rng(777001);
    for (int it = 0; it < 100; ++it) {
        const std::size_t d = 2 + rng.next_u64() % 5;
        const auto fc = normalize(random_weights(rng, d));
        const ColumnMode mode = rng.bernoulli(0.5) ? ColumnMode::general : ColumnMode::non_echoed;
        const auto s = random_vertex_schedule(fc, fc.min_entanglement, mode, rng.next_u64());
        const double t = rng.uniform(0.3, 2.0);

        const Matrix fa = analytic_qfim(s, t);
        const Matrix fg = qfim_generator_sum(s, t);
        const auto gates = compile_gates(s);
        std::vector<double> theta(d);
        for (auto& v : theta) v = rng.uniform(-1.0, 1.0);
        const Matrix fd = qfim_finite_difference(gates, s, theta, t);

        const double scale = std::max({fa.max_abs(), t * t});
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                if (std::abs(fa(i, j) - fg(i, j)) > 1e-6 * scale ||
                    std::abs(fa(i, j) - fd(i, j)) > 1e-6 * scale) {
                    detail = "routes disagree at instance " + std::to_string(it);
                    return false;
                }
            }
        }
        const auto report = check_saturability(fa, fc, t, 1e-8);
        if (!report.passed) {
            detail = "row check failed on an optimal schedule";
            return false;
        }
    }
    return true;
}

bool average_entanglement_floor(std::string& detail) {
    Rng rng(414243);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t d = 2 + rng.next_u64() % 7;
        const auto fc = normalize(random_weights(rng, d));
        const double floor = fc.one_norm / fc.inf_norm;

        const auto tight =
            random_vertex_schedule(fc, fc.min_entanglement, ColumnMode::non_echoed, rng.next_u64());
        if (std::abs(average_entanglement(tight) - floor) > 1e-9) {
            detail = "non-echoed schedule off the floor by " +
                     std::to_string(average_entanglement(tight) - floor);
            return false;
        }
        const auto any =
            random_vertex_schedule(fc, fc.min_entanglement, ColumnMode::general, rng.next_u64());
        if (average_entanglement(any) < floor - 1e-9) {
            detail = "schedule below the floor";
            return false;
        }
    }
    return true;
}

bool figure_benchmark(std::string& detail) {
    const auto rows = cnot_benchmark(3, 10, 20, 20240805, 2);
    for (const auto& row : rows) {
        if (row.method == "greedy" && !row.failed &&
            row.cnot_intermediate > 2 * (row.sensors - 1)) {
            detail = "greedy exceeded its gate budget";
            return false;
        }
    }
    const double random_exp = benchmark_cost_exponent(rows, "random");
    const double greedy_exp = benchmark_cost_exponent(rows, "greedy");
    std::ostringstream ss;
    ss << "random exponent " << random_exp << " (want [1.6, 2.4]), greedy exponent " << greedy_exp
       << " (want [0.8, 1.2])";
    detail = ss.str();
    return random_exp >= 1.6 && random_exp <= 2.4 && greedy_exp >= 0.8 && greedy_exp <= 1.2;
}

bool cnot_golden(std::string& detail) {
    const auto fc = normalize({1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3});
    const auto ladder = disentangling_protocol(fc);
    const int nested = protocol_cost(ladder).intermediate;

    std::vector<int> weight_order{8, 1, 7, 2, 6, 3, 5, 4};
    std::vector<StateFamily> fams;
    std::vector<double> p;
    for (int w : weight_order)
        for (std::size_t n = 0; n < ladder.size(); ++n)
            if (ladder.families[n].weight() == w) {
                fams.push_back(ladder.families[n]);
                p.push_back(ladder.fractions[n]);
            }
    const int interleaved = protocol_cost(make_schedule(fams, p, 1.0, &fc)).intermediate;
    const int echo = protocol_cost(echoing_protocol(fc)).intermediate;

    detail = "nested " + std::to_string(nested) + ", interleaved " + std::to_string(interleaved) +
             ", echoing " + std::to_string(echo);
    return nested == 7 && interleaved == 28 && echo == 0;
}

bool rpe_bound(std::string& detail) {
    const auto fc = normalize({1.0, 0.5});
    std::vector<int> stages{4, 5, 6, 7, 8, 9, 10};
    const auto curve = mse_benchmark(std::nullopt, fc, stages, 10000, 909090, 1.0, 2);
    const double limit = std::pow(24.26 * 3.14159265358979323846, 2);
    double worst = 0.0;
    for (const auto& point : curve.points) {
        const double scaled = point.mse * point.total_time * point.total_time /
                              (fc.inf_norm * fc.inf_norm);
        worst = std::max(worst, scaled);
        if (scaled > limit) {
            detail = "bound violated at K=" + std::to_string(point.stages);
            return false;
        }
    }
    std::ostringstream ss;
    ss << "max scaled mse " << worst << " vs " << limit << ", slope " << curve.slope;
    detail = ss.str();
    return curve.slope >= -2.2 && curve.slope <= -1.8;
}

bool probabilistic_ceiling(std::string& detail) {
    Rng rng(515253);
    for (int families = 1; families <= 5; ++families) {
        const double t = 1.0;
        const double bound = probabilistic_bound(families, t);
        double uniform = 0.0;
        for (int n = 0; n < families; ++n)
            uniform += (1.0 / families) * (t / families) * (t / families);
        if (std::abs(uniform - bound) > 1e-12) {
            detail = "uniform allocation misses the bound";
            return false;
        }
        for (int it = 0; it < 100000; ++it) {
            std::vector<double> p(families);
            double ps = 0.0;
            for (auto& v : p) {
                v = -std::log(1.0 - rng.next_double());
                ps += v;
            }
            double inv_sum = 0.0;
            for (double v : p) inv_sum += ps / v;
            double value = 0.0;
            for (double v : p) {
                const double tn = t * (ps / v) / inv_sum;  // stationary split per frequency
                value += (v / ps) * tn * tn;
            }
            if (value > bound + 1e-12) {
                detail = "allocation exceeded the ceiling";
                return false;
            }
        }
    }
    return true;
}

bool partition_dp(std::string& detail) {
    Rng rng(616263);
    for (std::size_t d = 1; d <= 12; ++d) {
        for (int it = 0; it < 100; ++it) {
            const auto fc = normalize(random_weights(rng, d));
            const int cap = 1 + static_cast<int>(rng.next_u64() % d);
            const auto p = optimal_partition(fc, cap);

            // Exhaustive contiguous splits of the sorted order.
            std::vector<double> mag;
            for (double w : fc.weights)
                if (w != 0.0) mag.push_back(std::abs(w));
            std::sort(mag.begin(), mag.end(), std::greater<>());
            const std::size_t m = mag.size();
            double best = m == 0 ? 0.0 : std::numeric_limits<double>::infinity();
            for (std::size_t cuts = 0; m > 0 && cuts < (std::size_t{1} << (m - 1)); ++cuts) {
                double total = 0.0;
                bool ok = true;
                std::size_t start = 0;
                for (std::size_t j = 0; j < m && ok; ++j) {
                    if (j + 1 != m && !(cuts & (std::size_t{1} << j))) continue;
                    double sum = 0.0;
                    for (std::size_t r = start; r <= j; ++r) sum += mag[r];
                    if (sum > cap * mag[start] + 1e-12) ok = false;
                    total += mag[start] * mag[start];
                    start = j + 1;
                }
                if (ok) best = std::min(best, total);
            }
            if (std::abs(p.variance_times_t2 - best) > 1e-12) {
                detail = "DP disagrees with brute force at d=" + std::to_string(d);
                return false;
            }
            const auto whole = optimal_partition(fc, fc.min_entanglement);
            if (std::abs(whole.variance_times_t2 - fc.inf_norm * fc.inf_norm) > 1e-12) {
                detail = "uncapped partition is not a single block";
                return false;
            }
        }
    }
    return true;
}

struct CliContext {
    std::string cli;
    std::filesystem::path work;
};

int run_cli(const CliContext& ctx, const std::string& args) {
    const std::string cmd = "'" + ctx.cli + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool round_trip(const CliContext* ctx, std::string& detail) {
    Rng rng(717273);
    int verified = 0;
    const char* constructions[] = {"lp", "disentangling", "echoing", "greedy"};
    for (int it = 0; it < 200; ++it) {
        const std::size_t d = 2 + rng.next_u64() % 5;
        const auto fc = normalize(random_weights(rng, d));
        const std::string construction = constructions[it % 4];
        if (construction == std::string("greedy") && greedy_protocol(fc).failed()) continue;

        if (ctx) {
            std::ostringstream alpha;
            alpha << "[";
            for (std::size_t j = 0; j < d; ++j)
                alpha << (j ? "," : "") << fc.weights[j];
            alpha << "]";
            const auto proto = (ctx->work / ("p" + std::to_string(it) + ".json")).string();
            std::string design_args = "design --alpha '" + alpha.str() + "' --construction " +
                                      construction + " --out '" + proto + "'";
            if (it % 8 == 1) design_args += " --seed " + std::to_string(it);
            const int dcode = run_cli(*ctx, design_args);
            if (dcode != 0) {
                detail = "design exited " + std::to_string(dcode) + " at instance " +
                         std::to_string(it);
                return false;
            }
            const int vcode = run_cli(*ctx, "verify '" + proto + "' --method all");
            if (vcode != 0) {
                detail = "verify exited " + std::to_string(vcode) + " at instance " +
                         std::to_string(it);
                return false;
            }
        } else {
            ProtocolSchedule s;
            if (construction == std::string("lp"))
                s = design_protocol(fc);
            else if (construction == std::string("disentangling"))
                s = disentangling_protocol(fc);
            else if (construction == std::string("echoing"))
                s = echoing_protocol(fc);
            else
                s = *greedy_protocol(fc).schedule;
            const auto report = check_saturability(analytic_qfim(s, 1.0), fc, 1.0);
            if (!report.passed) return false;
        }
        ++verified;
    }
    detail = std::to_string(verified) + " protocols verified" +
             (ctx ? " through the CLI" : " (library layer; no CLI path given)");
    return verified >= 150;
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<CliContext> ctx;
    if (argc > 1) {
        CliContext c;
        c.cli = argv[1];
        c.work = argc > 2 ? std::filesystem::path(argv[2])
                          : std::filesystem::temp_directory_path() / "qsn_acceptance";
        std::error_code ec;
        std::filesystem::create_directories(c.work, ec);
        if (!ec && std::filesystem::exists(c.cli)) ctx = std::move(c);
    }

    Harness h;
    h.run(1, "two-sensor worked example", 1.0, worked_example);
    h.run(2, "entanglement threshold, both directions", 120.0, entanglement_threshold);
    h.run(3, "Fisher-matrix route equivalence", 300.0, qfim_equivalence);
    h.run(4, "average entanglement floor", 0.0, average_entanglement_floor);
    h.run(5, "gate-cost scaling benchmark", 1800.0, figure_benchmark);
    h.run(6, "eight-sensor gate-count golden values", 0.0, cnot_golden);
    h.run(7, "phase-estimation error bound and slope", 600.0, rpe_bound);
    h.run(8, "single-family time-allocation ceiling", 0.0, probabilistic_ceiling);
    h.run(9, "partition dynamic program optimality", 0.0, partition_dp);
    h.run(10, "design/verify round trip", 0.0, [&](std::string& d) {
        return round_trip(ctx ? &*ctx : nullptr, d);
    });

    std::printf("%d/10 criteria passed\n", 10 - h.failures);
    return h.failures;
}
