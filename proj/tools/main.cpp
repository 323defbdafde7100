// qsn: design, verify, simulate, and benchmark linear-function estimation
// protocols for qubit sensor networks.
//
// Exit codes: 0 ok, 1 malformed input, 2 infeasible, 3 greedy failure,
// 4 dimension/size too large for the chosen method, 5 verification failed,
// 6 prior violation.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qsn/cnot.hpp"
#include "qsn/coefficients.hpp"
#include "qsn/errors.hpp"
#include "qsn/json_io.hpp"
#include "qsn/partition.hpp"
#include "qsn/rng.hpp"
#include "qsn/rpe.hpp"
#include "qsn/solver.hpp"
#include "qsn/verify.hpp"

namespace {

using qsn::Json;

constexpr const char* kVersion = "0.1.0";

enum Exit {
    kOk = 0,
    kBadInput = 1,
    kInfeasible = 2,
    kGreedyFailure = 3,
    kTooLarge = 4,
    kVerifyFailed = 5,
    kPriorViolation = 6,
};

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

struct OutputSink {
    std::optional<std::string> path;

    void write(const std::string& text) const {
        if (path) {
            std::ofstream out(*path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open output file " + *path);
            out << text;
        } else {
            std::cout << text;
        }
    }

    // The manifest never shares the data stream: wall time would break
    // byte-for-byte reproducibility of the payload.
    void write_manifest(const Json& manifest) const {
        if (path) {
            std::ofstream out(*path + ".manifest.json", std::ios::binary);
            if (out) out << manifest.dump(2) << "\n";
        } else {
            std::cerr << manifest.dump(2) << "\n";
        }
    }
};

struct ManifestBuilder {
    std::string command;
    std::vector<std::string> arguments;
    std::uint64_t seed = 0;
    std::vector<std::string> input_files;
    Json extra = Json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Json build() const {
        Json m;
        m["command"] = command;
        m["arguments"] = arguments;
        m["seed"] = seed;
        m["version"] = kVersion;
        Json digests = Json::object();
        for (const auto& f : input_files) digests[f] = qsn::file_digest(f);
        m["input_digests"] = digests;
        const auto elapsed = std::chrono::steady_clock::now() - start;
        m["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        if (!extra.empty()) m["config"] = extra;
        return m;
    }
};

// --alpha accepts an inline JSON array or a path to either a bare array or a
// protocol document (its "alpha" field is used).
std::vector<double> parse_alpha(const std::string& spec, ManifestBuilder& manifest) {
    std::string text = spec;
    const auto first = spec.find_first_not_of(" \t");
    if (first != std::string::npos && spec[first] == '[') {
        text = spec;
    } else {
        std::ifstream in(spec, std::ios::binary);
        if (!in) throw std::invalid_argument("cannot read coefficient file " + spec);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        manifest.input_files.push_back(spec);
    }
    const Json j = Json::parse(text);
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object() && j.contains("alpha")) return j.at("alpha").get<std::vector<double>>();
    throw std::invalid_argument("expected a JSON array or an object with an alpha field");
}

qsn::ProtocolFile load_protocol(const std::string& path, qsn::ScheduleParseMode mode,
                                ManifestBuilder& manifest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read protocol file " + path);
    Json j;
    in >> j;
    manifest.input_files.push_back(path);
    return qsn::protocol_from_json(j, mode);
}

// "6", "4,5,6", or "4..8".
std::vector<int> parse_stage_list(const std::string& spec) {
    std::vector<int> stages;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(spec.substr(0, dots));
        const int hi = std::stoi(spec.substr(dots + 2));
        if (lo < 1 || hi < lo) throw std::invalid_argument("bad stage range " + spec);
        for (int k = lo; k <= hi; ++k) stages.push_back(k);
        return stages;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int k = std::stoi(item);
        if (k < 1) throw std::invalid_argument("stage counts must be positive");
        stages.push_back(k);
    }
    if (stages.empty()) throw std::invalid_argument("no stage counts given");
    return stages;
}

int cmd_design(const std::string& alpha_spec, std::optional<int> cap, bool non_echoed,
               const std::string& construction, const std::string& order,
               std::optional<std::uint64_t> seed, double total_time, const OutputSink& sink,
               ManifestBuilder& manifest) {
    const auto fc = qsn::normalize(parse_alpha(alpha_spec, manifest));

    qsn::ProtocolSchedule schedule;
    if (construction == "lp") {
        if (seed) {
            schedule = qsn::random_vertex_schedule(
                fc, cap.value_or(fc.min_entanglement),
                non_echoed ? qsn::ColumnMode::non_echoed : qsn::ColumnMode::general, *seed);
        } else {
            qsn::DesignOptions opts;
            opts.non_echoed = non_echoed;
            opts.entanglement_cap = cap;
            schedule = qsn::design_protocol(fc, opts);
        }
    } else if (construction == "greedy") {
        const auto result = qsn::greedy_protocol(fc);
        if (result.failed()) {
            Json j;
            j["greedy_failure"] = true;
            j["residuals"] = result.trace.residual;
            sink.write(j.dump(2) + "\n");
            sink.write_manifest(manifest.build());
            return kGreedyFailure;
        }
        schedule = *result.schedule;
    } else if (construction == "disentangling") {
        schedule = qsn::disentangling_protocol(fc);
    } else if (construction == "echoing") {
        schedule = qsn::echoing_protocol(fc);
    } else {
        throw std::invalid_argument("unknown construction " + construction);
    }

    if (order == "brute")
        schedule = qsn::optimal_ordering(schedule, qsn::OrderingMethod::brute);
    else if (order == "held-karp")
        schedule = qsn::optimal_ordering(schedule, qsn::OrderingMethod::held_karp);
    else if (order != "none")
        throw std::invalid_argument("unknown ordering method " + order);

    schedule.total_time = total_time;
    sink.write(qsn::protocol_to_json(schedule, fc).dump(2) + "\n");
    sink.write_manifest(manifest.build());
    return kOk;
}

int cmd_verify(const std::string& protocol_path, std::optional<double> time,
               const std::string& method, double tol, std::uint64_t seed, const OutputSink& sink,
               ManifestBuilder& manifest) {
    const auto file = load_protocol(protocol_path, qsn::ScheduleParseMode::lenient, manifest);
    const auto& fc = file.fc;
    const auto& schedule = file.schedule;
    const double t = time.value_or(schedule.total_time);
    const std::size_t d = fc.dim();

    const bool want_analytic = method == "analytic" || method == "all";
    const bool want_generator = method == "generator" || method == "all";
    const bool want_fd = method == "fd" || method == "all";
    if (!want_analytic && !want_generator && !want_fd)
        throw std::invalid_argument("unknown method " + method);
    if (want_generator && d > qsn::kMaxSimQubits) return kTooLarge;
    if (want_fd && d > qsn::kMaxFiniteDiffQubits) return kTooLarge;

    std::vector<std::pair<std::string, qsn::Matrix>> qfims;
    if (want_analytic) qfims.emplace_back("analytic", qsn::analytic_qfim(schedule, t));

    std::optional<qsn::GateSequence> gates;
    bool compilable = true;
    try {
        gates = qsn::compile_gates(schedule);
    } catch (const qsn::PivotNotInSupportError&) {
        compilable = false;
    }
    if ((want_generator || want_fd) && !compilable)
        std::cerr << "protocol has no always-entangled anchor; circuit checks fail\n";

    qsn::Rng rng(seed);
    std::vector<double> theta(d);
    for (auto& v : theta) v = rng.uniform(-1.0, 1.0);

    if (want_generator && compilable)
        qfims.emplace_back("generator", qsn::qfim_generator_sum(schedule, t));
    if (want_fd && compilable)
        qfims.emplace_back("fd", qsn::qfim_finite_difference(*gates, schedule, theta, t));

    bool agree = compilable;
    for (std::size_t a = 0; a + 1 < qfims.size(); ++a) {
        double worst = 0.0;
        const auto& fa = qfims[a].second;
        const auto& fb = qfims[a + 1].second;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                worst = std::max(worst, std::abs(fa(i, j) - fb(i, j)));
        if (worst > 1e-6 * std::max({fa.max_abs(), fb.max_abs(), t * t})) agree = false;
    }

    qsn::VerifyReport report;
    report.method = method;
    bool all_pass = agree;
    for (const auto& [name, qfim] : qfims) {
        const auto sat = qsn::check_saturability(qfim, fc, t, tol);
        const auto qb = qsn::transform_to_q_basis(qfim, fc, sat.lambda, t, tol);
        all_pass = all_pass && sat.passed && qb.f11_ok && qb.offdiag_ok;
        report.row_residuals = sat.row_residuals;
        report.lambda = sat.lambda;
        report.f11_ok = qb.f11_ok;
        report.offdiag_ok = qb.offdiag_ok;
        report.qfim = qfim;
    }

    bool probe_ok = compilable;
    if (compilable && gates && d <= qsn::kMaxSimQubits) {
        std::vector<std::size_t> boundaries(schedule.size() + 1);
        for (std::size_t b = 0; b < boundaries.size(); ++b) boundaries[b] = b;
        probe_ok = qsn::check_probe_form(*gates, schedule, theta, fc, boundaries);
    }

    report.passed = all_pass && probe_ok;
    sink.write(qsn::verify_report_to_json(report).dump(2) + "\n");
    sink.write_manifest(manifest.build());
    return report.passed ? kOk : kVerifyFailed;
}

int cmd_simulate(const std::string& protocol_path, std::optional<double> q, double q_range,
                 const std::string& stages_spec, int trials, std::uint64_t seed, int threads,
                 const OutputSink& sink, ManifestBuilder& manifest) {
    const auto file = load_protocol(protocol_path, qsn::ScheduleParseMode::strict, manifest);
    const auto& fc = file.fc;
    const auto stages = parse_stage_list(stages_spec);
    if (q_range <= 0.0) throw std::invalid_argument("q range must be positive");

    if (q) {
        // One phase turn spans the prior; the mapping is stage-count free.
        const double phase = 2.0 * std::numbers::pi * *q /
                             (q_range * (fc.weights[fc.pivot] > 0 ? 1.0 : -1.0));
        if (phase < -1e-12 || phase >= 2.0 * std::numbers::pi)
            throw qsn::PriorViolationError("q outside the declared prior");
    }

    const auto curve = qsn::mse_benchmark(q, fc, stages, trials, seed, q_range, threads);

    std::ostringstream csv;
    csv << "K,t_total,trials,mse,bound,slope_window\n";
    bool all_bounded = true;
    std::vector<double> log_t, log_mse;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        log_t.push_back(std::log(p.total_time));
        log_mse.push_back(std::log(std::max(p.mse, 1e-300)));
        std::string slope;
        if (i >= 1) {
            const std::size_t lo = i >= 2 ? i - 2 : 0;
            const std::span<const double> xs(log_t.data() + lo, i - lo + 1);
            const std::span<const double> ys(log_mse.data() + lo, i - lo + 1);
            slope = format_double(qsn::fit_slope(xs, ys));
        }
        csv << p.stages << ',' << format_double(p.total_time) << ',' << p.trials << ','
            << format_double(p.mse) << ',' << format_double(p.bound) << ',' << slope << '\n';
        if (p.mse > p.bound) all_bounded = false;
    }
    sink.write(csv.str());

    Json config;
    config["stages"] = stages;
    config["trials"] = trials;
    config["q_range"] = q_range;
    if (q) config["q"] = *q;
    config["slope"] = curve.slope;
    manifest.extra = config;
    sink.write_manifest(manifest.build());
    return all_bounded ? kOk : kVerifyFailed;
}

int cmd_benchmark_cnot(int d_min, int d_max, int instances, std::uint64_t seed, int threads,
                       const OutputSink& sink, ManifestBuilder& manifest) {
    if (d_min < 3 || d_max < d_min || d_max > 16)
        throw std::invalid_argument("sensor range must satisfy 3 <= d-min <= d-max <= 16");
    const auto rows = qsn::cnot_benchmark(d_min, d_max, instances, seed, threads);

    std::ostringstream csv;
    csv << "d,instance,seed,method,cnot_intermediate,cnot_total,failed\n";
    for (const auto& row : rows) {
        csv << row.sensors << ',' << row.instance << ',' << row.seed << ',' << row.method << ',';
        if (row.failed)
            csv << ",,1\n";
        else
            csv << row.cnot_intermediate << ',' << row.cnot_total << ",0\n";
    }
    Json summary;
    summary["random_exponent"] = qsn::benchmark_cost_exponent(rows, "random");
    summary["greedy_exponent"] = qsn::benchmark_cost_exponent(rows, "greedy");
    csv << summary.dump() << "\n";
    sink.write(csv.str());
    sink.write_manifest(manifest.build());
    return kOk;
}

int cmd_partition(const std::string& alpha_spec, int cap, const OutputSink& sink,
                  ManifestBuilder& manifest) {
    const auto fc = qsn::normalize(parse_alpha(alpha_spec, manifest));
    if (cap < 1) throw std::invalid_argument("k must be positive");
    const auto partition = qsn::optimal_partition(fc, cap);
    sink.write(qsn::partition_to_json(partition, cap).dump(2) + "\n");
    sink.write_manifest(manifest.build());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum-entanglement protocol designer for qubit sensor networks"};
    app.require_subcommand(1);

    ManifestBuilder manifest;
    for (int i = 1; i < argc; ++i) manifest.arguments.emplace_back(argv[i]);

    auto* design = app.add_subcommand("design", "Solve for an optimal protocol schedule");
    std::string alpha_spec;
    std::optional<int> cap;
    bool echoed_ok = false;
    std::string construction = "lp";
    std::string order = "none";
    std::optional<std::uint64_t> design_seed;
    double total_time = 1.0;
    std::optional<std::string> out_path;
    design->add_option("--alpha", alpha_spec, "Inline JSON array or file with coefficients")
        ->required();
    design->add_option("--k", cap, "Entanglement cap (default: the minimum feasible)");
    design->add_flag("--echoed,!--non-echoed", echoed_ok,
                     "Allow echoed families (default: non-echoed only)");
    design->add_option("--construction", construction, "lp, greedy, disentangling, or echoing")
        ->check(CLI::IsMember({"lp", "greedy", "disentangling", "echoing"}));
    design->add_option("--order", order, "Reorder families: none, brute, held-karp")
        ->check(CLI::IsMember({"none", "brute", "held-karp"}));
    design->add_option("--seed", design_seed, "Pick a seeded random vertex (lp construction)");
    design->add_option("--total-time", total_time, "Total evolution time stored in the protocol");
    design->add_option("--out", out_path, "Write the protocol JSON here instead of stdout");

    auto* verify = app.add_subcommand("verify", "Check a protocol against the Fisher conditions");
    std::string protocol_path;
    std::optional<double> verify_time;
    std::string method = "all";
    double tol = 1e-8;
    std::uint64_t verify_seed = 0;
    std::optional<std::string> verify_out;
    verify->add_option("protocol", protocol_path, "Protocol JSON file")->required();
    verify->add_option("--t", verify_time, "Evolution time (default: the file's total_time)");
    verify->add_option("--method", method, "analytic, generator, fd, or all")
        ->check(CLI::IsMember({"analytic", "generator", "fd", "all"}));
    verify->add_option("--tol", tol, "Row-residual tolerance (scaled by t^2)");
    verify->add_option("--seed", verify_seed, "Seed for the sampled field values");
    verify->add_option("--out", verify_out, "Write the report JSON here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo phase-estimation error curve");
    std::string sim_protocol;
    std::optional<double> sim_q;
    double q_range = 1.0;
    std::string stages_spec = "4..8";
    int trials = 1000;
    std::uint64_t sim_seed = 0;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    std::optional<std::string> sim_out;
    simulate->add_option("protocol", sim_protocol, "Protocol JSON file")->required();
    simulate->add_option("--q", sim_q, "True value (default: drawn uniformly from the prior)");
    simulate->add_option("--q-range", q_range, "Prior width mapped onto one phase turn");
    simulate->add_option("--stages", stages_spec, "Stage counts: '6', '4,6,8', or '4..10'");
    simulate->add_option("--trials", trials, "Trials per stage count");
    simulate->add_option("--seed", sim_seed, "Base seed for all trials");
    simulate->add_option("--threads", threads, "Worker cap (result is thread-count independent)");
    simulate->add_option("--out", sim_out, "Write the CSV here instead of stdout");

    auto* bench = app.add_subcommand("benchmark-cnot", "Gate-cost scaling benchmark");
    int d_min = 3, d_max = 10, instances = 20;
    std::uint64_t bench_seed = 0;
    int bench_threads = static_cast<int>(std::thread::hardware_concurrency());
    std::optional<std::string> bench_out;
    bench->add_option("--d-min", d_min, "Smallest sensor count");
    bench->add_option("--d-max", d_max, "Largest sensor count");
    bench->add_option("--instances", instances, "Random instances per sensor count");
    bench->add_option("--seed", bench_seed, "Base seed");
    bench->add_option("--threads", bench_threads, "Worker cap");
    bench->add_option("--out", bench_out, "Write the CSV here instead of stdout");

    auto* part = app.add_subcommand("partition", "Optimal contiguous grouping under a cap");
    std::string part_alpha;
    int part_cap = 1;
    std::optional<std::string> part_out;
    part->add_option("--alpha", part_alpha, "Inline JSON array or file with coefficients")
        ->required();
    part->add_option("--k", part_cap, "Entanglement cap")->required();
    part->add_option("--out", part_out, "Write the JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (design->parsed()) {
            manifest.command = "design";
            manifest.seed = design_seed.value_or(0);
            return cmd_design(alpha_spec, cap, !echoed_ok, construction, order, design_seed,
                              total_time, OutputSink{out_path}, manifest);
        }
        if (verify->parsed()) {
            manifest.command = "verify";
            manifest.seed = verify_seed;
            return cmd_verify(protocol_path, verify_time, method, tol, verify_seed,
                              OutputSink{verify_out}, manifest);
        }
        if (simulate->parsed()) {
            manifest.command = "simulate";
            manifest.seed = sim_seed;
            return cmd_simulate(sim_protocol, sim_q, q_range, stages_spec, trials, sim_seed,
                                std::max(1, threads), OutputSink{sim_out}, manifest);
        }
        if (bench->parsed()) {
            manifest.command = "benchmark-cnot";
            manifest.seed = bench_seed;
            return cmd_benchmark_cnot(d_min, d_max, instances, bench_seed,
                                      std::max(1, bench_threads), OutputSink{bench_out}, manifest);
        }
        if (part->parsed()) {
            manifest.command = "partition";
            return cmd_partition(part_alpha, part_cap, OutputSink{part_out}, manifest);
        }
    } catch (const qsn::InfeasibleError& e) {
        OutputSink sink{out_path};
        sink.write(qsn::infeasible_to_json(e.certificate).dump(2) + "\n");
        sink.write_manifest(manifest.build());
        return kInfeasible;
    } catch (const qsn::PriorViolationError& e) {
        std::cerr << e.what() << "\n";
        return kPriorViolation;
    } catch (const qsn::DimensionTooLargeError& e) {
        std::cerr << e.what() << "\n";
        return kTooLarge;
    } catch (const qsn::TooManyFamiliesError& e) {
        std::cerr << e.what() << "\n";
        return kTooLarge;
    } catch (const qsn::TooLargeError& e) {
        std::cerr << e.what() << "\n";
        return kTooLarge;
    } catch (const Json::exception& e) {
        std::cerr << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}
