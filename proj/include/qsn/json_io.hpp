#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qsn/coefficients.hpp"
#include "qsn/partition.hpp"
#include "qsn/schedule.hpp"
#include "qsn/verify.hpp"

namespace qsn {

using Json = nlohmann::ordered_json;

// Protocol document: {alpha, pivot, k, families, p, total_time, flags}.
// Families serialize in execution order; numbers round-trip exactly.
Json protocol_to_json(const ProtocolSchedule& s, const FunctionCoefficients& fc);

struct ProtocolFile {
    FunctionCoefficients fc;
    ProtocolSchedule schedule;
};

enum class ScheduleParseMode {
    strict,   // enforce the construction invariants (fractions sum to 1)
    lenient,  // structural checks only, so near-valid inputs can be verified
};

// Throws std::invalid_argument on schema violations (wrong shapes, sign
// entries outside {-1,0,1}, stale pivot/k fields, nonpositive fractions).
ProtocolFile protocol_from_json(const Json& j,
                                ScheduleParseMode mode = ScheduleParseMode::strict);

Json infeasible_to_json(const std::vector<double>& certificate);

struct VerifyReport {
    bool passed = false;
    std::vector<double> row_residuals;
    std::vector<double> lambda;
    bool f11_ok = false;
    bool offdiag_ok = false;
    Matrix qfim;
    std::string method;
};

Json verify_report_to_json(const VerifyReport& report);

Json partition_to_json(const Partition& p, int entanglement_cap);

// FNV-1a over a file's bytes, hex-encoded; empty string when unreadable.
std::string file_digest(const std::string& path);

}  // namespace qsn
