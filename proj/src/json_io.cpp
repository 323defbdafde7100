#include "qsn/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "qsn/errors.hpp"

namespace qsn {

Json protocol_to_json(const ProtocolSchedule& s, const FunctionCoefficients& fc) {
    Json j;
    j["alpha"] = fc.weights;
    j["pivot"] = fc.pivot;
    j["k"] = fc.min_entanglement;
    Json families = Json::array();
    for (const auto& fam : s.families) families.push_back(fam.signs);
    j["families"] = std::move(families);
    j["p"] = s.fractions;
    j["total_time"] = s.total_time;
    j["flags"] = Json{{"optimal", s.optimal}, {"non_echoed", s.non_echoed}};
    return j;
}

ProtocolFile protocol_from_json(const Json& j, ScheduleParseMode mode) {
    for (const char* key : {"alpha", "pivot", "k", "families", "p", "total_time", "flags"})
        if (!j.contains(key)) throw std::invalid_argument(std::string("missing key: ") + key);

    ProtocolFile file;
    file.fc = normalize(j.at("alpha").get<std::vector<double>>());
    if (j.at("pivot").get<std::size_t>() != file.fc.pivot)
        throw std::invalid_argument("pivot field disagrees with alpha");
    if (j.at("k").get<int>() != file.fc.min_entanglement)
        throw std::invalid_argument("k field disagrees with alpha");

    std::vector<StateFamily> families;
    for (const auto& row : j.at("families")) {
        StateFamily fam;
        fam.signs = row.get<std::vector<int>>();
        if (fam.signs.size() != file.fc.dim())
            throw std::invalid_argument("family length differs from alpha length");
        for (int s : fam.signs)
            if (s < -1 || s > 1) throw std::invalid_argument("family entries must be -1, 0, or 1");
        families.push_back(std::move(fam));
    }
    const auto fractions = j.at("p").get<std::vector<double>>();
    if (fractions.size() != families.size())
        throw std::invalid_argument("p length differs from family count");
    const double total_time = j.at("total_time").get<double>();
    if (!(total_time > 0.0)) throw std::invalid_argument("total_time must be positive");

    if (mode == ScheduleParseMode::strict) {
        file.schedule = make_schedule(std::move(families), fractions, total_time, &file.fc);
    } else {
        // Keep near-valid schedules alive so verification can quantify how
        // far off they are instead of rejecting them outright.
        ProtocolSchedule s;
        s.total_time = total_time;
        for (std::size_t n = 0; n < families.size(); ++n) {
            if (fractions[n] < 0.0) throw std::invalid_argument("negative time fraction");
            if (fractions[n] == 0.0) continue;
            s.families.push_back(std::move(families[n]));
            s.fractions.push_back(fractions[n]);
        }
        if (s.families.empty()) throw std::invalid_argument("schedule has no used families");
        const auto c = schedule_sensitivity(s);
        double residual = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i)
            residual = std::max(residual, std::abs(c[i] - file.fc.normalized[i]));
        s.optimal = residual < 1e-9;
        s.non_echoed = is_non_echoed(s, file.fc);
        file.schedule = std::move(s);
    }
    return file;
}

Json infeasible_to_json(const std::vector<double>& certificate) {
    Json j;
    j["infeasible"] = true;
    j["certificate"] = certificate;
    return j;
}

Json verify_report_to_json(const VerifyReport& report) {
    Json j;
    j["passed"] = report.passed;
    j["row_residuals"] = report.row_residuals;
    j["lambda"] = report.lambda;
    j["f11_ok"] = report.f11_ok;
    j["offdiag_ok"] = report.offdiag_ok;
    Json rows = Json::array();
    for (std::size_t i = 0; i < report.qfim.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < report.qfim.cols(); ++k) row.push_back(report.qfim(i, k));
        rows.push_back(std::move(row));
    }
    j["qfim"] = std::move(rows);
    j["method"] = report.method;
    return j;
}

Json partition_to_json(const Partition& p, int entanglement_cap) {
    Json j;
    j["k"] = entanglement_cap;
    j["blocks"] = p.blocks;
    j["variance_times_t2"] = p.variance_times_t2;
    return j;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace qsn
