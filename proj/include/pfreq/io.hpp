#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "pfreq/field.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/report.hpp"

namespace pfreq::io {

inline constexpr const char* kReportSchema = "pfreq-report/1";

/// Header `t,I,D,U`.
void write_trace_csv(const std::filesystem::path& path, const FrequencyTrace& trace);
/// Header `t,node,component,value`; one row per sample, node and component.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// Header `index,eigenvalue`.
void write_spectrum_csv(const std::filesystem::path& path, const std::vector<double>& eigenvalues);

struct PoonRow {
    double s;
    double R;
    double H;
};
/// Header `s,R,H,logH`.
void write_poon_csv(const std::filesystem::path& path, const std::vector<PoonRow>& rows);

nlohmann::ordered_json to_json(const CheckReport& report);

/// Report document: {schema, command, seed, pass, checks: [...], summary: {...}}.
nlohmann::ordered_json make_report(const std::string& command, const std::vector<CheckReport>& checks,
                                   const nlohmann::ordered_json& summary, std::optional<std::uint64_t> seed);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

/// Shortest round-trip decimal form of a double, as used in every CSV.
std::string format_number(double v);

}  // namespace pfreq::io
