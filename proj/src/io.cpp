#include "pfreq/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "pfreq/errors.hpp"

namespace pfreq::io {

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drops the sign of negative zero
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::invalid_input, "cannot write " + path.string());
    return out;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const FrequencyTrace& trace) {
    auto out = open(path);
    out << "t,I,D,U\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << format_number(trace.times[k]) << ',' << format_number(trace.I[k]) << ','
            << format_number(trace.D[k]) << ',' << format_number(trace.U[k]) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open(path);
    out << "t,node,component,value\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const std::string t = format_number(traj.grid().time(k));
        const Field& f = traj.at(k);
        for (std::size_t i = 0; i < f.node_count(); ++i) {
            for (int c = 0; c < f.components(); ++c) {
                out << t << ',' << i << ',' << c << ',' << format_number(f(i, c)) << '\n';
            }
        }
    }
}

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<double>& eigenvalues) {
    auto out = open(path);
    out << "index,eigenvalue\n";
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) out << i << ',' << format_number(eigenvalues[i]) << '\n';
}

void write_poon_csv(const std::filesystem::path& path, const std::vector<PoonRow>& rows) {
    auto out = open(path);
    out << "s,R,H,logH\n";
    for (const PoonRow& r : rows) {
        out << format_number(r.s) << ',' << format_number(r.R) << ',' << format_number(r.H) << ','
            << format_number(std::log(r.H)) << '\n';
    }
}

nlohmann::ordered_json to_json(const CheckReport& report) {
    nlohmann::ordered_json j;
    j["check"] = report.name;
    j["pass"] = report.pass;
    j["margin"] = report.worst_margin;
    j["tolerance"] = report.tolerance;
    j["location"] = report.location ? nlohmann::ordered_json(*report.location) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json aux = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.aux) aux[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    for (const auto& [k, v] : report.notes) aux[k] = v;
    j["aux"] = std::move(aux);
    return j;
}

nlohmann::ordered_json make_report(const std::string& command, const std::vector<CheckReport>& checks,
                                   const nlohmann::ordered_json& summary, std::optional<std::uint64_t> seed) {
    nlohmann::ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["command"] = command;
    doc["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    bool pass = true;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const CheckReport& r : checks) {
        pass = pass && r.pass;
        list.push_back(to_json(r));
    }
    doc["pass"] = pass;
    doc["checks"] = std::move(list);
    doc["summary"] = summary;
    return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
    auto out = open(path);
    out << doc.dump(2) << '\n';
}

}  // namespace pfreq::io
