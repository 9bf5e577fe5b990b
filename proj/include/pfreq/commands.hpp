#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "pfreq/config.hpp"

namespace pfreq {

inline constexpr int kExitPass = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitCheckFailure = 2;

struct RunOptions {
    std::filesystem::path out = "pfreq-out";
    double tol_scale = 1.0;
    std::optional<std::uint64_t> seed;
};

/// Writes trajectory.csv, trace.csv and report.json under options.out.
int run_simulate(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// Writes spectrum.csv (the k largest eigenvalues) and report.json.
int run_eigen(const GeometryConfig& geometry, std::size_t k, const RunOptions& options, std::ostream& log);
/// Writes poon.csv and report.json for an oracle document.
int run_poon(const nlohmann::json& doc, const RunOptions& options, std::ostream& log);
/// Runs `base` once per entry of `values`, substituted at the JSON pointer `parameter`,
/// into options.out/run_NNN; writes sweep.json. Exits with the worst run code.
int run_sweep(const nlohmann::json& doc, const RunOptions& options, std::ostream& log);
/// Full property suite; writes report.json. `corrupt` swaps in a defective operator.
int run_check_all(std::uint64_t seed, bool corrupt, const RunOptions& options, std::ostream& log);

/// Maps an exception from a command to its exit code, logging the message.
int exit_code_for(const std::exception& e, std::ostream& log);

}  // namespace pfreq
