#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfreq/report.hpp"

namespace pfreq {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct SuiteOptions {
    std::uint64_t seed = kDefaultSeed;
    bool corrupt = false;  // replaces the circle operator with a defective one in the self-adjointness section
    double tol_scale = 1.0;
    int random_fields = 100;       // per geometry
    int perturbed_trajectories = 50;
};

struct SuiteSection {
    std::string name;
    std::vector<CheckReport> checks;
    double seconds = 0.0;
    bool pass() const;
};

/// Aggregates member reports into one: the member with the least slack (margin + tolerance)
/// supplies margin, tolerance, location and aux.
class Aggregate {
public:
    explicit Aggregate(std::string name) : name_(std::move(name)) {}
    void add(const CheckReport& report);
    CheckReport result() const;

private:
    std::string name_;
    CheckReport worst_;
    double worst_slack_ = 0.0;
    std::size_t members_ = 0;
    std::size_t failures_ = 0;
    std::size_t worst_member_ = 0;
};

/// Runs every section; deterministic for a given seed.
std::vector<SuiteSection> run_property_suite(const SuiteOptions& options);

}  // namespace pfreq
