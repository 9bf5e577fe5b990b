#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfreq/evolution.hpp"
#include "pfreq/expression.hpp"
#include "pfreq/field.hpp"
#include "pfreq/operators.hpp"

namespace pfreq {

struct GeometryConfig {
    GeometryKind kind = GeometryKind::circle;
    std::size_t nodes = 128;
    double length = 0.0;  // 0 means 2 pi
    std::size_t nx = 32;
    std::size_t ny = 32;
    double lx = 0.0;
    double ly = 0.0;
    int order = 24;
    Expression phi = Expression::parse("0");
    Expression psi = Expression::parse("0");
};

struct InitialConfig {
    enum class Mode { expression, eigenmode, random };
    Mode mode = Mode::expression;
    std::vector<Expression> expressions;  // one per component
    std::size_t eigenmode = 0;
    std::optional<std::uint64_t> seed;
    int modes = 4;
    int components = 1;
};

struct PerturbationConfig {
    std::vector<Expression> drift;  // one per axis
    std::optional<Expression> potential;
    Expression bound = Expression::parse("0");
};

struct CheckConfig {
    std::string name;
    std::optional<double> tol;
    std::optional<double> c;  // exponent for vanishing-order
};

enum class Integrator { exact, cn };

struct ExperimentConfig {
    GeometryConfig geometry;
    InitialConfig initial;
    double a = 0.0;
    double b = 1.0;
    std::size_t steps = 40;
    Integrator integrator = Integrator::exact;
    std::optional<PerturbationConfig> perturbation;
    std::optional<Expression> gauge;
    std::vector<CheckConfig> checks;
    std::optional<std::filesystem::path> output;
};

/// Parses an experiment document. `cli_seed` fills in a missing random seed; a random
/// initial descriptor without any seed is a config error. Errors name the offending field.
ExperimentConfig parse_experiment(const nlohmann::json& doc, std::optional<std::uint64_t> cli_seed = std::nullopt);
GeometryConfig parse_geometry_config(const nlohmann::json& doc);
nlohmann::json load_json(const std::filesystem::path& path);

GeometryPtr build_geometry(const GeometryConfig& config);
/// Builds the initial field; eigenmode descriptors use `op` (index 0 is the ground state).
Field build_initial(const InitialConfig& config, const DriftOperator& op);
std::optional<PerturbationSpec> build_perturbation(const ExperimentConfig& config);
std::optional<GaugeSpec> build_gauge(const ExperimentConfig& config);

/// Reads a number that may also be written as an expression string such as "2*pi".
double json_number(const nlohmann::json& doc, const std::string& field);

}  // namespace pfreq
