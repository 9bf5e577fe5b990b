#include "pfreq/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "pfreq/errors.hpp"
#include "pfreq/sampling.hpp"

namespace pfreq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw Error(ErrorKind::config_error, field + ": " + message);
}

Expression parse_expression(const json& value, const std::string& field) {
    std::string source;
    if (value.is_string()) {
        source = value.get<std::string>();
    } else if (value.is_number()) {
        source = nlohmann::json(value).dump();
    } else {
        fail(field, "expected an expression string");
    }
    try {
        return Expression::parse(source);
    } catch (const Error& e) {
        fail(field, e.detail());
    }
}

std::size_t json_count(const json& doc, const std::string& field, const std::string& path, std::size_t minimum) {
    const json& v = doc.at(field);
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
    const long long n = v.get<long long>();
    if (n < static_cast<long long>(minimum)) {
        fail(path, "must be >= " + std::to_string(minimum) + ", got " + std::to_string(n));
    }
    return static_cast<std::size_t>(n);
}

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : doc.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

GeometryConfig parse_geometry(const json& doc) {
    if (!doc.is_object()) fail("geometry", "expected an object");
    if (!doc.contains("kind")) fail("geometry.kind", "missing");
    GeometryConfig g;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "circle") {
        reject_unknown(doc, {"kind", "nodes", "length", "phi"}, "geometry");
        g.kind = GeometryKind::circle;
        if (doc.contains("nodes")) g.nodes = json_count(doc, "nodes", "geometry.nodes", 4);
        if (doc.contains("length")) g.length = json_number(doc, "length");
    } else if (kind == "torus2d") {
        reject_unknown(doc, {"kind", "nx", "ny", "lx", "ly", "phi", "psi"}, "geometry");
        g.kind = GeometryKind::torus2d;
        if (doc.contains("nx")) g.nx = json_count(doc, "nx", "geometry.nx", 4);
        if (doc.contains("ny")) g.ny = json_count(doc, "ny", "geometry.ny", 4);
        if (doc.contains("lx")) g.lx = json_number(doc, "lx");
        if (doc.contains("ly")) g.ly = json_number(doc, "ly");
    } else if (kind == "gauss-line") {
        reject_unknown(doc, {"kind", "order"}, "geometry");
        g.kind = GeometryKind::gauss_line;
        if (doc.contains("order")) g.order = static_cast<int>(json_count(doc, "order", "geometry.order", 4));
    } else {
        fail("geometry.kind", "expected circle, torus2d or gauss-line, got '" + kind + "'");
    }
    if (doc.contains("phi")) g.phi = parse_expression(doc.at("phi"), "geometry.phi");
    if (doc.contains("psi")) g.psi = parse_expression(doc.at("psi"), "geometry.psi");
    for (double len : {g.length, g.lx, g.ly}) {
        if (len < 0.0 || !std::isfinite(len)) fail("geometry", "lengths must be positive");
    }
    if (g.phi.uses_variable('t') || g.psi.uses_variable('t')) fail("geometry", "phi and psi cannot depend on t");
    return g;
}

InitialConfig parse_initial(const json& doc, std::optional<std::uint64_t> cli_seed) {
    if (!doc.is_object()) fail("initial", "expected an object");
    InitialConfig ic;
    const int given = static_cast<int>(doc.contains("expression")) + static_cast<int>(doc.contains("eigenmode")) +
                      static_cast<int>(doc.contains("random"));
    if (given != 1) fail("initial", "exactly one of expression, eigenmode or random is required");
    reject_unknown(doc, {"expression", "eigenmode", "random"}, "initial");
    if (doc.contains("expression")) {
        ic.mode = InitialConfig::Mode::expression;
        const json& e = doc.at("expression");
        if (e.is_array()) {
            if (e.empty()) fail("initial.expression", "needs at least one component");
            for (std::size_t i = 0; i < e.size(); ++i) {
                ic.expressions.push_back(parse_expression(e[i], "initial.expression[" + std::to_string(i) + "]"));
            }
        } else {
            ic.expressions.push_back(parse_expression(e, "initial.expression"));
        }
        ic.components = static_cast<int>(ic.expressions.size());
    } else if (doc.contains("eigenmode")) {
        ic.mode = InitialConfig::Mode::eigenmode;
        ic.eigenmode = json_count(doc, "eigenmode", "initial.eigenmode", 0);
    } else {
        ic.mode = InitialConfig::Mode::random;
        const json& r = doc.at("random");
        if (!r.is_object()) fail("initial.random", "expected an object");
        reject_unknown(r, {"seed", "modes", "components"}, "initial.random");
        if (r.contains("seed")) {
            if (!r.at("seed").is_number_integer()) fail("initial.random.seed", "expected an integer");
            ic.seed = r.at("seed").get<std::uint64_t>();
        } else {
            ic.seed = cli_seed;
        }
        if (!ic.seed) fail("initial.random.seed", "random initial data requires a seed (config or --seed)");
        if (r.contains("modes")) ic.modes = static_cast<int>(json_count(r, "modes", "initial.random.modes", 1));
        if (r.contains("components")) {
            ic.components = static_cast<int>(json_count(r, "components", "initial.random.components", 1));
        }
    }
    return ic;
}

}  // namespace

GeometryConfig parse_geometry_config(const json& doc) {
    try {
        return parse_geometry(doc);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config_error, std::string("geometry: ") + e.what());
    }
}

double json_number(const json& doc, const std::string& field) {
    const json& v = doc.at(field);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const Expression e = parse_expression(v, field);
        if (e.uses_variable('x') || e.uses_variable('y') || e.uses_variable('t')) fail(field, "must be a constant");
        const double value = e();
        if (!std::isfinite(value)) fail(field, "is not finite");
        return value;
    }
    fail(field, "expected a number");
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot read config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config_error, path.string() + ": " + e.what());
    }
}

ExperimentConfig parse_experiment(const json& doc, std::optional<std::uint64_t> cli_seed) {
    try {
        if (!doc.is_object()) fail("config", "expected an object");
        reject_unknown(doc, {"geometry", "initial", "time", "integrator", "perturbation", "gauge", "checks", "output"},
                       "");
        ExperimentConfig cfg;
        if (!doc.contains("geometry")) fail("geometry", "missing");
        cfg.geometry = parse_geometry(doc.at("geometry"));
        if (!doc.contains("initial")) fail("initial", "missing");
        cfg.initial = parse_initial(doc.at("initial"), cli_seed);

        if (doc.contains("time")) {
            const json& t = doc.at("time");
            reject_unknown(t, {"a", "b", "steps"}, "time");
            if (t.contains("a")) cfg.a = json_number(t, "a");
            if (t.contains("b")) cfg.b = json_number(t, "b");
            if (t.contains("steps")) cfg.steps = json_count(t, "steps", "time.steps", 1);
        }
        if (!(cfg.a < cfg.b)) fail("time", "requires a < b");

        if (doc.contains("integrator")) {
            const std::string name = doc.at("integrator").get<std::string>();
            if (name == "exact") {
                cfg.integrator = Integrator::exact;
            } else if (name == "cn") {
                cfg.integrator = Integrator::cn;
            } else {
                fail("integrator", "expected exact or cn, got '" + name + "'");
            }
        }

        if (doc.contains("perturbation")) {
            const json& p = doc.at("perturbation");
            reject_unknown(p, {"b", "c", "bound"}, "perturbation");
            PerturbationConfig pc;
            const int dim = cfg.geometry.kind == GeometryKind::torus2d ? 2 : 1;
            if (p.contains("b")) {
                const json& b = p.at("b");
                if (b.is_array()) {
                    for (std::size_t i = 0; i < b.size(); ++i) {
                        pc.drift.push_back(parse_expression(b[i], "perturbation.b[" + std::to_string(i) + "]"));
                    }
                } else {
                    pc.drift.push_back(parse_expression(b, "perturbation.b"));
                }
                if (static_cast<int>(pc.drift.size()) != dim) {
                    fail("perturbation.b", "needs " + std::to_string(dim) + " component(s)");
                }
            }
            if (p.contains("c")) pc.potential = parse_expression(p.at("c"), "perturbation.c");
            if (!p.contains("bound")) fail("perturbation.bound", "missing");
            pc.bound = parse_expression(p.at("bound"), "perturbation.bound");
            if (pc.bound.uses_variable('x') || pc.bound.uses_variable('y')) {
                fail("perturbation.bound", "may depend on t only");
            }
            if (cfg.integrator == Integrator::exact) fail("integrator", "perturbations require the cn integrator");
            if (cfg.geometry.kind == GeometryKind::gauss_line) {
                fail("perturbation", "perturbations are supported on periodic geometries only");
            }
            cfg.perturbation = std::move(pc);
        }

        if (doc.contains("gauge")) {
            Expression g = parse_expression(doc.at("gauge"), "gauge");
            if (g.uses_variable('x') || g.uses_variable('y')) fail("gauge", "may depend on t only");
            cfg.gauge = std::move(g);
        }

        if (doc.contains("checks")) {
            const json& list = doc.at("checks");
            if (!list.is_array()) fail("checks", "expected a list");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string where = "checks[" + std::to_string(i) + "]";
                CheckConfig cc;
                if (list[i].is_string()) {
                    cc.name = list[i].get<std::string>();
                } else if (list[i].is_object()) {
                    reject_unknown(list[i], {"name", "tol", "c"}, where);
                    if (!list[i].contains("name")) fail(where + ".name", "missing");
                    cc.name = list[i].at("name").get<std::string>();
                    if (list[i].contains("tol")) {
                        cc.tol = json_number(list[i], "tol");
                        if (*cc.tol < 0.0) fail(where + ".tol", "must be nonnegative");
                    }
                    if (list[i].contains("c")) cc.c = json_number(list[i], "c");
                } else {
                    fail(where, "expected a name or an object");
                }
                cfg.checks.push_back(std::move(cc));
            }
        }
        if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config_error, std::string("malformed config: ") + e.what());
    }
}

GeometryPtr build_geometry(const GeometryConfig& g) {
    const double two_pi = 2.0 * std::numbers::pi;
    auto finite_or_fail = [](const char* field) {
        return [field](double v) {
            if (!std::isfinite(v)) fail(std::string("geometry.") + field, "is not finite on the grid");
            return v;
        };
    };
    switch (g.kind) {
        case GeometryKind::circle: {
            const auto check = finite_or_fail("phi");
            return make_circle(g.nodes, g.length > 0.0 ? g.length : two_pi,
                               [&](double x) { return check(g.phi(x)); });
        }
        case GeometryKind::torus2d: {
            const auto check_phi = finite_or_fail("phi");
            const auto check_psi = finite_or_fail("psi");
            return make_torus(g.nx, g.ny, g.lx > 0.0 ? g.lx : two_pi, g.ly > 0.0 ? g.ly : two_pi,
                              [&](double x, double y) { return check_phi(g.phi(x, y)); },
                              [&](double x, double y) { return check_psi(g.psi(x, y)); });
        }
        case GeometryKind::gauss_line:
            return make_gauss_line(g.order);
    }
    throw Error(ErrorKind::config_error, "geometry.kind: unsupported");
}

Field build_initial(const InitialConfig& ic, const DriftOperator& op) {
    const GeometryPtr& geometry = op.geometry();
    const WeightedGeometry& g = *geometry;
    switch (ic.mode) {
        case InitialConfig::Mode::expression: {
            Eigen::MatrixXd values(static_cast<Eigen::Index>(g.node_count()), ic.components);
            for (int c = 0; c < ic.components; ++c) {
                for (std::size_t i = 0; i < g.node_count(); ++i) {
                    const auto x = g.coordinate(i);
                    const double v = ic.expressions[c](x[0], x.size() > 1 ? x[1] : 0.0, 0.0);
                    if (!std::isfinite(v)) {
                        fail(ic.components > 1 ? "initial.expression[" + std::to_string(c) + "]"
                                               : std::string("initial.expression"),
                             "'" + ic.expressions[c].source() + "' is not finite at node " + std::to_string(i));
                    }
                    values(static_cast<Eigen::Index>(i), c) = v;
                }
            }
            return Field(geometry, std::move(values));
        }
        case InitialConfig::Mode::eigenmode: {
            if (ic.eigenmode >= g.node_count()) {
                fail("initial.eigenmode", "index " + std::to_string(ic.eigenmode) + " exceeds the node count");
            }
            auto pairs = eigenpairs(op, ic.eigenmode + 1);
            return pairs.back().eigenfield;
        }
        case InitialConfig::Mode::random: {
            Rng rng(derive_seed(*ic.seed, 0));
            return random_smooth_field(geometry, ic.modes, rng, ic.components);
        }
    }
    throw Error(ErrorKind::config_error, "initial: unsupported descriptor");
}

std::optional<PerturbationSpec> build_perturbation(const ExperimentConfig& cfg) {
    if (!cfg.perturbation) return std::nullopt;
    const PerturbationConfig& pc = *cfg.perturbation;
    auto space_time = [](const Expression& e) -> SpaceTimeFn {
        return [e](std::span<const double> x, double t) { return e(x[0], x.size() > 1 ? x[1] : 0.0, t); };
    };
    std::vector<SpaceTimeFn> drift;
    for (const Expression& e : pc.drift) drift.push_back(space_time(e));
    SpaceTimeFn potential;
    if (pc.potential) potential = space_time(*pc.potential);
    const Expression bound = pc.bound;
    return PerturbationSpec(std::move(drift), std::move(potential), [bound](double t) { return bound(0.0, 0.0, t); });
}

std::optional<GaugeSpec> build_gauge(const ExperimentConfig& cfg) {
    if (!cfg.gauge) return std::nullopt;
    const Expression lambda = *cfg.gauge;
    return GaugeSpec{[lambda](double t) { return lambda(0.0, 0.0, t); }};
}

}  // namespace pfreq
