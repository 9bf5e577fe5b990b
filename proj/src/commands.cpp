#include "pfreq/commands.hpp"

#include <cmath>
#include <algorithm>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pfreq/covpoon.hpp"
#include "pfreq/errors.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/io.hpp"
#include "pfreq/random.hpp"
#include "pfreq/suite.hpp"

namespace pfreq {

namespace {

using ojson = nlohmann::ordered_json;

std::string geometry_label(const WeightedGeometry& g) {
    std::string out(to_string(g.kind()));
    out += "(";
    for (std::size_t i = 0; i < g.shape().size(); ++i) out += (i ? "x" : "") + std::to_string(g.shape()[i]);
    return out + ")";
}

int finish(const std::string& command, const std::vector<CheckReport>& checks, const ojson& summary,
           std::optional<std::uint64_t> seed, const RunOptions& options, std::ostream& log) {
    const ojson doc = io::make_report(command, checks, summary, seed);
    io::write_json(options.out / "report.json", doc);
    for (const CheckReport& r : checks) {
        log << (r.pass ? "PASS " : "FAIL ") << r.name << "  margin=" << io::format_number(r.worst_margin)
            << "  tol=" << io::format_number(r.tolerance) << '\n';
    }
    const bool pass = doc.at("pass").get<bool>();
    log << (pass ? "all checks passed" : "check failure") << " -> " << (options.out / "report.json").string() << '\n';
    return pass ? kExitPass : kExitCheckFailure;
}

CheckReport gated_by_threshold(std::string name, double value, double tol) {
    CheckReport r;
    r.name = std::move(name);
    r.set_margin(-value, std::nullopt, tol);
    return r;
}

}  // namespace

int exit_code_for(const std::exception& e, std::ostream& log) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        if (err->kind() == ErrorKind::certification_failure) {
            log << "check failure: " << err->detail() << '\n';
            return kExitCheckFailure;
        }
        if (err->kind() == ErrorKind::degenerate_trace || err->kind() == ErrorKind::degenerate_input) {
            log << "error: " << err->what()
                << " (I vanishes: backward-uniqueness regime, the solution is identically zero)\n";
            return kExitConfigError;
        }
    }
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log) {
    const GeometryPtr geometry = build_geometry(cfg.geometry);
    const DriftOperator op = assemble(geometry);
    const Field u0 = build_initial(cfg.initial, op);
    const TimeGrid grid(cfg.a, cfg.b, cfg.steps);
    const std::optional<PerturbationSpec> pert = build_perturbation(cfg);
    const std::optional<GaugeSpec> gauge = build_gauge(cfg);

    std::optional<SpectralDecomposition> spectrum;
    auto need_spectrum = [&]() -> const SpectralDecomposition& {
        if (!spectrum) spectrum = decompose(op);
        return *spectrum;
    };

    // `reduced` solves the pure drift (or perturbed) flow; the physical solution carries the gauge.
    std::optional<Trajectory> reduced;
    if (pert) {
        try {
            reduced = evolve_perturbed(op, u0, grid, *pert);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::certification_failure) throw;
            CheckReport r;
            r.name = "perturbation_certificate";
            r.set_margin(-1.0, std::nullopt, 0.0);
            r.notes["error"] = e.what();
            ojson summary;
            summary["geometry"] = geometry_label(*geometry);
            log << "certification failure: " << e.detail() << '\n';
            return finish("simulate", {r}, summary, cfg.initial.seed, options, log);
        }
    } else if (cfg.integrator == Integrator::exact) {
        reduced = evolve_exact(need_spectrum(), u0, grid);
    } else {
        reduced = evolve_cn(op, u0, grid);
    }
    const Trajectory physical =
        gauge ? gauge_transform(*reduced, GaugeSpec{[l = gauge->lambda](double t) { return -l(t); }}) : *reduced;
    const Trajectory checked = gauge ? gauge_transform(physical, *gauge) : *reduced;

    const FrequencyTrace trace = frequency_trace(op, checked);
    const FrequencyTrace physical_trace = gauge ? frequency_trace(op, physical) : trace;
    const double default_tol = tolerance_model(trace);

    std::vector<CheckConfig> checks = cfg.checks;
    if (checks.empty()) {
        if (pert) {
            checks = {{"general_frequency", {}, {}}, {"general_lower_bound", {}, {}}};
            if (pert->gradient_only() && trace.U.front() < 0.0) checks.push_back({"gradient_only", {}, {}});
        } else {
            checks = {{"U_monotone", {}, {}}, {"logI_convexity", {}, {}}, {"hadamard_bound", {}, {}}, {"rigidity", {}, {}}};
        }
        if (gauge) checks.push_back({"gauge_invariance", {}, {}});
    }

    const TimeFn C = pert ? pert->bound() : TimeFn{};
    std::vector<CheckReport> reports;
    for (const CheckConfig& cc : checks) {
        const double tol = cc.tol.value_or(default_tol) * options.tol_scale;
        if (cc.name == "U_monotone") {
            reports.push_back(check_U_monotone(trace, tol));
        } else if (cc.name == "logI_convexity") {
            reports.push_back(check_logI_convexity(trace, tol));
        } else if (cc.name == "hadamard_bound") {
            reports.push_back(check_hadamard_bound(trace, tol));
        } else if (cc.name == "rigidity") {
            reports.push_back(check_rigidity(op, checked, tol));
        } else if (cc.name == "general_frequency") {
            reports.push_back(check_general_frequency(trace, C, tol));
        } else if (cc.name == "general_lower_bound") {
            reports.push_back(check_general_lower_bound(trace, C, tol));
        } else if (cc.name == "gradient_only") {
            reports.push_back(check_gradient_only(trace, C, tol));
        } else if (cc.name == "vanishing_order") {
            reports.push_back(vanishing_order_surrogate(trace, cc.c.value_or(0.0), tol));
        } else if (cc.name == "self_adjoint") {
            reports.push_back(check_self_adjoint(op, 50, derive_seed(cfg.initial.seed.value_or(0), 1),
                                                 cc.tol.value_or(1e-10) * options.tol_scale));
        } else if (cc.name == "spectral_identities") {
            if (pert || gauge) {
                throw Error(ErrorKind::config_error, "checks: spectral_identities applies to unperturbed, ungauged runs");
            }
            reports.push_back(check_spectral_identities(op, need_spectrum(), u0, grid, cc.tol.value_or(1e-8) * options.tol_scale));
        } else if (cc.name == "gauge_invariance") {
            double gap = 0.0;
            for (std::size_t k = 0; k < trace.size(); ++k) {
                gap = std::max(gap, std::abs(trace.U[k] - physical_trace.U[k]) / std::max(1.0, std::abs(trace.U[k])));
            }
            CheckReport r = gated_by_threshold("gauge_invariance", gap, cc.tol.value_or(1e-12) * options.tol_scale);
            r.aux["max_relative_U_gap"] = gap;
            reports.push_back(std::move(r));
        } else {
            throw Error(ErrorKind::config_error, "checks: unknown check '" + cc.name + "'");
        }
    }

    io::write_trajectory_csv(options.out / "trajectory.csv", physical);
    io::write_trace_csv(options.out / "trace.csv", physical_trace);
    if (gauge) io::write_trace_csv(options.out / "reduced_trace.csv", trace);

    ojson summary;
    summary["geometry"] = geometry_label(*geometry);
    summary["integrator"] = pert ? "cn-perturbed" : (cfg.integrator == Integrator::exact ? "exact" : "cn");
    summary["provenance"] = std::string(to_string(trace.provenance));
    summary["samples"] = trace.size();
    summary["components"] = u0.components();
    summary["I_a"] = trace.I.front();
    summary["I_b"] = trace.I.back();
    summary["U_a"] = trace.U.front();
    summary["U_b"] = trace.U.back();
    summary["default_tolerance"] = default_tol;
    summary["tol_scale"] = options.tol_scale;
    summary["max_D_form_gap"] = trace.max_D_form_gap;
    summary["gauge"] = cfg.gauge ? ojson(cfg.gauge->source()) : ojson(nullptr);
    log << "U(a)=" << io::format_number(trace.U.front()) << "  U(b)=" << io::format_number(trace.U.back()) << '\n';
    return finish("simulate", reports, summary, cfg.initial.seed, options, log);
}

int run_eigen(const GeometryConfig& gc, std::size_t k, const RunOptions& options, std::ostream& log) {
    const GeometryPtr geometry = build_geometry(gc);
    if (k == 0 || k > geometry->node_count()) {
        throw Error(ErrorKind::config_error, "--k must be between 1 and the node count (" +
                                                 std::to_string(geometry->node_count()) + "), got " + std::to_string(k));
    }
    const DriftOperator op = assemble(geometry);
    const SpectralDecomposition spectrum = decompose(op);
    const std::vector<EigenPair> pairs = eigenpairs(spectrum, k);
    std::vector<double> values;
    double residual = 0.0;
    for (const EigenPair& p : pairs) {
        values.push_back(p.eigenvalue);
        const Field Lu = op.apply(p.eigenfield);
        const Field diff = Lu.with_values(Lu.values() - p.eigenvalue * p.eigenfield.values());
        residual = std::max(residual, weighted_norm(diff) / std::max(1.0, std::abs(p.eigenvalue)));
    }
    io::write_spectrum_csv(options.out / "spectrum.csv", values);

    std::vector<CheckReport> reports;
    CheckReport res = gated_by_threshold("eigen_residual", residual, 1e-8 * options.tol_scale);
    res.aux["max_relative_residual"] = residual;
    reports.push_back(std::move(res));

    // Closed-form references where the geometry has one.
    std::optional<std::vector<double>> reference;
    const bool flat = gc.phi.source() == "0" && gc.psi.source() == "0";
    if (gc.kind == GeometryKind::gauss_line) {
        reference = std::vector<double>(k);
        for (std::size_t n = 0; n < k; ++n) (*reference)[n] = -0.5 * static_cast<double>(n);
    } else if (flat) {
        std::vector<double> all;
        const auto shape = geometry->shape();
        const auto lengths = geometry->lengths();
        auto axis = [&](std::size_t a, std::size_t m) {
            const double h = lengths[a] / static_cast<double>(shape[a]);
            const double s = std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(shape[a]));
            return -(4.0 / (h * h)) * s * s;
        };
        const std::size_t ny = shape.size() > 1 ? shape[1] : 1;
        for (std::size_t mx = 0; mx < shape[0]; ++mx) {
            for (std::size_t my = 0; my < ny; ++my) all.push_back(axis(0, mx) + (shape.size() > 1 ? axis(1, my) : 0.0));
        }
        std::sort(all.begin(), all.end(), std::greater<>());
        all.resize(k);
        reference = std::move(all);
    }
    if (reference) {
        double gap = 0.0;
        for (std::size_t i = 0; i < k; ++i) gap = std::max(gap, std::abs(values[i] - (*reference)[i]));
        CheckReport r = gated_by_threshold("reference_spectrum", gap, 1e-9 * options.tol_scale);
        r.aux["max_abs_gap"] = gap;
        r.notes["reference"] = gc.kind == GeometryKind::gauss_line ? "-n/2" : "discrete Fourier symbol";
        reports.push_back(std::move(r));
    }
    ojson summary;
    summary["geometry"] = geometry_label(*geometry);
    summary["k"] = k;
    summary["eigenvalues"] = values;
    return finish("eigen", reports, summary, std::nullopt, options, log);
}

int run_poon(const nlohmann::json& doc, const RunOptions& options, std::ostream& log) {
    OracleKind kind;
    int dimension = 1;
    OracleParams params;
    std::vector<double> s_grid;
    double tol = 1e-8;
    try {
        kind = oracle_kind_from_string(doc.at("oracle").get<std::string>());
        if (doc.contains("dimension")) dimension = doc.at("dimension").get<int>();
        if (doc.contains("constant")) params.constant = json_number(doc, "constant");
        if (doc.contains("linear")) params.linear = doc.at("linear").get<std::vector<double>>();
        if (doc.contains("terms")) {
            for (const auto& t : doc.at("terms")) {
                const auto row = t.get<std::vector<double>>();
                if (row.size() < 2 || row.size() > 3) {
                    throw Error(ErrorKind::config_error, "terms: each term is [coefficient, px] or [coefficient, px, py]");
                }
                params.polynomial.add(row[0], static_cast<int>(row[1]), row.size() == 3 ? static_cast<int>(row[2]) : 0);
            }
        }
        if (doc.contains("caloric")) params.caloric_completion = doc.at("caloric").get<bool>();
        if (doc.contains("pole")) params.kernel_pole = json_number(doc, "pole");
        double a = 0.0, b = 2.0;
        std::size_t steps = 20;
        if (doc.contains("s")) {
            const auto& s = doc.at("s");
            if (s.contains("a")) a = json_number(s, "a");
            if (s.contains("b")) b = json_number(s, "b");
            if (s.contains("steps")) {
                const long long n = s.at("steps").get<long long>();
                if (n < 2) throw Error(ErrorKind::config_error, "s.steps: must be >= 2, got " + std::to_string(n));
                steps = static_cast<std::size_t>(n);
            }
        }
        if (!(a < b)) throw Error(ErrorKind::config_error, "s: requires a < b");
        if (doc.contains("tol")) tol = json_number(doc, "tol");
        const TimeGrid grid(a, b, steps);
        s_grid = grid.times();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config_error, std::string("malformed poon config: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_input) throw Error(ErrorKind::config_error, e.detail());
        throw;
    }
    const HeatOracle oracle = make_oracle(kind, dimension, params);
    std::vector<io::PoonRow> rows;
    for (double s : s_grid) {
        const double R = std::exp(-0.5 * s);
        if (!oracle.defined_at(-R * R)) {
            throw Error(ErrorKind::config_error, "s: the oracle is undefined at t = -e^{-s} for s = " + io::format_number(s));
        }
        rows.push_back({s, R, poon_H(oracle, R)});
    }
    io::write_poon_csv(options.out / "poon.csv", rows);

    std::vector<CheckReport> reports;
    reports.push_back(check_I_equals_H(oracle, s_grid, tol * options.tol_scale));
    if (oracle.defined_at(-std::exp(s_grid.back()))) {
        reports.push_back(check_poon_convexity(oracle, s_grid, tol * options.tol_scale));
    } else {
        log << "note: H(e^{s/2}) is undefined on part of the grid; convexity skipped\n";
    }
    if (dimension == 1 && oracle.caloric()) {
        const GeometryPtr gl = make_gauss_line(std::max(32, oracle.polynomial_degree() + 8));
        const DriftOperator op = assemble(gl);
        const TimeGrid grid(s_grid.front(), s_grid.back(), s_grid.size() - 1);
        const FrequencyTrace t = frequency_trace(op, cov_trajectory(cov_transform(oracle), gl, grid));
        CheckReport mono = check_U_monotone(t, 1e-9 * options.tol_scale);
        mono.name = "drift_flow_U_monotone";
        reports.push_back(std::move(mono));
    }
    ojson summary;
    summary["oracle"] = std::string(to_string(kind));
    summary["dimension"] = dimension;
    summary["H_normalization"] = "(4 pi R^2)^(-n/2)";
    summary["R_convention"] = "R = e^{-s/2}";
    return finish("poon", reports, summary, std::nullopt, options, log);
}

int run_sweep(const nlohmann::json& doc, const RunOptions& options, std::ostream& log) {
    nlohmann::json base;
    nlohmann::json::json_pointer pointer;
    std::vector<nlohmann::json> values;
    try {
        base = doc.at("base");
        pointer = nlohmann::json::json_pointer(doc.at("parameter").get<std::string>());
        values = doc.at("values").get<std::vector<nlohmann::json>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config_error, std::string("sweep needs base, parameter and values: ") + e.what());
    }
    if (values.empty()) throw Error(ErrorKind::config_error, "values: needs at least one entry");
    int worst = kExitPass;
    ojson runs = ojson::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::ostringstream name;
        name << "run_" << std::setw(3) << std::setfill('0') << i;
        RunOptions ro = options;
        ro.out = options.out / name.str();
        nlohmann::json instance = base;
        instance[pointer] = values[i];
        log << "[" << name.str() << "] " << pointer.to_string() << " = " << values[i].dump() << '\n';
        int code;
        try {
            code = run_simulate(parse_experiment(instance, options.seed), ro, log);
        } catch (const std::exception& e) {
            code = exit_code_for(e, log);
        }
        worst = std::max(worst, code);
        ojson entry;
        entry["run"] = name.str();
        entry["value"] = ojson::parse(values[i].dump());
        entry["exit"] = code;
        runs.push_back(std::move(entry));
    }
    ojson summary;
    summary["schema"] = io::kReportSchema;
    summary["command"] = "sweep";
    summary["parameter"] = pointer.to_string();
    summary["runs"] = std::move(runs);
    summary["pass"] = worst == kExitPass;
    io::write_json(options.out / "sweep.json", summary);
    return worst;
}

int run_check_all(std::uint64_t seed, bool corrupt, const RunOptions& options, std::ostream& log) {
    SuiteOptions so;
    so.seed = seed;
    so.corrupt = corrupt;
    so.tol_scale = options.tol_scale;
    const std::vector<SuiteSection> sections = run_property_suite(so);
    std::vector<CheckReport> all;
    for (const SuiteSection& s : sections) {
        log << "[" << s.name << "] " << (s.pass() ? "pass" : "FAIL") << " (" << std::fixed << std::setprecision(2)
            << s.seconds << " s)\n"
            << std::defaultfloat;
        for (const CheckReport& r : s.checks) all.push_back(r);
    }
    ojson summary;
    summary["sections"] = sections.size();
    summary["checks"] = all.size();
    summary["corrupt"] = corrupt;
    return finish("check all", all, summary, seed, options, log);
}

}  // namespace pfreq
