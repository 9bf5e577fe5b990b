#include <CLI11.hpp>

#include <iostream>

#include "pfreq/commands.hpp"
#include "pfreq/errors.hpp"
#include "pfreq/suite.hpp"

namespace {

pfreq::RunOptions make_options(const std::string& out, double tol_scale, const std::optional<std::uint64_t>& seed) {
    pfreq::RunOptions o;
    o.out = out;
    o.tol_scale = tol_scale;
    o.seed = seed;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pfreq: parabolic frequency experiments and checks"};
    app.require_subcommand(1);

    std::string config;
    std::string out = "pfreq-out";
    double tol_scale = 1.0;
    std::optional<std::uint64_t> seed;
    std::size_t k = 6;
    bool corrupt = false;
    std::string target;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config, "experiment config (JSON)");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "seed for random descriptors");
        cmd->add_option("--out", out, "output directory")->capture_default_str();
        cmd->add_option("--tol-scale", tol_scale, "multiplies every tolerance")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "evolve a configured experiment and check it");
    add_common(simulate, true);
    auto* check = app.add_subcommand("check", "run the property suite");
    add_common(check, false);
    check->add_option("target", target, "suite to run")->required()->check(CLI::IsMember({"all"}));
    check->add_flag("--corrupt", corrupt, "use a defective operator (negative control)");
    auto* eigen = app.add_subcommand("eigen", "leading eigenvalues of the drift Laplacian");
    add_common(eigen, true);
    eigen->add_option("--k", k, "number of eigenvalues")->capture_default_str();
    auto* poon = app.add_subcommand("poon", "Poon frequency curve for a closed-form oracle");
    add_common(poon, true);
    auto* sweep = app.add_subcommand("sweep", "run an experiment over a list of parameter values");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? pfreq::kExitPass : pfreq::kExitConfigError;
    }

    const pfreq::RunOptions options = make_options(out, tol_scale, seed);
    try {
        if (*simulate) {
            const pfreq::ExperimentConfig cfg = pfreq::parse_experiment(pfreq::load_json(config), seed);
            pfreq::RunOptions run = options;
            if (simulate->count("--out") == 0 && cfg.output) run.out = *cfg.output;
            return pfreq::run_simulate(cfg, run, std::cout);
        }
        if (*check) return pfreq::run_check_all(seed.value_or(pfreq::kDefaultSeed), corrupt, options, std::cout);
        if (*eigen) {
            const auto doc = pfreq::load_json(config);
            const auto& geometry = doc.contains("geometry") ? doc.at("geometry") : doc;
            return pfreq::run_eigen(pfreq::parse_geometry_config(geometry), k, options, std::cout);
        }
        if (*poon) return pfreq::run_poon(pfreq::load_json(config), options, std::cout);
        if (*sweep) return pfreq::run_sweep(pfreq::load_json(config), options, std::cout);
    } catch (const std::exception& e) {
        return pfreq::exit_code_for(e, std::cerr);
    }
    return pfreq::kExitConfigError;
}
