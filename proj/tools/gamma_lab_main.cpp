// gamma-lab command line front end: deterministic experiment runs with CSV artifacts.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "gammalab/errors.hpp"
#include "gammalab/experiment.hpp"

namespace {

void add_common_options(CLI::App* cmd, gammalab::ExperimentPlan& plan, std::string& ladder_text) {
    cmd->add_option("--profile", plan.profile_kind, "kernel kind: indicator|saturating|bump|table");
    cmd->add_option("--p", plan.p, "exponent p >= 1");
    cmd->add_option("--scale", plan.profile_scale, "explicit kernel scale (omit to normalize)");
    cmd->add_option("--table", plan.profile_table, "sample file for --profile table");
    cmd->add_option("--fn", plan.fn_spec, "function: U|H|H@c|tent|zero|const@c|affine@s,i|stair@h|file:PATH");
    auto* ia = cmd->add_option("--interval-a", plan.interval_a, "domain left endpoint");
    auto* ib = cmd->add_option("--interval-b", plan.interval_b, "domain right endpoint");
    ia->each([&plan](const std::string&) { plan.interval_set = true; });
    ib->each([&plan](const std::string&) { plan.interval_set = true; });
    cmd->add_flag("--on-line", plan.on_line, "evaluate over the whole line (window + tails)");
    cmd->add_option("--delta", plan.delta, "single delta");
    cmd->add_option("--ladder", ladder_text, "explicit delta ladder, comma separated");
    cmd->add_option("--ladder-start", plan.ladder_start, "generated ladder start");
    cmd->add_option("--ladder-factor", plan.ladder_factor, "geometric ladder factor");
    cmd->add_option("--ladder-count", plan.ladder_count, "generated ladder length");
    cmd->add_option("--ladder-rule", plan.ladder_rule, "ladder rule: geometric|log");
    cmd->add_option("--rel-tol", plan.quad.rel_tol, "quadrature relative tolerance");
    cmd->add_option("--gauss-order", plan.quad.gauss_order, "panel Gauss order");
    cmd->add_option("--max-depth", plan.quad.max_subdivision_depth, "adaptive subdivision depth");
    cmd->add_option("--nodes", plan.nodes, "optimizer grid resolution");
    cmd->add_option("--restarts", plan.opt.restarts, "optimizer restarts");
    cmd->add_option("--anneal-steps", plan.opt.anneal_steps, "annealing steps per start");
    cmd->add_option("--polish-sweeps", plan.opt.polish_sweeps, "coordinate polish sweeps");
    cmd->add_option("--count", plan.invariants_count, "invariant corpus size");
    cmd->add_option("--seed", plan.seed, "64-bit run seed")->each([&plan](const std::string&) {
        plan.opt.seed = plan.seed;
    });
    cmd->add_option("--out", plan.out_dir, "output directory for artifacts");
}

} // namespace

int main(int argc, char** argv) {
    gammalab::ExperimentPlan plan;

    // --config is applied first so explicit flags can override it
    std::string config_path;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (std::string(argv[i]) == "--config" && i + 1 < argc) config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) plan = gammalab::parse_config_file(config_path);
    } catch (const gammalab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gammalab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    }

    CLI::App app{"gamma-lab: nonlocal energy laboratory"};
    app.require_subcommand(0, 1);
    std::string ladder_text;
    std::string dummy_config;
    app.add_option("--config", dummy_config, "key=value configuration file");

    const std::vector<std::string> commands{"check-profile", "eval", "scan", "kappa",
                                            "gamma1d", "recover", "invariants"};
    for (const auto& name : commands) {
        CLI::App* cmd = app.add_subcommand(name, "");
        cmd->add_option("--config", dummy_config, "key=value configuration file");
        add_common_options(cmd, plan, ladder_text);
        cmd->callback([&plan, name] { plan.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (!ladder_text.empty()) {
        try {
            gammalab::apply_config_entry(plan, "ladder.list", ladder_text);
        } catch (const gammalab::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    if (plan.command.empty()) {
        std::cerr << "no command given; use one of: check-profile eval scan kappa gamma1d "
                     "recover invariants\n";
        return 2;
    }

    try {
        return gammalab::run(plan);
    } catch (const gammalab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gammalab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const gammalab::InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return 4;
    } catch (const gammalab::InvalidSpec& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return 4;
    } catch (const gammalab::QuadratureFailure& e) {
        std::cerr << "quadrature failure: " << e.what() << "\n";
        return 5;
    } catch (const gammalab::DegenerateProfile& e) {
        std::cerr << "degenerate profile: " << e.what() << "\n";
        return 6;
    } catch (const gammalab::EstimationFailure& e) {
        std::cerr << "estimation failure: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
