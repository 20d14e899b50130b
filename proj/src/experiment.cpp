#include "gammalab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gammalab/errors.hpp"
#include "gammalab/invariants.hpp"
#include "gammalab/recovery.hpp"

namespace gammalab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_u64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw ConfigError("malformed number in list: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

} // namespace

std::vector<double> ExperimentPlan::resolve_ladder() const {
    const bool has_explicit = !ladder.empty();
    const bool has_generated = ladder_count > 0 || ladder_start > 0.0 || ladder_factor > 0.0 ||
                               !ladder_rule.empty();
    if (has_explicit && has_generated)
        throw ConfigError("conflicting ladder specifications (explicit list and generator)");
    if (has_explicit) {
        auto out = ladder;
        for (double d : out)
            if (!(d > 0.0)) throw ConfigError("ladder entries must be positive");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (!(out[i] < out[i - 1])) throw ConfigError("ladder must be strictly decreasing");
        return out;
    }
    if (has_generated) {
        if (!(ladder_start > 0.0) || ladder_count < 1)
            throw ConfigError("ladder generator needs ladder.start > 0 and ladder.count >= 1");
        const std::string rule = ladder_rule.empty() ? "geometric" : ladder_rule;
        if (rule == "log") return log_ladder(ladder_start, ladder_count);
        if (rule == "geometric") {
            const double factor = ladder_factor > 0.0 ? ladder_factor : 0.5;
            if (!(factor < 1.0)) throw ConfigError("geometric ladder factor must be in (0,1)");
            std::vector<double> out;
            double d = ladder_start;
            for (int i = 0; i < ladder_count; ++i, d *= factor) out.push_back(d);
            return out;
        }
        throw ConfigError("unknown ladder rule: " + rule);
    }
    if (delta > 0.0) return {delta};
    throw ConfigError("no delta ladder given (use ladder.list, ladder.start/count, or delta)");
}

std::map<std::string, std::string> ExperimentPlan::effective_config() const {
    std::map<std::string, std::string> kv;
    kv["command"] = command;
    kv["profile.kind"] = profile_kind;
    kv["profile.p"] = fmt17(p);
    kv["profile.scale"] = fmt17(profile_scale);
    kv["profile.table"] = profile_table;
    kv["fn.spec"] = fn_spec;
    kv["fn.interval_a"] = fmt17(interval_a);
    kv["fn.interval_b"] = fmt17(interval_b);
    kv["fn.on_line"] = on_line ? "1" : "0";
    std::string lad;
    for (std::size_t i = 0; i < ladder.size(); ++i) lad += (i ? "," : "") + fmt17(ladder[i]);
    kv["ladder.list"] = lad;
    kv["ladder.start"] = fmt17(ladder_start);
    kv["ladder.factor"] = fmt17(ladder_factor);
    kv["ladder.count"] = std::to_string(ladder_count);
    kv["ladder.rule"] = ladder_rule;
    kv["delta"] = fmt17(delta);
    kv["quad.rel_tol"] = fmt17(quad.rel_tol);
    kv["quad.gauss_order"] = std::to_string(quad.gauss_order);
    kv["quad.max_depth"] = std::to_string(quad.max_subdivision_depth);
    kv["quad.diagonal_band_refinement"] = std::to_string(quad.diagonal_band_refinement);
    kv["quad.divergence_probe_levels"] = std::to_string(quad.divergence_probe_levels);
    kv["opt.restarts"] = std::to_string(opt.restarts);
    kv["opt.anneal_steps"] = std::to_string(opt.anneal_steps);
    kv["opt.initial_temperature"] = fmt17(opt.initial_temperature);
    kv["opt.cooling"] = fmt17(opt.cooling);
    kv["opt.polish_sweeps"] = std::to_string(opt.polish_sweeps);
    kv["opt.search_rel_tol"] = fmt17(opt.search_rel_tol);
    kv["nodes"] = std::to_string(nodes);
    kv["invariants.count"] = std::to_string(invariants_count);
    kv["seed"] = fmt_u64(seed);
    kv["out"] = out_dir;
    kv["version"] = kVersionString;
    return kv;
}

void apply_config_entry(ExperimentPlan& plan, const std::string& key, const std::string& value) {
    auto to_double = [&](const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            throw ConfigError(std::string("bad numeric value for ") + what + ": '" + value + "'");
        }
    };
    auto to_int = [&](const char* what) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            throw ConfigError(std::string("bad integer value for ") + what + ": '" + value + "'");
        }
    };

    if (key == "command") plan.command = value;
    else if (key == "profile.kind") plan.profile_kind = value;
    else if (key == "profile.p") plan.p = to_double("profile.p");
    else if (key == "profile.scale") plan.profile_scale = to_double("profile.scale");
    else if (key == "profile.table") plan.profile_table = value;
    else if (key == "fn.spec") plan.fn_spec = value;
    else if (key == "fn.interval_a") { plan.interval_a = to_double("fn.interval_a"); plan.interval_set = true; }
    else if (key == "fn.interval_b") { plan.interval_b = to_double("fn.interval_b"); plan.interval_set = true; }
    else if (key == "fn.on_line") plan.on_line = value == "1" || value == "true";
    else if (key == "ladder.list") plan.ladder = parse_double_list(value);
    else if (key == "ladder.start") plan.ladder_start = to_double("ladder.start");
    else if (key == "ladder.factor") plan.ladder_factor = to_double("ladder.factor");
    else if (key == "ladder.count") plan.ladder_count = to_int("ladder.count");
    else if (key == "ladder.rule") plan.ladder_rule = value;
    else if (key == "delta") plan.delta = to_double("delta");
    else if (key == "quad.rel_tol") plan.quad.rel_tol = to_double("quad.rel_tol");
    else if (key == "quad.gauss_order") plan.quad.gauss_order = to_int("quad.gauss_order");
    else if (key == "quad.max_depth") plan.quad.max_subdivision_depth = to_int("quad.max_depth");
    else if (key == "quad.diagonal_band_refinement") plan.quad.diagonal_band_refinement = to_int(key.c_str());
    else if (key == "quad.divergence_probe_levels") plan.quad.divergence_probe_levels = to_int(key.c_str());
    else if (key == "opt.restarts") plan.opt.restarts = to_int("opt.restarts");
    else if (key == "opt.anneal_steps") plan.opt.anneal_steps = to_int("opt.anneal_steps");
    else if (key == "opt.initial_temperature") plan.opt.initial_temperature = to_double(key.c_str());
    else if (key == "opt.cooling") plan.opt.cooling = to_double("opt.cooling");
    else if (key == "opt.polish_sweeps") plan.opt.polish_sweeps = to_int("opt.polish_sweeps");
    else if (key == "opt.search_rel_tol") plan.opt.search_rel_tol = to_double(key.c_str());
    else if (key == "nodes") plan.nodes = to_int("nodes");
    else if (key == "invariants.count") plan.invariants_count = to_int("invariants.count");
    else if (key == "seed") {
        try {
            plan.seed = std::stoull(value);
        } catch (...) {
            throw ConfigError("bad seed value: '" + value + "'");
        }
        plan.opt.seed = plan.seed;
    } else if (key == "out") plan.out_dir = value;
    else throw ConfigError("unknown configuration key: '" + key + "'");
}

ExperimentPlan parse_config_stream(std::istream& is) {
    ExperimentPlan plan;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_entry(plan, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return plan;
}

ExperimentPlan parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    return parse_config_stream(is);
}

namespace {

PhiProfile build_profile(const ExperimentPlan& plan) {
    PhiProfile base = [&] {
        if (plan.profile_kind == "indicator")
            return PhiProfile::indicator_step(plan.p, plan.profile_scale > 0 ? plan.profile_scale : 1.0);
        if (plan.profile_kind == "saturating")
            return PhiProfile::saturating_power(plan.p, plan.profile_scale > 0 ? plan.profile_scale : 1.0);
        if (plan.profile_kind == "bump")
            return PhiProfile::compact_bump(plan.p, plan.profile_scale > 0 ? plan.profile_scale : 1.0);
        if (plan.profile_kind == "table") {
            if (plan.profile_table.empty()) throw ConfigError("profile.kind=table needs profile.table=PATH");
            return PhiProfile::load_tabulated(plan.profile_table, plan.p,
                                              plan.profile_scale > 0 ? plan.profile_scale : 1.0);
        }
        throw ConfigError("unknown profile kind: '" + plan.profile_kind + "'");
    }();
    if (plan.profile_scale > 0.0) {
        // explicit scale: flag as normalized only when it actually is
        try {
            if (std::abs(normalization_integral(base) - 0.5) <= 1e-9)
                base = base.with_normalized_flag(true);
        } catch (const QuadratureFailure&) {
        }
        return base;
    }
    return normalize(base);
}

PiecewiseLinearFn build_function(const ExperimentPlan& plan) {
    const std::string& spec = plan.fn_spec;
    auto tail_after = [&](char sep) { return spec.substr(spec.find(sep) + 1); };
    double a = plan.interval_a, b = plan.interval_b;
    if (!plan.interval_set && spec == "tent") {
        a = 0.0;
        b = 2.0;
    }
    const Interval iv = make_interval(a, b);
    if (spec == "U") return make_affine(iv, 1.0, 0.0);
    if (spec == "H") return make_heaviside(iv, 0.5 * (a + b));
    if (spec.rfind("H@", 0) == 0) return make_heaviside(iv, std::stod(tail_after('@')));
    if (spec == "zero") return make_constant(iv, 0.0);
    if (spec.rfind("const@", 0) == 0) return make_constant(iv, std::stod(tail_after('@')));
    if (spec == "tent") {
        const double mid = 0.5 * (a + b);
        return PiecewiseLinearFn::continuous({a, mid, b}, {0.0, mid - a, 0.0});
    }
    if (spec.rfind("affine@", 0) == 0) {
        const auto parts = parse_double_list(tail_after('@'));
        if (parts.size() != 2) throw ConfigError("affine@slope,intercept");
        return make_affine(iv, parts[0], parts[1]);
    }
    if (spec.rfind("stair@", 0) == 0) return make_unit_staircase(std::stod(tail_after('@')));
    if (spec.rfind("file:", 0) == 0) return read_fn_file(tail_after(':'));
    throw ConfigError("unknown function spec: '" + spec + "'");
}

struct Artifacts {
    std::filesystem::path dir;
    std::ofstream csv;
    std::ofstream summary;
    std::ofstream log;

    explicit Artifacts(const ExperimentPlan& plan) : dir(plan.out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory: " + dir.string());
        csv.open(dir / "results.csv");
        summary.open(dir / "summary.txt");
        log.open(dir / "run.log", std::ios::app);
        if (!csv || !summary || !log) throw IoError("cannot open artifact files under " + dir.string());
        const auto cfg = plan.effective_config();
        for (const auto& [k, v] : cfg) csv << "# " << k << "=" << v << "\n";
        summary << "version = " << kVersionString << "\n";
        for (const auto& [k, v] : cfg) summary << "config." << k << " = " << v << "\n";
        const auto now = std::chrono::system_clock::now();
        log << "run at unix time " << std::chrono::duration_cast<std::chrono::seconds>(
                                          now.time_since_epoch())
                                          .count()
            << " command=" << plan.command << "\n";
    }
};

int cmd_check_profile(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const AdmissibilityReport report = verify_conditions(profile);
    art.csv << "alpha_measured,beta_measured,normalization,growth_ok,bounded_ok,normalized_ok\n";
    art.csv << fmt17(report.alpha_measured) << "," << fmt17(report.beta_measured) << ","
            << fmt17(report.normalization) << "," << report.growth_ok << "," << report.bounded_ok
            << "," << report.normalized_ok << "\n";
    art.summary << "profile = " << profile.describe() << "\n";
    art.summary << "normalization = " << fmt17(report.normalization) << "\n";
    art.summary << "alpha_measured = " << fmt17(report.alpha_measured) << "\n";
    art.summary << "beta_measured = " << fmt17(report.beta_measured) << "\n";
    art.summary << "passed = " << (report.passed() ? "yes" : "no") << "\n";
    std::cout << profile.describe() << "\n" << report.format();
    std::cout << "normalization " << fmt17(report.normalization) << ", "
              << (report.passed() ? "pass" : "FAIL") << "\n";
    return 0;
}

int cmd_eval(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const PiecewiseLinearFn fn = build_function(plan);
    const auto ladder = plan.resolve_ladder();
    art.csv << "delta,value,error_estimate,divergent,certificate_location,certificate_jump\n";
    for (double delta : ladder) {
        const EnergyValue e = plan.on_line
                                  ? lambda_delta_on_line(fn, delta, plan.p, profile, plan.quad)
                                  : lambda_delta(fn, fn.domain(), delta, plan.p, profile, plan.quad);
        if (e.is_finite()) {
            art.csv << fmt17(delta) << "," << fmt17(e.value) << "," << fmt17(e.error_estimate)
                    << ",0,,\n";
            std::cout << "delta=" << fmt17(delta) << " energy=" << fmt17(e.value)
                      << " (err<=" << fmt17(e.error_estimate) << ")\n";
        } else {
            art.csv << fmt17(delta) << ",inf,0,1," << fmt17(e.certificate->location) << ","
                    << fmt17(e.certificate->jump) << "\n";
            std::cout << "delta=" << fmt17(delta) << " energy=+inf  " << e.certificate->describe()
                      << "\n";
        }
    }
    art.summary << "fn = " << plan.fn_spec << "\n";
    art.summary << "evaluations = " << ladder.size() << "\n";
    return 0;
}

int cmd_scan(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const PiecewiseLinearFn fn = build_function(plan);
    const auto ladder = plan.resolve_ladder();
    const ConvergenceScan scan = pointwise_scan(fn, fn.domain(), profile, plan.p, ladder, plan.quad);
    art.csv << "delta,lambda,target,gap\n";
    for (std::size_t i = 0; i < scan.deltas.size(); ++i)
        art.csv << fmt17(scan.deltas[i]) << "," << fmt17(scan.energies[i]) << ","
                << fmt17(scan.target) << "," << fmt17(scan.target - scan.energies[i]) << "\n";
    art.summary << "target = " << fmt17(scan.target) << "\n";
    art.summary << "extrapolated = " << fmt17(scan.extrapolated) << "\n";
    art.summary << "fit.linear = " << fmt17(scan.fit_linear) << "\n";
    art.summary << "fit.log = " << fmt17(scan.fit_log) << "\n";
    for (std::size_t i = 0; i < scan.deltas.size(); ++i)
        std::cout << "delta=" << fmt17(scan.deltas[i]) << " lambda=" << fmt17(scan.energies[i])
                  << " target=" << fmt17(scan.target) << "\n";
    std::cout << "extrapolated limit " << fmt17(scan.extrapolated) << "\n";
    return 0;
}

int write_estimate(Artifacts& art, const ExperimentPlan& plan, const KappaEstimate& est,
                   const char* constant_name) {
    art.csv << "delta,best_energy,constraint,starts,seed\n";
    for (const auto& pt : est.per_delta)
        art.csv << fmt17(pt.delta) << "," << fmt17(pt.best_energy) << ","
                << fmt17(pt.constraint_distance) << "," << pt.starts_run << ","
                << fmt_u64(plan.seed) << "\n";
    art.summary << constant_name << ".value = " << fmt17(est.value) << "\n";
    art.summary << constant_name << ".extrapolated = " << fmt17(est.extrapolated_limit) << "\n";
    art.summary << constant_name << ".bracket = [" << fmt17(est.bracket_low) << ", "
                << fmt17(est.bracket_high) << "]\n";
    art.summary << constant_name << ".accepted_moves = " << est.diagnostics.accepted_moves << "\n";
    for (std::size_t i = 0; i < est.per_delta.size(); ++i) {
        const auto& pt = est.per_delta[i];
        art.summary << constant_name << ".delta." << fmt17(pt.delta)
                    << " = " << fmt17(pt.best_energy) << " (candidate " << pt.best_candidate
                    << ", constraint " << fmt17(pt.constraint_distance) << ")\n";
        std::ostringstream name;
        name << "minimizer_" << i << ".txt";
        write_fn_file((art.dir / name.str()).string(), est.minimizers[i]);
    }
    std::cout << constant_name << " estimate: value=" << fmt17(est.value)
              << " bracket=[" << fmt17(est.bracket_low) << ", " << fmt17(est.bracket_high)
              << "]\n";
    return 0;
}

int cmd_kappa(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const auto ladder = plan.resolve_ladder();
    const KappaEstimate est =
        estimate_kappa(profile, plan.p, ladder, plan.nodes, plan.opt, plan.quad);
    return write_estimate(art, plan, est, "kappa");
}

int cmd_gamma1d(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const auto ladder = plan.resolve_ladder();
    const GammaEstimate est = estimate_gamma_step(profile, ladder, plan.nodes, plan.opt, plan.quad);
    return write_estimate(art, plan, est, "gamma");
}

int cmd_recover(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const PhiProfile profile = build_profile(plan);
    const PiecewiseLinearFn target = build_function(plan);
    const auto ladder = plan.resolve_ladder();
    art.csv << "delta,lp_distance,energy,divergent\n";
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const double delta = ladder[i];
        const double t_zero = profile.zero_threshold();
        const PiecewiseLinearFn base = t_zero > 0.0 && delta * t_zero < 0.75
                                           ? make_unit_staircase(delta * t_zero)
                                           : make_affine({0.0, 1.0, false}, 1.0, 0.0);
        const PiecewiseLinearFn out =
            recover_piecewise_linear(target, delta, base, delta, plan.p, profile, &art.log);
        const double dist = lp_distance(out, target, plan.p, target.domain());
        const EnergyValue e = lambda_delta_on_line(out, delta, plan.p, profile, plan.quad);
        art.csv << fmt17(delta) << "," << fmt17(dist) << ","
                << (e.is_finite() ? fmt17(e.value) : std::string("inf")) << ","
                << (e.is_finite() ? 0 : 1) << "\n";
        std::ostringstream name;
        name << "recovered_" << i << ".txt";
        write_fn_file((art.dir / name.str()).string(), out, true);
        std::cout << "delta=" << fmt17(delta) << " lp_distance=" << fmt17(dist) << " energy="
                  << (e.is_finite() ? fmt17(e.value) : std::string("+inf")) << "\n";
    }
    art.summary << "target = " << plan.fn_spec << "\n";
    art.summary << "ladder_points = " << ladder.size() << "\n";
    return 0;
}

int cmd_invariants(const ExperimentPlan& plan) {
    Artifacts art(plan);
    const InvariantReport report = run_invariant_corpus(plan.invariants_count, plan.seed, &art.log);
    art.csv << "functions,checks,failures\n";
    art.csv << report.functions << "," << report.checks << "," << report.failures.size() << "\n";
    art.summary << "functions = " << report.functions << "\n";
    art.summary << "checks = " << report.checks << "\n";
    art.summary << "failures = " << report.failures.size() << "\n";
    for (const auto& f : report.failures) {
        art.summary << "failure = " << f << "\n";
        std::cout << "FAIL " << f << "\n";
    }
    std::cout << "invariants: " << report.checks << " checks over " << report.functions
              << " functions, " << report.failures.size() << " failures\n";
    return report.passed() ? 0 : 1;
}

} // namespace

int run(const ExperimentPlan& plan) {
    if (plan.command == "check-profile") return cmd_check_profile(plan);
    if (plan.command == "eval") return cmd_eval(plan);
    if (plan.command == "scan") return cmd_scan(plan);
    if (plan.command == "kappa") return cmd_kappa(plan);
    if (plan.command == "gamma1d") return cmd_gamma1d(plan);
    if (plan.command == "recover") return cmd_recover(plan);
    if (plan.command == "invariants") return cmd_invariants(plan);
    throw ConfigError("unknown command: '" + plan.command + "'");
}

} // namespace gammalab
