#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gammalab/energy.hpp"
#include "gammalab/estimators.hpp"

namespace gammalab {

inline constexpr const char* kVersionString = "gamma-lab 0.1.0";

// Declarative description of one run. Flat key=value config keys mirror the field
// names with section prefixes (profile.kind, quad.rel_tol, opt.restarts, ...).
struct ExperimentPlan {
    std::string command; // check-profile | eval | scan | kappa | gamma1d | recover | invariants

    // profile
    std::string profile_kind = "indicator"; // indicator | saturating | bump | table
    double p = 1.0;
    double profile_scale = 0.0; // 0 -> normalize automatically
    std::string profile_table;

    // function under test
    std::string fn_spec = "U"; // U | H | H@c | tent | zero | const@c | affine@s,i | stair@h | file:PATH
    double interval_a = 0.0;
    double interval_b = 1.0;
    bool interval_set = false;
    bool on_line = false; // eval over the whole line (window + analytic tails)

    // delta ladder
    std::vector<double> ladder;
    double ladder_start = 0.0;
    double ladder_factor = 0.0;
    int ladder_count = 0;
    std::string ladder_rule; // "geometric" | "log"
    double delta = 0.0;      // single-delta convenience for eval

    QuadConfig quad;
    OptimizerConfig opt;
    int nodes = 40;
    int invariants_count = 100;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // resolved ladder (explicit list or generated); throws on conflicts
    std::vector<double> resolve_ladder() const;
    // full effective configuration, sorted keys
    std::map<std::string, std::string> effective_config() const;
};

// strict key=value application; unknown keys are hard errors
void apply_config_entry(ExperimentPlan& plan, const std::string& key, const std::string& value);

ExperimentPlan parse_config_file(const std::string& path);
ExperimentPlan parse_config_stream(std::istream& is);

// executes the plan and writes artifacts under plan.out_dir; returns the exit status
int run(const ExperimentPlan& plan);

} // namespace gammalab
