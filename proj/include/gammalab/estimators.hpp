#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gammalab/energy.hpp"
#include "gammalab/gridfn.hpp"
#include "gammalab/profile.hpp"

namespace gammalab {

struct OptimizerConfig {
    int restarts = 4;
    int anneal_steps = 400;
    double initial_temperature = 0.05;
    double cooling = 0.95;
    int polish_sweeps = 2;
    std::uint64_t seed = 0;
    double search_rel_tol = 1e-5; // quadrature tolerance during the search
};

struct ConvergenceScan {
    std::vector<double> deltas;
    std::vector<double> energies;
    double target = 0.0;            // int |u'|^p
    double extrapolated = 0.0;      // fit value at delta = 0
    double fit_linear = 0.0;        // coefficient of delta
    double fit_log = 0.0;           // coefficient of delta*ln(1/delta)
};

// Pointwise smallness scan: energies of a fixed continuous u along the ladder, with the
// gap to int |u'|^p fitted against a*delta + b*delta*ln(1/delta).
ConvergenceScan pointwise_scan(const PiecewiseLinearFn& u, const Interval& interval,
                               const PhiProfile& profile, double p,
                               const std::vector<double>& ladder,
                               const QuadConfig& config = {});

struct LadderPoint {
    double delta = 0.0;
    double best_energy = 0.0;
    double constraint_distance = 0.0; // achieved ||v - target||_p
    std::string best_candidate;       // seed / construction id of the recorded minimizer
    int starts_run = 0;
    long accepted_moves = 0;
};

struct OptimizerDiagnostics {
    int restarts = 0;
    long accepted_moves = 0;
    std::uint64_t seed = 0;
};

// Constrained variational estimate of a limit constant: per-delta minima of
// lambda_delta(v,(0,1)) over candidates within ||v - target||_p <= sqrt(delta).
struct KappaEstimate {
    double value = 0.0;                  // min over the ladder of the per-delta best
    std::vector<LadderPoint> per_delta;
    std::vector<PiecewiseLinearFn> minimizers; // aligned with per_delta
    double extrapolated_limit = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
    OptimizerDiagnostics diagnostics;
};

using GammaEstimate = KappaEstimate; // same shape, target H_{1/2}

// constraint schedule ||v - target||_p <= epsilon(delta)
double constraint_epsilon(double delta);

KappaEstimate estimate_kappa(const PhiProfile& profile, double p,
                             const std::vector<double>& ladder, int nodes,
                             const OptimizerConfig& opt, const QuadConfig& config = {});

GammaEstimate estimate_gamma_step(const PhiProfile& profile, const std::vector<double>& ladder,
                                  int nodes, const OptimizerConfig& opt,
                                  const QuadConfig& config = {});

// delta ladder following the logarithmic rule delta_{j+1} = delta_j / ceil(ln(1/delta_j))
std::vector<double> log_ladder(double start, int count);

struct G1Family {
    std::string name;
    std::vector<double> deltas;
    std::vector<PiecewiseLinearFn> members;
};

struct G1ProbeEntry {
    std::string family;
    bool converged = false;        // L^p convergence of the family verified
    double final_distance = 0.0;
    double tail_min_energy = 0.0;  // min over the ladder tail (finite members)
    double lower_bound = 0.0;      // kappa_est * int |g'|^p - slack
    bool pass = false;
    // p = 1 jump form on (t1, t2); sigma_ratio is logged for p > 1 (constant unknown)
    double jump_tail_energy = 0.0;
    double jump_lower_bound = 0.0;
    bool jump_pass = true;
    double sigma_ratio = 0.0;
};

struct G1ProbeReport {
    std::vector<G1ProbeEntry> entries;
    bool all_pass() const;
};

G1ProbeReport g1_lower_probe(const PiecewiseLinearFn& g, const std::vector<G1Family>& families,
                             const PhiProfile& profile, double p, double kappa_est,
                             std::optional<double> gamma_est = std::nullopt,
                             double jump_t1 = 0.25, double jump_t2 = 0.75, double slack = 1e-2,
                             const QuadConfig& config = {});

struct SobolevProbeReport {
    std::vector<double> h_ladder;
    std::vector<double> values;   // int |tau_h u|^p over the window
    double supremum = 0.0;
    double growth_exponent = 0.0; // fitted exponent of 1/h
    bool unbounded = false;       // growth consistent with a jump (exponent >= (p-1)/2)
};

SobolevProbeReport sobolev_membership_probe(const PiecewiseLinearFn& u, double p,
                                            const std::vector<double>& h_ladder);

} // namespace gammalab
