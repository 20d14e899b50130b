#pragma once

#include <optional>
#include <string>

#include "gammalab/gridfn.hpp"
#include "gammalab/profile.hpp"

namespace gammalab {

struct QuadConfig {
    int gauss_order = 7;              // coarse panel rule; the refined rule doubles it
    int max_subdivision_depth = 48;
    double rel_tol = 1e-9;
    int diagonal_band_refinement = 10; // graded pre-splits toward touching corners
    int divergence_probe_levels = 40;  // geometric shrink levels for the jump probe
    enum class FarField { analytic_tail, hard_cutoff };
    FarField far_field_cutoff_policy = FarField::analytic_tail;

    void validate() const;
};

struct DivergenceCertificate {
    double location = 0.0;        // breakpoint (or window edge) carrying the jump
    double jump = 0.0;            // |u(x+) - u(x-)|
    double phi_delta_lower = 0.0; // positive lower bound of phi_delta near the jump size
    double probe_halfwidth = 0.0; // half-width of the band on which the bound holds
    bool far_field = false;       // certificate from the constant far fields
    std::string describe() const;
};

// Result of a nonlocal energy evaluation: either a finite value with a certified error
// estimate or the +inf marker with a divergence certificate.
struct EnergyValue {
    double value = 0.0;
    double error_estimate = 0.0;
    std::optional<DivergenceCertificate> certificate;

    bool is_finite() const { return !certificate.has_value(); }
    static EnergyValue divergent(DivergenceCertificate cert);
};

// Lambda_delta(u, interval) = int int phi_delta(|u(x)-u(y)|) / |x-y|^{p+1} dx dy,
// with phi_delta(t) = delta^p phi(t/delta).
EnergyValue lambda_delta(const PiecewiseLinearFn& u, const Interval& interval, double delta,
                         double p, const PhiProfile& profile, const QuadConfig& config = {});

// Reduction oracle for affine inputs: 2 int_0^L (L-s) phi_delta(|slope| s) s^{-(p+1)} ds,
// computed by an independent rule family (adaptive Simpson).
double lambda_affine_1d(double slope, double length, double delta, double p,
                        const PhiProfile& profile);

// Energy over the whole line for data that is constant outside its window: the window
// block is evaluated directly, window-to-far-field and far-to-far parts semi-analytically.
EnergyValue lambda_delta_on_line(const PiecewiseLinearFn& u, double delta, double p,
                                 const PhiProfile& profile, const QuadConfig& config = {});

// Thread cap (env GAMMA_LAB_THREADS, default 1). Results are independent of the cap.
int thread_cap();

} // namespace gammalab
