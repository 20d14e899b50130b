#pragma once

#include <iosfwd>

#include "gammalab/energy.hpp"
#include "gammalab/gridfn.hpp"
#include "gammalab/profile.hpp"

namespace gammalab {

// Ladder bookkeeping for the tiled construction: a competitor built at base_delta is
// replayed at target_delta by tiling m = floor(m_hat) copies, m_hat = base_delta/target_delta.
struct TilingPlan {
    double base_delta = 0.0;
    double target_delta = 0.0;
    double m_hat = 0.0;
    int m = 0;
    double c_k = 0.0; // tolerance ledger, >= sqrt(base_delta)

    static TilingPlan make(double base_delta, double target_delta);
};

// v(x) = v_hat(m x)/m_hat with v_hat the 1-periodic extension of base + floor;
// satisfies lambda_{target}(v,(0,1)) = (m^{p-1}/m_hat^p) lambda_{base}(v_hat,(0,m)).
PiecewiseLinearFn tile_recovery(const PiecewiseLinearFn& base, const TilingPlan& plan);

// Anchor scan: the point x1 in (lo, hi) among candidate slice points that minimizes the
// one-point energy trace int phi_delta(|u(x1)-u(y)|)/|x1-y|^{p+1} dy over u's domain.
double scan_anchor(const PiecewiseLinearFn& u, double lo, double hi, double delta, double p,
                   const PhiProfile& profile);

// Competitor for an affine target built from a (0,1) base competitor: affine change of
// variables + boundary-matched flattening; equals the target exactly on collars of
// width >= sqrt(delta)/6 at both ends.
PiecewiseLinearFn recover_affine(const PiecewiseLinearFn& target, double delta,
                                 const PiecewiseLinearFn& base_candidate, double base_delta,
                                 double p, const PhiProfile& profile,
                                 std::ostream* provenance = nullptr);

// Glued per-segment recovery of a continuous piecewise-linear target that is constant
// outside its window; continuous because each piece matches the target on its collars.
PiecewiseLinearFn recover_piecewise_linear(const PiecewiseLinearFn& target, double delta,
                                           const PiecewiseLinearFn& base_candidate,
                                           double base_delta, double p, const PhiProfile& profile,
                                           std::ostream* provenance = nullptr);

// p = 1 step-target competitor on (0,1): a monotone staircase ramp from 0 to 1 across
// (c-w, c+w) with jump sizes calibrated to the zero structure of phi (exact threshold
// jumps, beyond-support jumps, or a plain affine ramp when no zero set is available).
PiecewiseLinearFn recover_step_p1(double c, double delta, const PhiProfile& profile,
                                  std::ostream* provenance = nullptr);
// same construction with an explicit half-width
PiecewiseLinearFn recover_step_p1_with_width(double c, double w, double delta,
                                             const PhiProfile& profile,
                                             std::ostream* provenance = nullptr);

} // namespace gammalab
