#include "gammalab/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "gammalab/errors.hpp"
#include "gammalab/quadrature.hpp"

namespace gammalab {

TilingPlan TilingPlan::make(double base_delta, double target_delta) {
    if (!(base_delta > 0.0) || !(target_delta > 0.0))
        throw InvalidParameter("tiling plan requires positive deltas");
    if (target_delta > base_delta * (1.0 + 1e-12))
        throw InvalidParameter("invalid ladder: target delta must not exceed the base delta");
    TilingPlan plan;
    plan.base_delta = base_delta;
    plan.target_delta = target_delta;
    plan.m_hat = base_delta / target_delta;
    plan.m = static_cast<int>(std::floor(plan.m_hat + 1e-12));
    plan.c_k = std::sqrt(base_delta);
    return plan;
}

PiecewiseLinearFn tile_recovery(const PiecewiseLinearFn& base, const TilingPlan& plan) {
    if (plan.m < 1 || plan.m_hat < plan.m || plan.m_hat >= plan.m + 1.0 + 1e-9)
        throw InvalidParameter("invalid tiling plan");
    const double tol = 1e-9;
    if (std::abs(base.right_values().front()) > tol ||
        std::abs(base.left_values().back() - 1.0) > tol)
        throw InvalidSpec("tile_recovery base must run from 0 to 1 across (0,1)");
    const PiecewiseLinearFn tiled = tile_rescale(base, plan.m);
    const double factor = plan.m / plan.m_hat;
    return factor == 1.0 ? tiled : tiled.scale_values(factor);
}

namespace {

// one-point energy trace used by the anchor scan
double point_energy_trace(const PiecewiseLinearFn& u, double x1, double delta, double p,
                          const PhiProfile& profile) {
    const double u1 = u.eval(x1);
    const double dp = std::pow(delta, p);
    double total = 0.0;
    for (std::size_t i = 0; i < u.segment_count(); ++i) {
        const double s0 = u.xs()[i], s1 = u.xs()[i + 1];
        const double v0 = u.segment_start_value(i);
        const double slope = u.segment_slope(i);
        auto f = [&](double y) {
            const double dist = std::abs(y - x1);
            if (dist <= 0.0) return 0.0;
            const double w = std::abs(v0 + slope * (y - s0) - u1);
            return dp * profile.eval(w / delta) * std::pow(dist, -(p + 1.0));
        };
        // keep a small guard band around the trace point; ranking is what matters here
        std::vector<double> cuts{s0, s1};
        if (x1 > s0 && x1 < s1) {
            const double guard = 1e-7 * (u.x_hi() - u.x_lo());
            cuts.push_back(std::max(s0, x1 - guard));
            cuts.push_back(std::min(s1, x1 + guard));
            std::sort(cuts.begin(), cuts.end());
        }
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (x1 >= cuts[k] && x1 <= cuts[k + 1] && cuts[k + 1] - cuts[k] < 3e-7) continue;
            total += adaptive_gauss(f, cuts[k], cuts[k + 1], 1e-10, 1e-6, 7, 30).value;
        }
    }
    return total;
}

} // namespace

double scan_anchor(const PiecewiseLinearFn& u, double lo, double hi, double delta, double p,
                   const PhiProfile& profile) {
    if (!(lo < hi)) throw InvalidParameter("anchor scan window is empty");
    // candidates: segment midpoints inside the window plus the window midpoint
    std::vector<double> candidates{0.5 * (lo + hi)};
    const auto& xs = u.xs();
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double mid = 0.5 * (xs[i] + xs[i + 1]);
        if (mid > lo && mid < hi) candidates.push_back(mid);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best_x = candidates.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double x : candidates) {
        const double score = point_energy_trace(u, x, delta, p, profile);
        if (score < best_score) {
            best_score = score;
            best_x = x;
        }
    }
    return best_x;
}

namespace {

bool is_affine(const PiecewiseLinearFn& f) {
    if (!f.is_continuous()) return false;
    const double s0 = f.segment_slope(0);
    for (std::size_t i = 1; i < f.segment_count(); ++i)
        if (std::abs(f.segment_slope(i) - s0) > 1e-9 * (1.0 + std::abs(s0))) return false;
    return true;
}

// boundary-collar flattening with zero plateaus: output equals the boundary target
// exactly outside the anchors and bridges affinely into u
PiecewiseLinearFn collar_flatten(const PiecewiseLinearFn& u, const PiecewiseLinearFn& target,
                                 double collar_scale, double delta, double p,
                                 const PhiProfile& profile) {
    const double a = u.x_lo(), b = u.x_hi();
    const double len = b - a;
    const double c = std::min(std::max(collar_scale, 1e-6 * len), 0.245 * len);
    const double x1 = scan_anchor(u, a + 0.5 * c, a + c, delta, p, profile);
    const double x2 = scan_anchor(u, b - c, b - 0.5 * c, delta, p, profile);
    FlattenSpec spec;
    spec.anchor_lo = x1;
    spec.anchor_hi = x2;
    spec.plateau_width_lo = 0.0;
    spec.plateau_width_hi = 0.0;
    return flatten_near_points(u, spec, target);
}

} // namespace

PiecewiseLinearFn recover_affine(const PiecewiseLinearFn& target, double delta,
                                 const PiecewiseLinearFn& base_candidate, double base_delta,
                                 double p, const PhiProfile& profile, std::ostream* provenance) {
    if (!is_affine(target)) throw InvalidParameter("recover_affine expects an affine target");
    if (delta > base_delta * (1.0 + 1e-12))
        throw InvalidParameter("invalid ladder: delta must not exceed base_delta");
    const double a = target.x_lo(), b = target.x_hi();
    const double slope = target.segment_slope(0);
    if (slope == 0.0) return target; // constants carry zero energy already

    const TilingPlan plan = TilingPlan::make(base_delta, delta);
    // flatten the base so every tiled cell boundary sees the identity nearby
    const PiecewiseLinearFn unit = make_affine({0.0, 1.0, false}, 1.0, 0.0);
    const PiecewiseLinearFn flat_base =
        collar_flatten(base_candidate, unit, plan.c_k, base_delta, p, profile);
    const PiecewiseLinearFn tiled = tile_recovery(flat_base, plan);

    // affine change of variables onto (a, b)
    const double height = slope * (b - a);
    PiecewiseLinearFn mapped =
        tiled.scale_values(height).shift_values(target.eval(a)).map_x(a, b - a);

    // second collar pass pins the boundary equality with the target
    const double collar = std::sqrt(delta);
    PiecewiseLinearFn out = collar_flatten(mapped, target, collar, delta, p, profile);
    if (provenance) {
        *provenance << "recover_affine slope=" << slope << " interval=[" << a << "," << b
                    << "] delta=" << delta << " base_delta=" << base_delta
                    << " m=" << plan.m << " m_hat=" << plan.m_hat
                    << " lp_dist=" << lp_distance(out, target, p, target.domain()) << "\n";
    }
    return out;
}

PiecewiseLinearFn recover_piecewise_linear(const PiecewiseLinearFn& target, double delta,
                                           const PiecewiseLinearFn& base_candidate,
                                           double base_delta, double p,
                                           const PhiProfile& profile, std::ostream* provenance) {
    if (!target.is_continuous())
        throw InvalidParameter("recover_piecewise_linear expects a continuous target");
    std::vector<std::pair<Interval, PiecewiseLinearFn>> pieces;
    for (std::size_t i = 0; i < target.segment_count(); ++i) {
        const Interval seg{target.xs()[i], target.xs()[i + 1], false};
        const PiecewiseLinearFn local = target.restricted(seg);
        const double slope = target.segment_slope(i);
        if (slope == 0.0 || seg.length() < 16.0 * std::sqrt(delta)) {
            // constants are free; segments too short for collars are kept verbatim
            pieces.emplace_back(seg, local);
        } else {
            pieces.emplace_back(seg, recover_affine(local, delta, base_candidate, base_delta, p,
                                                    profile, nullptr));
        }
    }
    PiecewiseLinearFn out = glue(pieces);
    if (provenance) {
        *provenance << "recover_piecewise_linear segments=" << target.segment_count()
                    << " delta=" << delta
                    << " lp_dist=" << lp_distance(out, target, p, target.domain()) << "\n";
    }
    return out;
}

namespace {

PiecewiseLinearFn staircase_ramp(double c, double w, const std::vector<double>& jump_values,
                                 std::vector<double> jump_positions) {
    // jump_values[j] = value after the j-th jump; positions strictly inside (c-w, c+w)
    std::vector<double> xs{0.0};
    std::vector<double> lv{0.0};
    std::vector<double> rv{0.0};
    double prev = 0.0;
    for (std::size_t j = 0; j < jump_positions.size(); ++j) {
        xs.push_back(jump_positions[j]);
        lv.push_back(prev);
        prev = jump_values[j];
        rv.push_back(prev);
    }
    xs.push_back(1.0);
    lv.push_back(prev);
    rv.push_back(prev);
    (void)c;
    (void)w;
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

} // namespace

PiecewiseLinearFn recover_step_p1_with_width(double c, double w, double delta,
                                             const PhiProfile& profile,
                                             std::ostream* provenance) {
    if (std::abs(profile.p() - 1.0) > 1e-12)
        throw InvalidParameter("recover_step_p1 is a p = 1 construction");
    if (!(c > 0.0 && c < 1.0)) throw InvalidParameter("jump location must lie in (0,1)");
    if (!(w > 0.0) || w >= std::min(c, 1.0 - c))
        throw InvalidParameter("ramp half-width must fit inside (0,1) around c");

    const double t_sup = profile.support_upper();
    const double t_zero = profile.zero_threshold();
    std::string mode;
    PiecewiseLinearFn out = make_heaviside({0.0, 1.0, false}, c); // replaced below

    if (std::isfinite(t_sup) && 2.0 * delta * t_sup < 1.0) {
        // every jump lands strictly beyond the support of phi_delta
        const int n = std::max(1, static_cast<int>(std::floor(1.0 / (2.0 * delta * t_sup * (1.0 + 1e-3)))));
        std::vector<double> values(n), positions(n);
        for (int j = 1; j <= n; ++j) {
            values[j - 1] = static_cast<double>(j) / n;
            positions[j - 1] = (c - w) + 2.0 * w * j / (n + 1.0);
        }
        out = staircase_ramp(c, w, values, positions);
        mode = "beyond-support";
    } else if (std::isfinite(t_sup) && 1.0 / delta > t_sup) {
        out = make_heaviside({0.0, 1.0, false}, c); // the unit jump itself is free
        mode = "single-jump";
    } else if (t_zero > 0.0 && delta * t_zero < 1.0) {
        // exact threshold jumps: phi vanishes on [0, t_zero] including the endpoint
        const double h = delta * t_zero;
        const int n_full = static_cast<int>(std::floor(1.0 / h + 1e-12));
        const double remainder = 1.0 - n_full * h;
        std::vector<double> values, positions;
        const int n_total = n_full + (remainder > 1e-12 ? 1 : 0);
        for (int j = 1; j <= n_full; ++j) values.push_back(j * h);
        if (remainder > 1e-12) values.push_back(1.0);
        for (int j = 1; j <= n_total; ++j) positions.push_back((c - w) + 2.0 * w * j / (n_total + 1.0));
        out = staircase_ramp(c, w, values, positions);
        mode = "threshold";
    } else {
        // no zero structure to exploit: plain affine ramp
        std::vector<double> xs{0.0, c - w, c + w, 1.0};
        std::vector<double> vs{0.0, 0.0, 1.0, 1.0};
        out = PiecewiseLinearFn::continuous(std::move(xs), std::move(vs));
        mode = "affine";
    }
    if (provenance) {
        *provenance << "recover_step_p1 mode=" << mode << " c=" << c << " w=" << w
                    << " delta=" << delta << " l1_dist="
                    << lp_distance(out, make_heaviside({0.0, 1.0, false}, c), 1.0, {0.0, 1.0, false})
                    << "\n";
    }
    return out;
}

PiecewiseLinearFn recover_step_p1(double c, double delta, const PhiProfile& profile,
                                  std::ostream* provenance) {
    if (!(c > 0.0 && c < 1.0)) throw InvalidParameter("jump location must lie in (0,1)");
    const double w_default = std::max(16.0 * delta, delta * std::ceil(1.0 / delta) * delta);
    const double w = std::min(w_default, std::min(c, 1.0 - c) * (1.0 - 1e-9));
    return recover_step_p1_with_width(c, w, delta, profile, provenance);
}

} // namespace gammalab
