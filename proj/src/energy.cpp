#include "gammalab/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "gammalab/errors.hpp"
#include "gammalab/quadrature.hpp"

namespace gammalab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void QuadConfig::validate() const {
    if (gauss_order < 2) throw InvalidParameter("quad config: gauss_order must be >= 2");
    if (!(rel_tol > 0.0)) throw InvalidParameter("quad config: rel_tol must be positive");
    if (max_subdivision_depth < 1 || divergence_probe_levels < 1)
        throw InvalidParameter("quad config: depths must be >= 1");
}

std::string DivergenceCertificate::describe() const {
    std::ostringstream os;
    os << "divergent at " << (far_field ? "far field (window edge " : "x = ")
       << location << (far_field ? ")" : "") << ": jump " << jump
       << ", phi_delta >= " << phi_delta_lower << " within " << probe_halfwidth
       << " of the jump size";
    return os.str();
}

EnergyValue EnergyValue::divergent(DivergenceCertificate cert) {
    EnergyValue out;
    out.value = kInf;
    out.error_estimate = 0.0;
    out.certificate = std::move(cert);
    return out;
}

int thread_cap() {
    const char* env = std::getenv("GAMMA_LAB_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v < 1) return 1;
    return static_cast<int>(std::min(v, 64L));
}

namespace {

struct Seg {
    double x0, x1; // x0 < x1
    double u0, u1; // values at the segment ends (one-sided)
    double slope;
};

std::vector<Seg> segments_of(const PiecewiseLinearFn& u) {
    std::vector<Seg> segs(u.segment_count());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        segs[i].x0 = u.xs()[i];
        segs[i].x1 = u.xs()[i + 1];
        segs[i].u0 = u.segment_start_value(i);
        segs[i].u1 = u.segment_end_value(i);
        segs[i].slope = u.segment_slope(i);
    }
    return segs;
}

// phi_delta machinery shared by all integrands
struct Kernel {
    const PhiProfile* phi;
    double delta;
    double p;
    double delta_pow_p;
    double delta_pow_p1;

    Kernel(const PhiProfile& profile, double delta_, double p_)
        : phi(&profile), delta(delta_), p(p_), delta_pow_p(std::pow(delta_, p_)),
          delta_pow_p1(std::pow(delta_, p_ + 1.0)) {}

    double phi_delta(double t) const { return delta_pow_p * phi->eval(std::abs(t) / delta); }
    // For exactly piecewise-constant differences the pointwise value of phi enters with
    // positive measure, so accumulated rounding in the input values (k*h sums are off by
    // ulps) must not flip phi across one of its discontinuities. Arguments within 1e-9
    // relative of a structure point are snapped onto it; deliberate near-threshold
    // candidates (offsets >= 1e-6) stay untouched.
    double phi_delta_snapped(double t) const {
        double tau = std::abs(t) / delta;
        for (double s : phi->structure_points())
            if (std::abs(tau - s) <= 1e-9 * std::max(1.0, s)) {
                tau = s;
                break;
            }
        return delta_pow_p * phi->eval(tau);
    }
    // odd antiderivative of phi_delta(|.|)
    double psi(double w) const {
        const double a = delta_pow_p1 * phi->antiderivative(std::abs(w) / delta);
        return std::copysign(a, w);
    }
};

// Jump divergence probe: a jump of size J diverges iff phi is bounded below on a
// punctured band around J/delta. The puncture keeps the exact-threshold staircase
// (phi(J/delta) = 0 with phi vanishing on one side) classified convergent while an
// isolated zero of phi stays divergent.
std::optional<DivergenceCertificate> probe_jump(double location, double jump_size,
                                                const Kernel& ker, int levels) {
    const double center = jump_size / ker.delta;
    // floor the band width a few hundred ulps above the center so deeper probe ladders
    // stay numerically meaningful
    const double eta_min =
        std::max(0.5 * jump_size * std::pow(2.0, -levels), jump_size * 0x1.0p-45);
    const double m_min =
        ker.phi->inf_on((jump_size - eta_min) / ker.delta, (jump_size + eta_min) / ker.delta, center);
    if (!(m_min > 0.0)) return std::nullopt;
    // certified divergent; report the widest band that still carries a positive bound
    double eta = 0.5 * jump_size;
    for (int level = 0; level < levels; ++level) {
        const double m = ker.phi->inf_on((jump_size - eta) / ker.delta,
                                         (jump_size + eta) / ker.delta, center);
        if (m > 0.0)
            return DivergenceCertificate{location, jump_size, ker.delta_pow_p * m, eta, false};
        eta *= 0.5;
    }
    return DivergenceCertificate{location, jump_size, ker.delta_pow_p * m_min, eta_min, false};
}

// r-values at which the reduced integrand changes analytic piece
void add_crossings(std::vector<double>& cuts, double a, double b, double r_lo, double r_hi,
                   const Kernel& ker) {
    // solve a + b r = tau for every structure level tau of phi_delta (both signs and 0)
    if (b == 0.0) return;
    auto add = [&](double tau) {
        const double r = (tau - a) / b;
        if (r > r_lo && r < r_hi) cuts.push_back(r);
    };
    add(0.0);
    for (double t : ker.phi->structure_points()) {
        add(t * ker.delta);
        add(-t * ker.delta);
    }
}

struct PairResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

PairResult integrate_panels(const std::function<double(double)>& f, std::vector<double>& cuts,
                            double r_lo, double r_hi, const QuadConfig& cfg) {
    cuts.push_back(r_lo);
    cuts.push_back(r_hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double r) { return r < r_lo || r > r_hi; }),
               cuts.end());

    // crude pass fixes the absolute tolerance budget
    double crude = 0.0;
    {
        long evals = 0;
        const GaussRule& rule = gauss_rule(2 * cfg.gauss_order + 1);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            const double half = 0.5 * (cuts[i + 1] - cuts[i]);
            double s = 0.0;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k)
                s += rule.weights[k] * f(mid + half * rule.nodes[k]);
            crude += s * half;
            (void)evals;
        }
    }
    // 0.4 factors keep the summed per-pair errors under rel_tol * total for the
    // nonnegative integrand
    const double abs_budget = std::max(0.4 * cfg.rel_tol * std::abs(crude), 1e-280);
    const double per_panel = abs_budget / static_cast<double>(std::max<std::size_t>(cuts.size() - 1, 1));

    PairResult out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto r = adaptive_gauss(f, cuts[i], cuts[i + 1], per_panel, 0.4 * cfg.rel_tol,
                                      cfg.gauss_order, cfg.max_subdivision_depth);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

// Contribution of the ordered square (seg_i x seg_j) + (seg_j x seg_i); for i == j the
// whole square. Reduced exactly to one dimension over the separation r = y - x: the
// integral of phi_delta(|Du|) along each slice is the antiderivative difference.
PairResult pair_contribution(const Seg& si, const Seg& sj, bool same, const Kernel& ker,
                             const QuadConfig& cfg) {
    const double p1 = ker.p + 1.0;
    if (same) {
        const double len = si.x1 - si.x0;
        const double s = si.slope;
        if (s == 0.0) return {};
        std::vector<double> cuts;
        const double as = std::abs(s);
        for (double t : ker.phi->structure_points()) {
            const double r = t * ker.delta / as;
            if (r > 0.0 && r < len) cuts.push_back(r);
        }
        // nothing below the zero threshold of phi contributes
        double r_start = 0.0;
        const double zt = ker.phi->zero_threshold();
        if (zt > 0.0) r_start = std::min(zt * ker.delta / as, len);
        if (r_start >= len) return {};
        // graded pre-splits toward the apparent singularity at r = 0
        if (r_start == 0.0) {
            double g = std::min(len, ker.delta / as);
            for (int k = 0; k < cfg.diagonal_band_refinement && g > 1e-300; ++k, g *= 0.5)
                if (g < len) cuts.push_back(g);
        }
        auto f = [&](double r) {
            return 2.0 * (len - r) * ker.phi_delta(s * r) * std::pow(r, -p1);
        };
        return integrate_panels(f, cuts, r_start, len, cfg);
    }

    // si strictly left of (or touching) sj
    const double r_lo = sj.x0 - si.x1;
    const double r_hi = sj.x1 - si.x0;
    const double ci = si.u0 - si.slope * si.x0;
    const double cj = sj.u0 - sj.slope * sj.x0;
    const double d_slope = si.slope - sj.slope;
    // Du(x, r) = b0 + b1 r + d_slope x
    const double b0 = ci - cj;
    const double b1 = -sj.slope;

    std::vector<double> cuts;
    cuts.push_back(sj.x0 - si.x0);
    cuts.push_back(sj.x1 - si.x1);
    // crossings of the slice-endpoint arguments through the structure levels
    add_crossings(cuts, b0 + d_slope * si.x0, b1, r_lo, r_hi, ker);            // x = si.x0
    add_crossings(cuts, b0 + d_slope * si.x1, b1, r_lo, r_hi, ker);            // x = si.x1
    add_crossings(cuts, b0 + d_slope * sj.x0, b1 - d_slope, r_lo, r_hi, ker);  // x = sj.x0 - r
    add_crossings(cuts, b0 + d_slope * sj.x1, b1 - d_slope, r_lo, r_hi, ker);  // x = sj.x1 - r
    if (r_lo == 0.0) {
        double g = std::min(r_hi - r_lo, ker.delta);
        for (int k = 0; k < cfg.diagonal_band_refinement && g > 1e-300; ++k, g *= 0.5)
            cuts.push_back(g);
    }

    const bool parallel = d_slope == 0.0;
    const bool constant_pair = parallel && b1 == 0.0;
    auto f = [&](double r) {
        const double xlo = std::max(si.x0, sj.x0 - r);
        const double xhi = std::min(si.x1, sj.x1 - r);
        const double len = xhi - xlo;
        if (len <= 0.0) return 0.0;
        double inner;
        if (constant_pair) {
            inner = ker.phi_delta_snapped(b0) * len;
        } else if (parallel) {
            inner = ker.phi_delta(b0 + b1 * r) * len;
        } else {
            const double w0 = b0 + b1 * r + d_slope * xlo;
            const double w1 = b0 + b1 * r + d_slope * xhi;
            inner = std::abs(ker.psi(w1) - ker.psi(w0)) / std::abs(d_slope);
        }
        return 2.0 * inner * std::pow(r, -p1);
    };
    return integrate_panels(f, cuts, std::max(r_lo, 0.0), r_hi, cfg);
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    const int cap = thread_cap();
    const std::size_t chunk = 64; // fixed chunking keeps work units identical per thread count
    if (cap <= 1 || n <= chunk) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t start = next.fetch_add(chunk);
            if (start >= n) return;
            const std::size_t stop = std::min(start + chunk, n);
            for (std::size_t i = start; i < stop; ++i) body(i);
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(cap, (n + chunk - 1) / chunk));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

EnergyValue sum_pairs(const std::vector<Seg>& segs, const Kernel& ker, const QuadConfig& cfg,
                      double extra_value = 0.0, double extra_error = 0.0) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(segs.size() * (segs.size() + 1) / 2);
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i; j < segs.size(); ++j) pairs.emplace_back(i, j);

    std::vector<double> values(pairs.size(), 0.0);
    std::vector<double> errors(pairs.size(), 0.0);
    std::vector<unsigned char> failed(pairs.size(), 0);
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const PairResult r = pair_contribution(segs[i], segs[j], i == j, ker, cfg);
        values[k] = r.value;
        errors[k] = r.error;
        failed[k] = r.converged ? 0 : 1;
    });

    EnergyValue out;
    out.value = pairwise_sum(values) + extra_value;
    for (double e : errors) out.error_estimate += e;
    out.error_estimate += extra_error;
    (void)failed;
    const double bound = std::max(cfg.rel_tol * std::abs(out.value), 1e-12);
    if (out.error_estimate > bound)
        throw QuadratureFailure("inconclusive energy evaluation: error " +
                                std::to_string(out.error_estimate) + " exceeds tolerance without a divergence certificate");
    return out;
}

} // namespace

EnergyValue lambda_delta(const PiecewiseLinearFn& u, const Interval& interval, double delta,
                         double p, const PhiProfile& profile, const QuadConfig& config) {
    if (!(delta > 0.0)) throw InvalidParameter("lambda_delta requires delta > 0");
    if (!(p >= 1.0)) throw InvalidParameter("lambda_delta requires p >= 1");
    if (std::abs(p - profile.p()) > 1e-12) throw InvalidParameter("profile exponent does not match the requested p");
    config.validate();

    const PiecewiseLinearFn v = u.restricted(interval);
    const Kernel ker(profile, delta, p);

    for (std::size_t i = 1; i + 1 < v.breakpoint_count(); ++i) {
        const double jump = std::abs(v.effective_jump(i));
        if (jump == 0.0) continue;
        if (auto cert = probe_jump(v.xs()[i], jump, ker, config.divergence_probe_levels))
            return EnergyValue::divergent(*cert);
    }
    return sum_pairs(segments_of(v), ker, config);
}

double lambda_affine_1d(double slope, double length, double delta, double p,
                        const PhiProfile& profile) {
    if (!(delta > 0.0) || !(length > 0.0)) throw InvalidParameter("lambda_affine_1d: delta, length > 0");
    if (std::abs(p - profile.p()) > 1e-12)
        throw InvalidParameter("profile exponent does not match the requested p");
    if (slope == 0.0) return 0.0;
    const Kernel ker(profile, delta, p);
    const double as = std::abs(slope);
    double r_start = 0.0;
    const double zt = profile.zero_threshold();
    if (zt > 0.0) r_start = std::min(zt * delta / as, length);
    if (r_start >= length) return 0.0;
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        return 2.0 * (length - r) * ker.phi_delta(slope * r) * std::pow(r, -(p + 1.0));
    };
    std::vector<double> cuts{std::max(r_start, length * 1e-18)};
    for (double t : profile.structure_points()) {
        const double r = t * delta / as;
        if (r > cuts.front() && r < length) cuts.push_back(r);
    }
    cuts.push_back(length);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto r = adaptive_simpson(f, cuts[i], cuts[i + 1], 1e-14, 1e-11, 60);
        if (!r.converged) throw QuadratureFailure("lambda_affine_1d did not converge");
        total += r.value;
    }
    return total;
}

EnergyValue lambda_delta_on_line(const PiecewiseLinearFn& u, double delta, double p,
                                 const PhiProfile& profile, const QuadConfig& config) {
    if (!(delta > 0.0)) throw InvalidParameter("lambda_delta_on_line requires delta > 0");
    if (!(p >= 1.0)) throw InvalidParameter("lambda_delta_on_line requires p >= 1");
    if (std::abs(p - profile.p()) > 1e-12) throw InvalidParameter("profile exponent does not match the requested p");
    config.validate();
    const Kernel ker(profile, delta, p);
    const double a = u.x_lo(), b = u.x_hi();
    const double c_left = u.right_values().front();
    const double c_right = u.left_values().back();

    // interior jumps
    for (std::size_t i = 1; i + 1 < u.breakpoint_count(); ++i) {
        const double jump = std::abs(u.effective_jump(i));
        if (jump == 0.0) continue;
        if (auto cert = probe_jump(u.xs()[i], jump, ker, config.divergence_probe_levels))
            return EnergyValue::divergent(*cert);
    }

    // far-field x far-field: both sides are exact constants, so the pointwise value of
    // phi at the gap decides (p = 1 diverges whenever it is positive)
    const double far_gap = std::abs(c_left - c_right);
    double far_far = 0.0;
    if (far_gap > kJumpSnap) {
        const double phi_at = ker.phi_delta_snapped(far_gap);
        if (p == 1.0) {
            if (phi_at > 0.0) {
                DivergenceCertificate cert{b, far_gap, phi_at, 0.0, true};
                return EnergyValue::divergent(cert);
            }
        } else {
            far_far = 2.0 * phi_at * std::pow(b - a, 1.0 - p) / (p * (p - 1.0));
        }
    }

    // window x far-field halves: inner integral over the half line collapses to
    // (dist to edge)^{-p}/p against the window trace
    const auto segs = segments_of(u);
    double tails_value = 0.0;
    double tails_error = 0.0;
    for (int side = 0; side < 2; ++side) {
        const double edge = side == 0 ? a : b;
        const double cval = side == 0 ? c_left : c_right;
        for (const auto& seg : segs) {
            const bool flat = seg.slope == 0.0;
            auto f = [&](double x) {
                const double w = (seg.u0 + seg.slope * (x - seg.x0)) - cval;
                const double dist = side == 0 ? x - edge : edge - x;
                if (dist <= 0.0) return 0.0;
                const double phi_val = flat ? ker.phi_delta_snapped(w) : ker.phi_delta(w);
                return 2.0 * phi_val * std::pow(dist, -p) / p;
            };
            std::vector<double> cuts;
            // structure crossings of |u - cval| within the segment
            if (seg.slope != 0.0) {
                auto add = [&](double tau) {
                    const double x = (tau - (seg.u0 - cval)) / seg.slope + seg.x0;
                    if (x > seg.x0 && x < seg.x1) cuts.push_back(x);
                };
                add(0.0);
                for (double t : profile.structure_points()) {
                    add(t * delta);
                    add(-t * delta);
                }
            }
            double lo = seg.x0, hi = seg.x1;
            if (side == 0 && seg.x0 == a) lo = a + (b - a) * 1e-18;
            if (side == 1 && seg.x1 == b) hi = b - (b - a) * 1e-18;
            if (!(hi > lo)) continue;
            cuts.push_back(lo);
            cuts.push_back(hi);
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                                      [&](double x) { return x < lo || x > hi; }),
                       cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const auto r = adaptive_gauss(f, cuts[i], cuts[i + 1], 1e-14, config.rel_tol,
                                              config.gauss_order, config.max_subdivision_depth);
                if (!r.converged)
                    throw QuadratureFailure("inconclusive far-field evaluation near the window edge");
                tails_value += r.value;
                tails_error += r.error;
            }
        }
    }

    return sum_pairs(segs, ker, config, tails_value + far_far, tails_error);
}

} // namespace gammalab
