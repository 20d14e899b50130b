#include "gammalab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gammalab/errors.hpp"
#include "gammalab/recovery.hpp"
#include "gammalab/rng.hpp"

namespace gammalab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_decreasing(const std::vector<double>& ladder) {
    if (ladder.empty()) throw InvalidParameter("delta ladder must be nonempty");
    for (double d : ladder)
        if (!(d > 0.0)) throw InvalidParameter("delta ladder entries must be positive");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1]))
            throw InvalidParameter("delta ladder must be strictly decreasing");
}

// least squares for y ~ c0 + c1*delta + c2*delta*ln(1/delta) (columns trimmed to the
// available point count); returns the fitted value at delta = 0
struct GapFit {
    double at_zero = 0.0;
    double lin = 0.0;
    double log = 0.0;
};

GapFit fit_delta_model(const std::vector<double>& deltas, const std::vector<double>& values) {
    const std::size_t n = deltas.size();
    GapFit fit;
    if (n == 1) {
        fit.at_zero = values[0];
        return fit;
    }
    auto solve2 = [&](auto basis1) {
        // 2x2 normal equations for y ~ c0 + c1*basis1(delta)
        double s11 = static_cast<double>(n), s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = basis1(deltas[i]);
            s12 += f;
            s22 += f * f;
            b1 += values[i];
            b2 += values[i] * f;
        }
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) < 1e-30) return std::pair<double, double>{values[0], 0.0};
        return std::pair<double, double>{(b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det};
    };
    auto log_basis = [](double d) { return d * std::log(1.0 / d); };
    if (n == 2) {
        auto [c0, c1] = solve2(log_basis);
        fit.at_zero = c0;
        fit.log = c1;
        return fit;
    }
    // 3x3 normal equations for y ~ c0 + c1*delta + c2*delta*ln(1/delta)
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double row[3] = {1.0, deltas[i], log_basis(deltas[i])};
        for (int r = 0; r < 3; ++r) {
            rhs[r] += values[i] * row[r];
            for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
        }
    }
    // Gaussian elimination with partial pivoting
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[idx[r]][col]) > std::abs(m[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        if (std::abs(m[idx[col]][col]) < 1e-30) {
            auto [c0, c1] = solve2(log_basis);
            fit.at_zero = c0;
            fit.log = c1;
            return fit;
        }
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[idx[r]][col] / m[idx[col]][col];
            for (int c = col; c < 3; ++c) m[idx[r]][c] -= f * m[idx[col]][c];
            rhs[idx[r]] -= f * rhs[idx[col]];
        }
    }
    double sol[3];
    for (int r = 2; r >= 0; --r) {
        double s = rhs[idx[r]];
        for (int c = r + 1; c < 3; ++c) s -= m[idx[r]][c] * sol[c];
        sol[r] = s / m[idx[r]][r];
    }
    fit.at_zero = sol[0];
    fit.lin = sol[1];
    fit.log = sol[2];
    return fit;
}

} // namespace

double constraint_epsilon(double delta) { return std::sqrt(delta); }

std::vector<double> log_ladder(double start, int count) {
    if (!(start > 0.0) || !(start < 1.0) || count < 1)
        throw InvalidParameter("log ladder needs start in (0,1) and count >= 1");
    std::vector<double> out{start};
    for (int i = 1; i < count; ++i) {
        const double prev = out.back();
        const double div = std::max(2.0, std::ceil(std::log(1.0 / prev)));
        out.push_back(prev / div);
    }
    return out;
}

ConvergenceScan pointwise_scan(const PiecewiseLinearFn& u, const Interval& interval,
                               const PhiProfile& profile, double p,
                               const std::vector<double>& ladder, const QuadConfig& config) {
    require_decreasing(ladder);
    if (!u.restricted(interval).is_continuous())
        throw InvalidParameter("pointwise scan expects a continuous function");
    if (!profile.normalized())
        throw InvalidParameter("pointwise scan expects a normalized profile");
    ConvergenceScan scan;
    scan.deltas = ladder;
    scan.target = sobolev_seminorm_p(u.restricted(interval), p);
    for (double delta : ladder) {
        const EnergyValue e = lambda_delta(u, interval, delta, p, profile, config);
        if (!e.is_finite())
            throw EstimationFailure("scan aborted: " + e.certificate->describe());
        scan.energies.push_back(e.value);
    }
    const GapFit fit = fit_delta_model(scan.deltas, scan.energies);
    scan.extrapolated = fit.at_zero;
    scan.fit_linear = fit.lin;
    scan.fit_log = fit.log;
    return scan;
}

namespace {

// value degrees of freedom of a candidate: continuous breakpoints expose one slot,
// jump breakpoints two (left and right stay independently movable)
struct Dofs {
    std::vector<std::pair<std::size_t, int>> slots; // (breakpoint index, side): side 0 = both

    static Dofs of(const PiecewiseLinearFn& fn) {
        Dofs d;
        const std::size_t n = fn.breakpoint_count();
        for (std::size_t i = 0; i < n; ++i) {
            const bool boundary = i == 0 || i + 1 == n;
            if (boundary || fn.effective_jump(i) == 0.0)
                d.slots.emplace_back(i, 0);
            else {
                d.slots.emplace_back(i, -1);
                d.slots.emplace_back(i, +1);
            }
        }
        return d;
    }
};

PiecewiseLinearFn with_slot(const PiecewiseLinearFn& fn, const std::pair<std::size_t, int>& slot,
                            double delta_value) {
    auto lv = fn.left_values();
    auto rv = fn.right_values();
    const auto [i, side] = slot;
    if (side <= 0) lv[i] += delta_value;
    if (side >= 0) rv[i] += delta_value;
    return PiecewiseLinearFn(fn.xs(), std::move(lv), std::move(rv));
}

struct Objective {
    const PhiProfile* profile;
    double p = 1.0;
    double delta = 0.0;
    double epsilon = 0.0;
    const PiecewiseLinearFn* target;
    QuadConfig quad;
    long evals = 0;

    // returns (energy, distance); +inf energy for divergent/inconclusive/infeasible
    std::pair<double, double> operator()(const PiecewiseLinearFn& v) {
        ++evals;
        const double dist = lp_distance(v, *target, p, target->domain());
        if (dist > epsilon) return {kInf, dist};
        try {
            const EnergyValue e = lambda_delta(v, {0.0, 1.0, false}, delta, p, *profile, quad);
            if (!e.is_finite()) return {kInf, dist};
            return {e.value, dist};
        } catch (const QuadratureFailure&) {
            return {kInf, dist};
        }
    }
};

struct StartResult {
    double energy = kInf;
    double distance = 0.0;
    PiecewiseLinearFn fn;
    long accepted = 0;
};

StartResult anneal_start(const PiecewiseLinearFn& seed_fn, Objective& objective,
                         const OptimizerConfig& opt, RngStream rng) {
    StartResult best{kInf, 0.0, seed_fn, 0};
    auto [e0, d0] = objective(seed_fn);
    if (!(e0 < kInf)) return best; // infeasible or divergent seed: skip this start
    best.energy = e0;
    best.distance = d0;

    PiecewiseLinearFn cur = seed_fn;
    double cur_energy = e0;
    const Dofs dofs = Dofs::of(seed_fn);
    double width = 0.05;
    double temperature = opt.initial_temperature;
    int batch_accepts = 0;
    for (int step = 0; step < opt.anneal_steps; ++step) {
        const auto& slot = dofs.slots[rng.uniform_index(dofs.slots.size())];
        const double move = width * rng.gaussian();
        const PiecewiseLinearFn prop = with_slot(cur, slot, move);
        const auto [e, d] = objective(prop);
        bool accept = false;
        if (e < kInf) {
            if (e <= cur_energy)
                accept = true;
            else
                accept = rng.uniform01() < std::exp(-(e - cur_energy) / std::max(temperature, 1e-12));
        }
        if (accept) {
            cur = prop;
            cur_energy = e;
            ++best.accepted;
            ++batch_accepts;
            if (e < best.energy) {
                best.energy = e;
                best.distance = d;
                best.fn = cur;
            }
        }
        temperature *= opt.cooling;
        if ((step + 1) % 25 == 0) { // steer the acceptance rate toward 0.3
            const double rate = batch_accepts / 25.0;
            width = std::clamp(width * std::exp(0.7 * (rate - 0.3)), 1e-4, 0.3);
            batch_accepts = 0;
        }
    }

    // deterministic coordinate polish from the best point
    PiecewiseLinearFn pol = best.fn;
    double pol_energy = best.energy;
    for (int sweep = 0; sweep < opt.polish_sweeps; ++sweep) {
        const double step_size = sweep == 0 ? 0.01 : 0.001;
        for (const auto& slot : dofs.slots) {
            for (double sgn : {+1.0, -1.0}) {
                const PiecewiseLinearFn prop = with_slot(pol, slot, sgn * step_size);
                const auto [e, d] = objective(prop);
                if (e < pol_energy) {
                    pol = prop;
                    pol_energy = e;
                    best.distance = d;
                }
            }
        }
    }
    if (pol_energy < best.energy) {
        best.energy = pol_energy;
        best.fn = pol;
    }
    return best;
}

struct Seed {
    std::string name;
    PiecewiseLinearFn fn;
};

std::vector<Seed> kappa_seeds(const PhiProfile& profile, double delta, int nodes) {
    std::vector<Seed> seeds;
    const Interval unit{0.0, 1.0, false};
    seeds.push_back({"U", make_affine(unit, 1.0, 0.0)});
    const double t_zero = profile.zero_threshold();
    const double t_sup = profile.support_upper();
    if (t_zero > 0.0 && delta * t_zero < 0.75)
        seeds.push_back({"staircase-threshold", make_unit_staircase(delta * t_zero)});
    if (std::isfinite(t_sup) && 2.0 * delta * t_sup < 0.75)
        seeds.push_back({"staircase-2support", make_unit_staircase(2.0 * delta * t_sup)});
    if (delta * (1.0 + 1e-6) < 0.75)
        seeds.push_back({"staircase-eps", make_unit_staircase(delta * (1.0 + 1e-6))});
    if (2.0 * delta < 0.75)
        seeds.push_back({"staircase-2delta", make_unit_staircase(2.0 * delta)});
    // sampled-U staircase on the requested node grid
    if (nodes >= 4) {
        std::vector<double> xs{0.0};
        std::vector<double> lv{0.5 / nodes}, rv{0.5 / nodes};
        for (int i = 1; i < nodes; ++i) {
            xs.push_back(static_cast<double>(i) / nodes);
            lv.push_back((i - 0.5) / nodes);
            rv.push_back((i + 0.5) / nodes);
        }
        xs.push_back(1.0);
        lv.push_back((nodes - 0.5) / nodes);
        rv.push_back((nodes - 0.5) / nodes);
        seeds.push_back({"sampled-U", PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv))});
    }
    return seeds;
}

std::vector<Seed> gamma_seeds(const PhiProfile& profile, double delta) {
    std::vector<Seed> seeds;
    const Interval unit{0.0, 1.0, false};
    const double cap = 0.5 * (1.0 - 1e-9);
    seeds.push_back({"ramp-default", recover_step_p1(0.5, delta, profile)});
    for (double frac : {1.0, 0.5, 0.25}) {
        const double w = cap * frac;
        seeds.push_back({"ramp-w" + std::to_string(frac), recover_step_p1_with_width(0.5, w, delta, profile)});
    }
    seeds.push_back({"heaviside", make_heaviside(unit, 0.5)});
    const double t_zero = profile.zero_threshold();
    if (t_zero > 0.0 && delta * t_zero < 0.75)
        seeds.push_back({"staircase-threshold", make_unit_staircase(delta * t_zero)});
    return seeds;
}

KappaEstimate run_estimate(const PhiProfile& profile, double p, const std::vector<double>& ladder,
                           int nodes, const OptimizerConfig& opt, const QuadConfig& config,
                           const PiecewiseLinearFn& target, bool gamma_mode) {
    require_decreasing(ladder);
    if (!profile.normalized())
        throw InvalidParameter("constant estimation expects a normalized profile");
    KappaEstimate est;
    est.diagnostics.seed = opt.seed;
    est.diagnostics.restarts = opt.restarts;
    est.value = kInf;

    QuadConfig search_quad = config;
    search_quad.rel_tol = std::max(opt.search_rel_tol, config.rel_tol);

    for (std::size_t di = 0; di < ladder.size(); ++di) {
        const double delta = ladder[di];
        const double eps = constraint_epsilon(delta);
        const std::vector<Seed> seeds =
            gamma_mode ? gamma_seeds(profile, delta) : kappa_seeds(profile, delta, nodes);

        LadderPoint point;
        point.delta = delta;
        point.best_energy = kInf;
        std::optional<PiecewiseLinearFn> best_fn;

        const int starts = std::max<int>(opt.restarts, 1);
        for (int s = 0; s < starts; ++s) {
            const Seed& seed = seeds[static_cast<std::size_t>(s) % seeds.size()];
            PiecewiseLinearFn start_fn = seed.fn;
            std::string name = seed.name;
            RngStream rng = make_stream(opt.seed, di, static_cast<std::uint64_t>(s));
            if (static_cast<std::size_t>(s) >= seeds.size()) {
                // later restarts perturb their seed
                const Dofs dofs = Dofs::of(start_fn);
                for (const auto& slot : dofs.slots)
                    start_fn = with_slot(start_fn, slot, 0.02 * rng.gaussian());
                name += "+noise";
            }
            Objective objective{&profile, p, delta, eps, &target, search_quad, 0};
            const StartResult r = anneal_start(start_fn, objective, opt, std::move(rng));
            point.starts_run++;
            point.accepted_moves += r.accepted;
            est.diagnostics.accepted_moves += r.accepted;
            if (r.energy < point.best_energy) {
                point.best_energy = r.energy;
                point.constraint_distance = r.distance;
                point.best_candidate = name;
                best_fn = r.fn;
            }
        }
        if (!best_fn)
            throw EstimationFailure("all starts were divergent or infeasible at delta = " +
                                    std::to_string(delta));
        // recorded minimum re-evaluated at the full tolerance
        const EnergyValue final_e = lambda_delta(*best_fn, {0.0, 1.0, false}, delta, p, profile, config);
        point.best_energy = final_e.value;
        point.constraint_distance = lp_distance(*best_fn, target, p, target.domain());
        est.per_delta.push_back(point);
        est.minimizers.push_back(*best_fn);
        est.value = std::min(est.value, point.best_energy);
    }

    // liminf proxy: min over the last three + extrapolation in delta*ln(1/delta)
    const std::size_t tail = std::min<std::size_t>(3, est.per_delta.size());
    std::vector<double> tds, tvs;
    for (std::size_t i = est.per_delta.size() - tail; i < est.per_delta.size(); ++i) {
        tds.push_back(est.per_delta[i].delta);
        tvs.push_back(est.per_delta[i].best_energy);
    }
    const GapFit fit = fit_delta_model(tds, tvs);
    est.extrapolated_limit = fit.at_zero;
    double tail_min = kInf;
    for (double v : tvs) tail_min = std::min(tail_min, v);
    est.bracket_low = std::min(tail_min, est.extrapolated_limit);
    est.bracket_high = std::max(tail_min, est.extrapolated_limit);
    return est;
}

} // namespace

KappaEstimate estimate_kappa(const PhiProfile& profile, double p, const std::vector<double>& ladder,
                             int nodes, const OptimizerConfig& opt, const QuadConfig& config) {
    const PiecewiseLinearFn target = make_affine({0.0, 1.0, false}, 1.0, 0.0);
    return run_estimate(profile, p, ladder, nodes, opt, config, target, false);
}

GammaEstimate estimate_gamma_step(const PhiProfile& profile, const std::vector<double>& ladder,
                                  int nodes, const OptimizerConfig& opt, const QuadConfig& config) {
    if (std::abs(profile.p() - 1.0) > 1e-12)
        throw InvalidParameter("the step-target constant is a p = 1 object");
    const PiecewiseLinearFn target = make_heaviside({0.0, 1.0, false}, 0.5);
    return run_estimate(profile, 1.0, ladder, nodes, opt, config, target, true);
}

bool G1ProbeReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.converged || !e.pass || !e.jump_pass) return false;
    return true;
}

G1ProbeReport g1_lower_probe(const PiecewiseLinearFn& g, const std::vector<G1Family>& families,
                             const PhiProfile& profile, double p, double kappa_est,
                             std::optional<double> gamma_est, double jump_t1, double jump_t2,
                             double slack, const QuadConfig& config) {
    G1ProbeReport report;
    const Interval domain = g.domain();
    const double target_seminorm = sobolev_seminorm_p(g, p);
    for (const auto& family : families) {
        G1ProbeEntry entry;
        entry.family = family.name;
        if (family.deltas.size() != family.members.size() || family.members.empty()) {
            report.entries.push_back(entry);
            continue;
        }
        // verify L^p convergence along the ladder
        std::vector<double> dists;
        for (const auto& member : family.members)
            dists.push_back(lp_distance(member, g, p, domain));
        bool non_increasing = true;
        for (std::size_t i = 1; i < dists.size(); ++i)
            if (dists[i] > dists[i - 1] + 1e-9) non_increasing = false;
        entry.final_distance = dists.back();
        entry.converged = non_increasing && dists.back() <= std::max(0.1, 0.5 * dists.front());
        if (!entry.converged) {
            report.entries.push_back(entry);
            continue;
        }

        const std::size_t tail = std::min<std::size_t>(3, family.members.size());
        double tail_min = kInf;
        double jump_tail_min = kInf;
        for (std::size_t i = family.members.size() - tail; i < family.members.size(); ++i) {
            const EnergyValue e =
                lambda_delta(family.members[i], domain, family.deltas[i], p, profile, config);
            if (e.is_finite()) tail_min = std::min(tail_min, e.value);
            if (jump_t1 > domain.a && jump_t2 < domain.b && jump_t1 < jump_t2) {
                const EnergyValue ej = lambda_delta(family.members[i], {jump_t1, jump_t2, false},
                                                    family.deltas[i], p, profile, config);
                if (ej.is_finite()) jump_tail_min = std::min(jump_tail_min, ej.value);
            }
        }
        entry.tail_min_energy = tail_min;
        entry.lower_bound = std::isfinite(target_seminorm)
                                ? kappa_est * target_seminorm - slack
                                : kappa_est * total_variation(g) - slack;
        entry.pass = tail_min >= entry.lower_bound;

        const double jump_gap = std::abs(g.eval(jump_t2) - g.eval(jump_t1));
        if (p == 1.0 && gamma_est) {
            entry.jump_tail_energy = jump_tail_min;
            entry.jump_lower_bound = *gamma_est * jump_gap - slack;
            entry.jump_pass = jump_tail_min >= entry.jump_lower_bound;
        } else if (p > 1.0 && jump_gap > 0.0 && std::isfinite(jump_tail_min)) {
            // sigma is not explicit; only the measured ratio is reported
            const double form = kappa_est * std::pow(jump_t2 - jump_t1, 1.0 - p) *
                                std::pow(jump_gap, p);
            entry.jump_tail_energy = jump_tail_min;
            entry.sigma_ratio = form > 0.0 ? jump_tail_min / form : 0.0;
        }
        report.entries.push_back(entry);
    }
    return report;
}

SobolevProbeReport sobolev_membership_probe(const PiecewiseLinearFn& u, double p,
                                            const std::vector<double>& h_ladder) {
    if (!(p > 1.0)) throw InvalidParameter("the membership probe is a p > 1 diagnostic");
    require_decreasing(h_ladder);
    SobolevProbeReport report;
    report.h_ladder = h_ladder;
    const Interval window = u.domain();
    for (double h : h_ladder) {
        const double v = difference_quotient_norm(u, h, p, window);
        report.values.push_back(v);
        report.supremum = std::max(report.supremum, v);
    }
    const double v0 = report.values.front();
    const double v1 = report.values.back();
    if (v0 > 0.0 && v1 > 0.0 && h_ladder.size() >= 2) {
        report.growth_exponent =
            std::log(v1 / v0) / std::log(h_ladder.front() / h_ladder.back());
        report.unbounded = report.growth_exponent >= 0.5 * (p - 1.0);
    }
    return report;
}

} // namespace gammalab
