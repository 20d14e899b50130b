#include "gammalab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "gammalab/energy.hpp"
#include "gammalab/errors.hpp"
#include "gammalab/rng.hpp"

namespace gammalab {

namespace {

PiecewiseLinearFn random_pwl(RngStream& rng) {
    const int interior = 1 + static_cast<int>(rng.uniform_index(5));
    std::vector<double> xs{0.0};
    for (int i = 0; i < interior; ++i) xs.push_back(rng.uniform(0.05, 0.95));
    xs.push_back(1.0);
    std::sort(xs.begin(), xs.end());
    // enforce a minimal gap so segments stay well separated
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] - xs[i - 1] < 1e-3) xs[i] = xs[i - 1] + 1e-3;
    std::vector<double> lv, rv;
    double v = rng.uniform(-1.0, 1.0);
    lv.push_back(v);
    rv.push_back(v);
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double left = rng.uniform(-1.0, 1.0);
        const bool jump = rng.uniform01() < 0.4;
        lv.push_back(left);
        rv.push_back(jump ? rng.uniform(-1.0, 1.0) : left);
    }
    const double end = rng.uniform(-1.0, 1.0);
    lv.push_back(end);
    rv.push_back(end);
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

struct EvalOutcome {
    bool finite = true;
    double value = 0.0;
    bool inconclusive = false;
};

EvalOutcome safe_eval(const PiecewiseLinearFn& u, const Interval& interval, double delta,
                      double p, const PhiProfile& profile, const QuadConfig& cfg) {
    EvalOutcome out;
    try {
        const EnergyValue e = lambda_delta(u, interval, delta, p, profile, cfg);
        out.finite = e.is_finite();
        out.value = e.value;
    } catch (const QuadratureFailure&) {
        out.inconclusive = true;
    }
    return out;
}

bool outcomes_match(const EvalOutcome& a, const EvalOutcome& b, double tol) {
    if (a.inconclusive || b.inconclusive) return a.inconclusive == b.inconclusive;
    if (a.finite != b.finite) return false;
    if (!a.finite) return true;
    return std::abs(a.value - b.value) <= tol * std::max({1.0, std::abs(a.value), std::abs(b.value)});
}

} // namespace

InvariantReport run_invariant_corpus(int count, std::uint64_t seed, std::ostream* log) {
    InvariantReport report;
    QuadConfig cfg;
    cfg.rel_tol = 1e-8;
    const double sym_tol = 1e-6;

    std::vector<PhiProfile> profiles{
        normalize(PhiProfile::indicator_step(1.0)),
        normalize(PhiProfile::saturating_power(1.0)),
        normalize(PhiProfile::compact_bump(1.0)),
        normalize(PhiProfile::saturating_power(2.0)),
    };
    const double deltas[] = {0.3, 0.15};

    for (int n = 0; n < count; ++n) {
        RngStream rng = make_stream(seed, 0xC0FFEE, static_cast<std::uint64_t>(n));
        const PiecewiseLinearFn u = random_pwl(rng);
        const PhiProfile& profile = profiles[n % profiles.size()];
        const double p = profile.p();
        const double delta = deltas[n % 2];
        const Interval full{0.0, 1.0, false};
        ++report.functions;

        auto fail = [&](const std::string& what, const std::string& detail) {
            std::ostringstream os;
            os << "fn#" << n << " [" << to_string(profile.kind()) << ", p=" << p
               << ", delta=" << delta << "] " << what << ": " << detail;
            report.failures.push_back(os.str());
        };

        const EvalOutcome base = safe_eval(u, full, delta, p, profile, cfg);

        // kernel symmetries
        {
            ++report.checks;
            const EvalOutcome neg = safe_eval(u.negate(), full, delta, p, profile, cfg);
            if (!outcomes_match(base, neg, sym_tol)) fail("negation symmetry", "mismatch");
            ++report.checks;
            const EvalOutcome shifted = safe_eval(u.shift_values(0.37), full, delta, p, profile, cfg);
            if (!outcomes_match(base, shifted, sym_tol)) fail("shift symmetry", "mismatch");
            ++report.checks;
            const EvalOutcome refl = safe_eval(u.reflect(), full, delta, p, profile, cfg);
            if (!outcomes_match(base, refl, sym_tol)) fail("reflection symmetry", "mismatch");
        }

        // domain monotonicity on a strict subwindow
        {
            ++report.checks;
            const Interval sub{0.2, 0.85, false};
            const EvalOutcome inner = safe_eval(u, sub, delta, p, profile, cfg);
            if (!inner.inconclusive && !base.inconclusive) {
                if (base.finite && !inner.finite)
                    fail("domain monotonicity", "subinterval divergent but full interval finite");
                else if (base.finite && inner.finite &&
                         inner.value > base.value * (1.0 + 1e-9) + 1e-12)
                    fail("domain monotonicity", "subinterval energy exceeds full energy");
            }
        }

        // additivity lower bound across a midpoint split
        if (base.finite && !base.inconclusive) {
            ++report.checks;
            const EvalOutcome left = safe_eval(u, {0.0, 0.5, false}, delta, p, profile, cfg);
            const EvalOutcome right = safe_eval(u, {0.5, 1.0, false}, delta, p, profile, cfg);
            if (left.finite && right.finite && !left.inconclusive && !right.inconclusive &&
                left.value + right.value > base.value * (1.0 + 1e-9) + 1e-12)
                fail("additivity lower bound", "split sum exceeds total");
        }

        // determinism across thread counts (bit-exact)
        {
            ++report.checks;
            setenv("GAMMA_LAB_THREADS", "1", 1);
            const EvalOutcome one = safe_eval(u, full, delta, p, profile, cfg);
            setenv("GAMMA_LAB_THREADS", "3", 1);
            const EvalOutcome three = safe_eval(u, full, delta, p, profile, cfg);
            unsetenv("GAMMA_LAB_THREADS");
            if (one.inconclusive != three.inconclusive || one.finite != three.finite ||
                (one.finite && one.value != three.value))
                fail("thread determinism", "results differ across thread counts");
        }

        if (log && (n + 1) % 25 == 0)
            *log << "invariants: " << (n + 1) << "/" << count << " functions checked\n";
    }
    return report;
}

} // namespace gammalab
