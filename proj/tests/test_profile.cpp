#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gammalab/errors.hpp"
#include "gammalab/profile.hpp"
#include "oracles.hpp"

using namespace gammalab;

namespace {
std::string data_path(const char* name) {
    return std::string(GAMMALAB_TEST_DATA_DIR) + "/" + name;
}
} // namespace

TEST_CASE("step indicator evaluates with the open threshold") {
    const auto phi = PhiProfile::indicator_step(1.0, 0.5);
    CHECK(phi.eval(0.5) == 0.0);
    CHECK(phi.eval(2.0) == 0.5);
    CHECK(phi.eval(0.0) == 0.0);
    CHECK(phi.eval(1.0) == 0.0); // pointwise value at the jump equals the left limit
    CHECK_THROWS_AS(phi.eval(-0.1), InvalidParameter);
}

TEST_CASE("saturating power evaluates min(t^{p+1},1)") {
    const auto phi = PhiProfile::saturating_power(1.0, 0.25);
    CHECK(phi.eval(0.5) == doctest::Approx(0.0625));
    CHECK(phi.eval(3.0) == doctest::Approx(0.25));
}

TEST_CASE("compact bump is closed at its support edge") {
    const auto phi = PhiProfile::compact_bump(1.0, 0.5);
    CHECK(phi.eval(0.5) == doctest::Approx(0.125));
    CHECK(phi.eval(1.0) == doctest::Approx(0.5));
    CHECK(phi.eval(1.0 + 1e-12) == 0.0);
    CHECK(phi.support_upper() == doctest::Approx(1.0));
}

TEST_CASE("rescaled kernel") {
    const auto phi = PhiProfile::indicator_step(1.0, 0.5);
    CHECK(phi.eval_delta(0.5, 0.1) == doctest::Approx(0.05)); // t/delta = 5 -> 0.1 * 1/2
    CHECK(phi.eval_delta(0.0, 0.3) == 0.0);
    CHECK_THROWS_AS(phi.eval_delta(0.5, 0.0), InvalidParameter);
    const auto bump = PhiProfile::compact_bump(1.0, 0.5);
    CHECK(bump.eval_delta(0.05, 0.1) == doctest::Approx(0.0125)); // 0.1 * (0.5)^2 * 1/2
    // scaling consistency: delta = 1 reduces to the kernel itself
    for (double t : {0.0, 0.3, 0.9, 1.7})
        CHECK(bump.eval_delta(t, 1.0) == doctest::Approx(bump.eval(t)));
}

TEST_CASE("normalization integrals of the built-in shapes") {
    CHECK(normalization_integral(PhiProfile::indicator_step(1.0, 0.5)) ==
          doctest::Approx(0.5).epsilon(1e-10));
    CHECK(normalization_integral(PhiProfile::saturating_power(1.0, 0.25)) ==
          doctest::Approx(0.5).epsilon(1e-10));
    CHECK(normalization_integral(PhiProfile::compact_bump(1.0, 0.5)) ==
          doctest::Approx(0.5).epsilon(1e-10));
    // p = 2 closed form: saturating integrates to scale * (1 + 1/p)
    CHECK(normalization_integral(PhiProfile::saturating_power(2.0, 1.0)) ==
          doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("normalize rescales and is idempotent") {
    const auto step = normalize(PhiProfile::indicator_step(1.0, 1.0));
    CHECK(step.scale() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(step.normalized());
    const auto twice = normalize(step);
    CHECK(twice.scale() == doctest::Approx(step.scale()).epsilon(1e-12));

    const auto sat2 = normalize(PhiProfile::saturating_power(2.0, 1.0));
    CHECK(sat2.scale() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    for (const auto& phi : {normalize(PhiProfile::indicator_step(1.0)),
                            normalize(PhiProfile::saturating_power(1.0)),
                            normalize(PhiProfile::compact_bump(1.0))}) {
        const double integral = normalization_integral(phi);
        CHECK(integral >= 0.5 - 1e-9);
        CHECK(integral <= 0.5 + 1e-9);
    }
}

TEST_CASE("scale doubling doubles the kernel pointwise") {
    const auto phi = PhiProfile::saturating_power(1.0, 0.25);
    const auto twice = phi.with_scale(0.5);
    for (double t : {0.1, 0.5, 0.9, 1.5, 4.0})
        CHECK(twice.eval(t) == doctest::Approx(2.0 * phi.eval(t)).epsilon(1e-14));
}

TEST_CASE("verify_conditions on the built-ins") {
    const auto step = verify_conditions(PhiProfile::indicator_step(1.0, 0.5));
    CHECK(step.growth_ok);
    CHECK(step.bounded_ok);
    CHECK(step.normalized_ok);
    CHECK(step.alpha_measured == doctest::Approx(0.0)); // phi vanishes on [0,1]

    const auto bump = verify_conditions(PhiProfile::compact_bump(1.0, 0.5));
    CHECK(bump.passed());
    CHECK(bump.alpha_measured == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(bump.beta_measured == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a kernel exceeding its declared growth cap fails") {
    // phi(0.5) = 10 with a declared alpha of 1: growth condition must fail
    auto phi = PhiProfile::tabulated(1.0, {0.0, 0.25, 0.5, 0.75, 4.0}, {0.0, 0.0, 10.0, 0.0, 0.0},
                                     {});
    phi = phi.with_declared_bounds(1.0, 10.0);
    const auto report = verify_conditions(phi);
    CHECK(!report.growth_ok);
    CHECK(report.alpha_measured >= 10.0 / std::pow(0.5, 2.0) * 0.99);
}

TEST_CASE("tabulated profiles load, evaluate, and integrate") {
    const auto phi = PhiProfile::load_tabulated(data_path("profile_ramp.txt"), 1.0);
    // file declares a jump at t = 2 from 0.4 down to 0.1
    CHECK(phi.eval(2.0) == doctest::Approx(0.4));          // left value at the jump
    CHECK(phi.eval(2.0 + 1e-9) == doctest::Approx(0.1));   // right side
    CHECK(phi.eval(10.0) == doctest::Approx(0.1));         // constant tail
    CHECK(phi.zero_threshold() == doctest::Approx(0.5));

    const double integral = normalization_integral(phi);
    // independent trapezoid oracle on [zero threshold, last knot] plus the exact tail
    auto integrand = [&](double t) { return phi.eval(t) / (t * t); };
    const double head = oracles::trapezoid_refine(integrand, 0.5, 2.0, 1e-9);
    // piecewise refinement across the jump
    const double mid = oracles::trapezoid_refine([&](double t) { return phi.eval(t + 1e-12) / (t * t); },
                                                 2.0, 4.0, 1e-9);
    const double tail = 0.1 / 4.0; // int_4^inf 0.1 t^-2
    CHECK(integral == doctest::Approx(head + mid + tail).epsilon(1e-6));

    const auto normalized = normalize(phi);
    CHECK(normalization_integral(normalized) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("tabulated antiderivative matches a refined trapezoid") {
    const auto phi = PhiProfile::load_tabulated(data_path("profile_ramp.txt"), 1.0);
    for (double w : {0.7, 1.5, 2.5, 6.0}) {
        const double ref = oracles::trapezoid_refine([&](double t) { return phi.eval(t + 1e-13); },
                                                     0.0, w, 1e-10);
        CHECK(phi.antiderivative(w) == doctest::Approx(ref).epsilon(1e-7));
    }
}

TEST_CASE("tabulated with a linear head cannot be normalized") {
    const auto phi = PhiProfile::tabulated(1.0, {0.0, 1.0, 2.0}, {0.0, 1.0, 1.0}, {});
    CHECK_THROWS_AS(normalization_integral(phi), QuadratureFailure);
    CHECK(!std::isfinite(phi.alpha()));
}

TEST_CASE("degenerate profile cannot be normalized") {
    const auto zero = PhiProfile::tabulated(1.0, {0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {});
    CHECK_THROWS_AS(normalize(zero), DegenerateProfile);
}

TEST_CASE("punctured infimum keeps threshold zeros convergent") {
    const auto step = PhiProfile::indicator_step(1.0, 0.5);
    // band around the threshold: the left side keeps the infimum at zero
    CHECK(step.inf_on(0.9, 1.1, 1.0) == doctest::Approx(0.0));
    // band strictly beyond the threshold is bounded below
    CHECK(step.inf_on(1.5, 2.5) == doctest::Approx(0.5));
    // the puncture ignores the pointwise zero at the jump when the approach is positive:
    // a profile that jumps down to its zero set at t = 1 from value 0.2
    const auto drop = PhiProfile::tabulated(1.0, {0.0, 0.5, 1.0, 1.0, 4.0},
                                            {0.0, 0.0, 0.2, 0.0, 0.0}, {1.0});
    CHECK(drop.eval(1.0) == doctest::Approx(0.2)); // left value at the jump
    CHECK(drop.inf_on(0.99, 1.01, 1.0) == doctest::Approx(0.0));
}
