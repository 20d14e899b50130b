#include <doctest.h>

#include <cmath>

#include "gammalab/errors.hpp"
#include "gammalab/estimators.hpp"
#include "gammalab/recovery.hpp"
#include "oracles.hpp"

using namespace gammalab;

namespace {
const Interval kUnit{0.0, 1.0, false};
PhiProfile step1() { return normalize(PhiProfile::indicator_step(1.0)); }
PhiProfile sat1() { return normalize(PhiProfile::saturating_power(1.0)); }
PhiProfile bump1() { return normalize(PhiProfile::compact_bump(1.0)); }
PiecewiseLinearFn unit_fn() { return make_affine(kUnit, 1.0, 0.0); }

OptimizerConfig quick_opt() {
    OptimizerConfig opt;
    opt.restarts = 2;
    opt.anneal_steps = 60;
    opt.polish_sweeps = 1;
    opt.search_rel_tol = 1e-4;
    return opt;
}
} // namespace

TEST_CASE("pointwise scan matches the closed forms") {
    const auto scan = pointwise_scan(unit_fn(), kUnit, step1(), 1.0, {0.1, 0.01, 0.001});
    REQUIRE(scan.energies.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(scan.energies[i] ==
              doctest::Approx(oracles::identity_energy_step_p1(scan.deltas[i])).epsilon(1e-6));
    CHECK(scan.target == doctest::Approx(1.0));
    CHECK(scan.energies[0] < scan.energies[1]);
    CHECK(scan.energies[1] < scan.energies[2]);
    // the delta + delta ln(1/delta) model nails this closed form, so the fitted limit is sharp
    CHECK(scan.extrapolated == doctest::Approx(1.0).epsilon(1e-4));

    const auto sat_scan = pointwise_scan(unit_fn(), kUnit, sat1(), 1.0, {0.1, 0.01});
    CHECK(sat_scan.energies[1] == doctest::Approx(0.969474).epsilon(1e-5));
}

TEST_CASE("pointwise scan of a constant is identically zero") {
    const auto scan = pointwise_scan(make_constant(kUnit, 2.0), kUnit, step1(), 1.0, {0.1, 0.05});
    CHECK(scan.target == 0.0);
    for (double e : scan.energies) CHECK(e == 0.0);
}

TEST_CASE("pointwise scan rejects discontinuous input") {
    CHECK_THROWS_AS(pointwise_scan(make_heaviside(kUnit, 0.5), kUnit, step1(), 1.0, {0.1}),
                    InvalidParameter);
}

TEST_CASE("kappa estimate for the step kernel sits below the identity energy") {
    const auto est = estimate_kappa(step1(), 1.0, {0.1, 0.05}, 40, quick_opt());
    REQUIRE(est.per_delta.size() == 2);
    // the threshold staircase is found at both rungs
    CHECK(est.per_delta[0].best_energy <=
          oracles::staircase_energy_step_p1(0.1) + 1e-6);
    CHECK(est.per_delta[1].best_energy <= oracles::staircase_energy_step_p1(0.05) + 1e-6);
    CHECK(est.value <= 0.70);
    CHECK(est.value >= 0.0);
    CHECK(est.value <= 1.0 + 1e-6);
    // recorded minima satisfy the constraint schedule
    for (const auto& pt : est.per_delta)
        CHECK(pt.constraint_distance <= constraint_epsilon(pt.delta) + 1e-12);
    // strictly below the identity energy at every rung
    for (const auto& pt : est.per_delta)
        CHECK(pt.best_energy < oracles::identity_energy_step_p1(pt.delta) - 0.05);
    // bracket sanity
    CHECK(est.bracket_low <= est.bracket_high);
}

TEST_CASE("kappa estimate is exactly zero for the bump kernel") {
    const auto est = estimate_kappa(bump1(), 1.0, {0.1, 0.05}, 40, quick_opt());
    for (const auto& pt : est.per_delta) CHECK(pt.best_energy == 0.0);
    CHECK(est.value == 0.0);
}

TEST_CASE("more restarts never worsen the estimate (prefix property)") {
    OptimizerConfig small = quick_opt();
    small.restarts = 1;
    small.anneal_steps = 40;
    OptimizerConfig big = small;
    big.restarts = 3;
    const auto e1 = estimate_kappa(step1(), 1.0, {0.1}, 30, small);
    const auto e3 = estimate_kappa(step1(), 1.0, {0.1}, 30, big);
    CHECK(e3.value <= e1.value + 1e-12);
}

TEST_CASE("gamma estimate: zero for the bump kernel, close to kappa for the step kernel") {
    const auto gb = estimate_gamma_step(bump1(), {0.1, 0.05}, 40, quick_opt());
    CHECK(gb.value == 0.0);

    const auto gs = estimate_gamma_step(step1(), {0.1, 0.05}, 40, quick_opt());
    const auto ks = estimate_kappa(step1(), 1.0, {0.1, 0.05}, 40, quick_opt());
    CHECK(std::abs(gs.value - ks.value) <= 0.05);
    CHECK(gs.value >= 0.0);
}

TEST_CASE("gamma estimate requires p = 1") {
    CHECK_THROWS_AS(estimate_gamma_step(normalize(PhiProfile::saturating_power(2.0)), {0.1}, 20,
                                        quick_opt()),
                    InvalidParameter);
}

TEST_CASE("estimates require a normalized profile") {
    CHECK_THROWS_AS(estimate_kappa(PhiProfile::indicator_step(1.0, 0.3), 1.0, {0.1}, 20, quick_opt()),
                    InvalidParameter);
}

TEST_CASE("log ladder follows the integer-log spacing rule") {
    const auto ladder = log_ladder(0.1, 3);
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[0] == doctest::Approx(0.1));
    CHECK(ladder[1] == doctest::Approx(0.1 / 3.0)); // ceil(ln 10) = 3
    CHECK(ladder[2] == doctest::Approx(ladder[1] / std::ceil(std::log(1.0 / ladder[1]))));
}

TEST_CASE("g1 lower probe accepts recovery families and flags non-convergent ones") {
    const auto phi = step1();
    const double kappa_est = 0.5;

    G1Family good;
    good.name = "staircases";
    for (double delta : {0.2, 0.1, 0.05}) {
        good.deltas.push_back(delta);
        good.members.push_back(make_unit_staircase(delta));
    }
    G1Family constant_family;
    constant_family.name = "frozen";
    for (double delta : {0.2, 0.1, 0.05}) {
        constant_family.deltas.push_back(delta);
        constant_family.members.push_back(unit_fn());
    }
    G1Family bad;
    bad.name = "drifting";
    for (double delta : {0.2, 0.1, 0.05}) {
        bad.deltas.push_back(delta);
        bad.members.push_back(make_constant(kUnit, 5.0)); // far from U, never converges
    }

    const auto report = g1_lower_probe(unit_fn(), {good, constant_family, bad}, phi, 1.0,
                                       kappa_est, std::nullopt, 0.25, 0.75, 0.05);
    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].converged);
    CHECK(report.entries[0].pass);
    CHECK(report.entries[0].tail_min_energy >= kappa_est - 0.05);
    CHECK(report.entries[1].converged); // identically-U family trivially converges
    CHECK(report.entries[1].pass);
    CHECK(!report.entries[2].converged);
    CHECK(!report.all_pass());
}

TEST_CASE("g1 jump form for p = 1") {
    const auto phi = step1();
    G1Family ramps;
    ramps.name = "step-ramps";
    for (double delta : {0.1, 0.05}) {
        ramps.deltas.push_back(delta);
        ramps.members.push_back(recover_step_p1(0.5, delta, phi));
    }
    const auto h = make_heaviside(kUnit, 0.5);
    const auto report = g1_lower_probe(h, {ramps}, phi, 1.0, 0.5, 0.35, 0.2, 0.8, 0.1);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].converged);
    CHECK(report.entries[0].jump_pass);
}

TEST_CASE("sobolev membership probe") {
    const auto u_probe = sobolev_membership_probe(unit_fn(), 2.0, {0.1, 0.01});
    CHECK(u_probe.values[0] == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(u_probe.values[1] == doctest::Approx(0.99).epsilon(1e-10));
    CHECK(!u_probe.unbounded);
    CHECK(u_probe.supremum <= 1.0);

    const auto h_probe = sobolev_membership_probe(make_heaviside(kUnit, 0.5), 2.0, {0.1, 0.01});
    CHECK(h_probe.values[0] == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(h_probe.values[1] == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(h_probe.unbounded);

    const auto tent = PiecewiseLinearFn::continuous({0.0, 0.5, 1.0}, {0.0, 0.5, 0.0});
    const auto t_probe = sobolev_membership_probe(tent, 2.0, {0.1, 0.01});
    CHECK(!t_probe.unbounded);
    CHECK(t_probe.supremum <= sobolev_seminorm_p(tent, 2.0) + 1e-9);
}
