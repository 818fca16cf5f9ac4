#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "switchkit/estimators.hpp"
#include "switchkit/recovery.hpp"
#include "support/specs.hpp"

using namespace switchkit;

namespace {

// exact sampled curves for an exponential spec
struct AnalyticCurves {
    GridFunction e_plus, e_minus, de_plus, de_minus;
};

AnalyticCurves exp_curves(const testspec::ExpOracle& oracle, double t_max, int n) {
    AnalyticCurves c;
    const auto grid = linspace(0.0, t_max, n);
    c.e_plus.grid = c.e_minus.grid = c.de_plus.grid = c.de_minus.grid = grid;
    c.e_plus.values.resize(grid.size());
    c.e_minus.values.resize(grid.size());
    c.de_plus.values.resize(grid.size());
    c.de_minus.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        c.e_plus.values[i] = oracle.E_plus(grid[i]);
        c.e_minus.values[i] = oracle.E_minus(grid[i]);
        c.de_plus.values[i] = oracle.dE_plus(grid[i]);
        c.de_minus.values[i] = oracle.dE_minus(grid[i]);
    }
    c.e_plus.tail = c.e_minus.tail = oracle.gamma();
    return c;
}

}  // namespace

TEST_CASE("expected-value inversion recovers the switching transforms exactly") {
    // algebraic round trip: assemble L(E+-) from the spec, invert, compare;
    // needs no monotonicity, so the oscillatory gamma pair is included
    for (const auto& spec : {testspec::exp_symmetric(), testspec::exp_asymmetric(),
                             testspec::gamma_nonmonotone(), testspec::first_attempt_spec(),
                             testspec::scaled_common_spec()}) {
        const CharacteristicSet cs = build_characteristics(spec);
        const auto [psi_p, psi_m] = invert_expected_values(cs.LE_plus, cs.LE_minus);
        for (double s : log_spaced(0.1, 10.0, 17)) {
            REQUIRE(psi_p(s) == Catch::Approx(spec.plus.laplace(s)).margin(1e-10));
            REQUIRE(psi_m(s) == Catch::Approx(spec.minus.laplace(s)).margin(1e-10));
        }
    }
}

TEST_CASE("symmetric special case by hand") {
    // E+ = e^{-2t}, E- = -E+: L(E+) = 1/(s+2) gives Psi+- = 1/(1+s)
    const TransformFn le_p = make_transform([](auto s) { return decltype(s)(1) / (s + decltype(s)(2)); });
    const TransformFn le_m = make_transform([](auto s) { return decltype(s)(-1) / (s + decltype(s)(2)); });
    const auto [psi_p, psi_m] = invert_expected_values(le_p, le_m);
    for (double s : {0.1, 1.0, 10.0}) {
        CHECK(psi_p(s) == Catch::Approx(1.0 / (1.0 + s)).margin(1e-12));
        CHECK(psi_m(s) == Catch::Approx(1.0 / (1.0 + s)).margin(1e-12));
    }
    // a probability transform tends to 1 at 0+
    CHECK(psi_p(1e-4) == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("singular denominators are caught") {
    // s L(E-) - 1 vanishes identically when L(E-) = 1/s
    const TransformFn le_p = make_transform([](auto s) { return decltype(s)(1) / (s + decltype(s)(2)); });
    const TransformFn flat = make_transform([](auto s) { return decltype(s)(1) / s; });
    const auto [psi_p, psi_m] = invert_expected_values(le_p, flat);
    CHECK_THROWS_AS(psi_p(1.0), singularity_error);
}

TEST_CASE("validate_pair on exact exponential curves") {
    const testspec::ExpOracle oracle{2.0, 1.0};
    const auto curves = exp_curves(oracle, 15.0, 2001);
    const PairValidation rep = validate_pair(curves.e_plus, curves.e_minus);
    CHECK(rep.limits_ok);
    CHECK(rep.gamma == Catch::Approx(1.0 / 3.0).margin(1e-4));
    CHECK(rep.verdict == PairVerdict::valid_consistent);
    CHECK(rep.monotone == CmVerdict::consistent);
}

TEST_CASE("validate_pair rejects mismatched tails") {
    GridFunction ep, em;
    ep.grid = em.grid = linspace(0.0, 20.0, 1001);
    ep.values.resize(ep.grid.size());
    em.values.resize(em.grid.size());
    for (std::size_t i = 0; i < ep.grid.size(); ++i) {
        ep.values[i] = 0.5 + 0.5 * std::exp(-ep.grid[i]);
        em.values[i] = 0.3 - 1.3 * std::exp(-em.grid[i]);
    }
    const PairValidation rep = validate_pair(ep, em);
    CHECK(!rep.limits_ok);
    CHECK(rep.verdict == PairVerdict::invalid);
    CHECK(rep.limit_reason.find("tail") != std::string::npos);
}

TEST_CASE("validate_pair flags the gamma pair as non-monotone") {
    // sample the exact curves by deformed-contour inversion
    const CharacteristicSet cs = build_characteristics(testspec::gamma_nonmonotone());
    GridFunction ep, em;
    ep.grid = em.grid = linspace(0.01, 30.0, 1500);
    ep.values.resize(ep.grid.size());
    em.values.resize(em.grid.size());
    for (std::size_t i = 0; i < ep.grid.size(); ++i) {
        ep.values[i] = invert_talbot(cs.LE_plus, ep.grid[i]);
        em.values[i] = invert_talbot(cs.LE_minus, em.grid[i]);
    }
    const PairValidation rep = validate_pair(ep, em);
    CHECK(rep.limits_ok);
    CHECK(rep.gamma == Catch::Approx(1.0 / 7.0).margin(1e-3));
    // the pair itself is a valid switch process, but monotone recovery is not available
    CHECK(rep.verdict != PairVerdict::invalid);
    CHECK(rep.monotone == CmVerdict::violated);
}

TEST_CASE("extract_divisors on exact exponential curves") {
    const testspec::ExpOracle oracle{2.0, 1.0};
    const auto curves = exp_curves(oracle, 15.0, 8001);
    const RecoveredPair pair =
        extract_divisors(curves.e_plus, curves.e_minus, curves.de_plus, curves.de_minus);
    CHECK(pair.gamma == Catch::Approx(1.0 / 3.0).margin(1e-6));
    CHECK(pair.alpha == Catch::Approx(1.0 / 3.0).margin(1e-6));
    CHECK(pair.alpha_from_integral == Catch::Approx(1.0 / 3.0).margin(1e-6));
    CHECK(pair.mass_x == Catch::Approx(1.0).margin(1e-4));
    // f_X is the Exp(1/lambda) density
    for (std::size_t i = 0; i < pair.f_x.grid.size(); i += 500)
        CHECK(pair.f_x.values[i] == Catch::Approx(oracle.f_X(pair.f_x.grid[i])).margin(1e-6));
    // recovered transforms
    for (double s : log_spaced(0.1, 10.0, 9)) {
        CHECK(pair.psi_plus(s) == Catch::Approx(1.0 / (1.0 + 2.0 * s)).margin(1e-4));
        CHECK(pair.psi_minus(s) == Catch::Approx(1.0 / (1.0 + s)).margin(1e-4));
    }
}

TEST_CASE("extract_divisors symmetric case") {
    const testspec::ExpOracle oracle{1.0, 1.0};
    const auto curves = exp_curves(oracle, 12.0, 4001);
    const RecoveredPair pair =
        extract_divisors(curves.e_plus, curves.e_minus, curves.de_plus, curves.de_minus);
    CHECK(pair.alpha == Catch::Approx(0.5).margin(1e-8));
    CHECK(pair.beta == Catch::Approx(0.5).margin(1e-8));
    for (std::size_t i = 0; i < pair.f_x.values.size(); i += 200)
        CHECK(pair.f_x.values[i] == Catch::Approx(pair.f_y.values[i]).margin(1e-10));
}

TEST_CASE("extract_divisors rejects the non-monotone gamma curves") {
    const CharacteristicSet cs = build_characteristics(testspec::gamma_nonmonotone());
    GridFunction ep, em, dep, dem;
    ep.grid = em.grid = dep.grid = dem.grid = linspace(0.01, 30.0, 1200);
    ep.values.resize(ep.grid.size());
    em.values.resize(em.grid.size());
    dep.values.resize(dep.grid.size());
    dem.values.resize(dem.grid.size());
    for (std::size_t i = 0; i < ep.grid.size(); ++i) {
        ep.values[i] = invert_talbot(cs.LE_plus, ep.grid[i]);
        em.values[i] = invert_talbot(cs.LE_minus, em.grid[i]);
        dep.values[i] = invert_talbot(cs.LEd_plus, dep.grid[i]);
        dem.values[i] = invert_talbot(cs.LEd_minus, dem.grid[i]);
    }
    CHECK_THROWS_AS(extract_divisors(ep, em, dep, dem), monotonicity_error);
}

TEST_CASE("extract_divisors consistency guards") {
    const testspec::ExpOracle oracle{2.0, 1.0};
    auto curves = exp_curves(oracle, 15.0, 2001);
    SECTION("tail mismatch") {
        GridFunction bad = curves.e_minus;
        for (auto& v : bad.values) v += 0.05;
        CHECK_THROWS_AS(extract_divisors(curves.e_plus, bad, curves.de_plus, curves.de_minus),
                        validation_error);
    }
    SECTION("alpha mismatch from a corrupted derivative") {
        GridFunction bad = curves.de_plus;
        for (auto& v : bad.values) v *= 1.2;
        CHECK_THROWS_AS(extract_divisors(curves.e_plus, curves.e_minus, bad, curves.de_minus),
                        validation_error);
    }
}

TEST_CASE("rebuild_switching_laws closes the loop on analytic curves") {
    const testspec::ExpOracle oracle{2.0, 1.0};
    const auto curves = exp_curves(oracle, 20.0, 400001);
    const RecoveredPair pair =
        extract_divisors(curves.e_plus, curves.e_minus, curves.de_plus, curves.de_minus);
    const auto [plus, minus] = rebuild_switching_laws(pair);
    for (double s : log_spaced(0.1, 10.0, 9)) {
        CHECK(plus.laplace(s) == Catch::Approx(1.0 / (1.0 + 2.0 * s)).margin(1e-8));
        CHECK(minus.laplace(s) == Catch::Approx(1.0 / (1.0 + s)).margin(1e-8));
    }
    // Wald identity for the rebuilt means
    CHECK(plus.mean == Catch::Approx(2.0).epsilon(0.02));
    CHECK(minus.mean == Catch::Approx(1.0).epsilon(0.02));

    RecoveredPair degenerate = pair;
    degenerate.alpha = 1.0;
    CHECK_THROWS_AS(rebuild_switching_laws(degenerate), parameter_error);
}

TEST_CASE("cycle representation identity") {
    const auto grid = log_spaced(0.1, 10.0, 17);
    SECTION("analytic form reaches machine precision") {
        CHECK(cycle_representation_check(testspec::exp_asymmetric(), grid).max_rel_error < 1e-10);
        CHECK(cycle_representation_check(testspec::exp_symmetric(), grid).max_rel_error < 1e-10);
        CHECK(cycle_representation_check(testspec::first_attempt_spec(), grid).max_rel_error < 1e-10);
    }
    SECTION("grid-based recovered pair stays quadrature-limited") {
        const testspec::ExpOracle oracle{2.0, 1.0};
        const auto curves = exp_curves(oracle, 15.0, 8001);
        const RecoveredPair pair =
            extract_divisors(curves.e_plus, curves.e_minus, curves.de_plus, curves.de_minus);
        CHECK(cycle_representation_check(pair, testspec::exp_asymmetric(), grid).max_rel_error < 1e-4);
    }
}

TEST_CASE("first-attempt constructions have monotone expected values") {
    // forward direction of the equivalence: a spec assembled from
    // first-attempt compounds must yield dE+ <= 0 and dE- >= 0
    for (const auto& spec : {testspec::first_attempt_spec(), testspec::scaled_common_spec()}) {
        const CharacteristicSet cs = build_characteristics(spec);
        for (double t : linspace(0.05, 15.0, 60)) {
            REQUIRE(invert(cs.LEd_plus, t, 14) <= 1e-4);
            REQUIRE(invert(cs.LEd_minus, t, 14) >= -1e-4);
        }
    }
}

TEST_CASE("Monte Carlo round trip at reduced scale") {
    // wiring smoke test of the full estimate -> smooth -> extract -> rebuild
    // pipeline at 2e5 paths; the full-scale run is an acceptance criterion
    const ProcessSpec spec = testspec::first_attempt_spec();
    const auto grid = linspace(0.0, 15.0, 257);
    const EstimateTable ep = estimate_E(spec, +1, grid, 200000, 211, 4);
    const EstimateTable em = estimate_E(spec, -1, grid, 200000, 223, 4);
    const GridFunction dep = smooth_derivative(ep);
    const GridFunction dem = smooth_derivative(em);
    GridFunction gep, gem;
    gep.grid = ep.grid;
    gep.values = ep.mean;
    gep.noise = ep.se;
    gem.grid = em.grid;
    gem.values = em.mean;
    gem.noise = em.se;
    ExtractOptions opt;
    opt.tail_eps = 5e-3;  // Monte Carlo noise floor at the tail
    const RecoveredPair pair = extract_divisors(gep, gem, dep, dem, opt);
    CHECK(std::abs(pair.alpha - 1.0 / 3.0) < 0.03);
    // the raw extracted densities integrate to one up to noise
    CHECK(std::abs(pair.mass_x - 1.0) < 1e-2);
    CHECK(std::abs(pair.mass_y - 1.0) < 1e-2);
    for (double v : pair.f_x.values) REQUIRE(v >= 0.0);
    const auto [plus, minus] = rebuild_switching_laws(pair);
    for (double s : log_spaced(0.1, 10.0, 9)) {
        CHECK(plus.laplace(s) == Catch::Approx(1.0 / (1.0 + 3.0 * s)).margin(0.08));
        CHECK(minus.laplace(s) == Catch::Approx(1.0 / (1.0 + 1.5 * s)).margin(0.08));
    }
}
