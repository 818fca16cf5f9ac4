#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "switchkit/laplace.hpp"
#include "switchkit/transform.hpp"
#include "support/specs.hpp"

using namespace switchkit;

namespace {
const TransformFn one_pole = make_transform([](auto s) { using S = decltype(s); return S(1) / (S(1) + s); });
const TransformFn heaviside = make_transform([](auto s) { using S = decltype(s); return S(1) / s; });
const TransformFn two_pole =
    make_transform([](auto s) { using S = decltype(s); return S(1) / ((S(1) + s) * (S(1) + s)); });
}  // namespace

TEST_CASE("laplace_of_cdf divides by s") {
    const TransformFn lf = laplace_of_cdf(one_pole);
    CHECK(lf(1.0) == Catch::Approx(0.5).margin(1e-15));
    // normalization: s * L(F)(s) -> 1 as s -> 0+
    CHECK(1e-8 * lf(1e-8) == Catch::Approx(1.0).margin(1e-6));
    const TransformFn lf3 = laplace_of_cdf(
        make_transform([](auto s) { using S = decltype(s); return S(1) / ((S(1) + s) * (S(1) + s) * (S(1) + s)); }));
    CHECK(lf3(2.0) == Catch::Approx((1.0 / 27.0) / 2.0).margin(1e-15));
    CHECK_THROWS_AS(lf(0.0), domain_error);
    CHECK_THROWS_AS(lf(-1.0), domain_error);
}

TEST_CASE("derivative_transform applies the derivative rule") {
    // constant: L(h) = 1/s, h(0) = 1 -> zero
    const TransformFn dz = derivative_transform(heaviside, 1.0);
    for (double s : {0.1, 1.0, 10.0}) CHECK(dz(s) == Catch::Approx(0.0).margin(1e-14));

    // exponential-spec E+: s L(E+) - 1 must match the direct assembly of
    // -2 Psi+ (1 - Psi-)/(1 - Psi+ Psi-)
    const testspec::ExpOracle oracle{2.0, 1.0};
    const TransformFn le = make_transform([oracle](auto s) {
        using S = decltype(s);
        return (s + S(oracle.gamma() * oracle.lambda())) / (s * (s + S(oracle.lambda())));
    });
    const TransformFn led = derivative_transform(le, 1.0);
    for (double s : {0.1, 0.5, 1.0, 5.0, 10.0}) {
        const double pp = 1.0 / (1.0 + 2.0 * s);
        const double pm = 1.0 / (1.0 + s);
        const double expected = -2.0 * pp * (1.0 - pm) / (1.0 - pp * pm);
        CHECK(led(s) == Catch::Approx(expected).margin(1e-10));
    }

    // L(1 - e^{-t}) = 1/(s(1+s)), h(0) = 0 -> 1/(1+s)
    const TransformFn l1me = make_transform([](auto s) { using S = decltype(s); return S(1) / (s * (S(1) + s)); });
    const TransformFn d1me = derivative_transform(l1me, 0.0);
    for (double s : {0.3, 2.0, 7.0}) CHECK(d1me(s) == Catch::Approx(1.0 / (1.0 + s)).margin(1e-14));
}

TEST_CASE("derivative of a CDF transform returns the density transform") {
    const TransformFn back = derivative_transform(laplace_of_cdf(one_pole), 0.0);
    for (double s : log_spaced(1e-2, 1e2, 9))
        CHECK(back(s) == Catch::Approx(one_pole(s)).margin(1e-12));
}

TEST_CASE("Gaver-Stehfest known pairs") {
    CHECK(invert(one_pole, 1.0, 18) == Catch::Approx(std::exp(-1.0)).margin(1e-8));
    for (double t : {0.5, 1.0, 7.0})
        CHECK(invert(heaviside, t) == Catch::Approx(1.0).margin(1e-10));
    CHECK(invert(two_pole, 2.0, 22) == Catch::Approx(2.0 * std::exp(-2.0)).margin(1e-7));
}

TEST_CASE("Gaver-Stehfest argument and precision errors") {
    CHECK_THROWS_AS(invert(one_pole, 0.0), domain_error);
    CHECK_THROWS_AS(invert(one_pole, -1.0), domain_error);
    CHECK_THROWS_AS(invert(one_pole, 1.0, 13), parameter_error);
    CHECK_THROWS_AS(invert(one_pole, 1.0, 28), precision_error);
    TransformFn double_only;
    double_only.eval = [](double s) { return 1.0 / (1.0 + s); };
    CHECK_THROWS_AS(invert(double_only, 1.0, 20), precision_error);
    CHECK(invert(double_only, 1.0, 14) == Catch::Approx(std::exp(-1.0)).margin(1e-5));
}

TEST_CASE("Gaver-Stehfest order escalation 8 -> 14 reduces error") {
    const auto suite_error = [](int order) {
        double worst = 0.0;
        for (double t : {0.5, 1.0, 2.0}) {
            worst = std::max(worst, std::abs(invert(one_pole, t, order) - std::exp(-t)));
            worst = std::max(worst, std::abs(invert(two_pole, t, order) - t * std::exp(-t)));
        }
        return worst;
    };
    CHECK(suite_error(14) < suite_error(8));
}

TEST_CASE("numeric_forward of a constant is c/s") {
    GridFunction g;
    g.grid = linspace(0.0, 5.0, 11);
    g.values.assign(11, 3.25);
    g.tail = 3.25;
    const TransformFn F = numeric_forward(g);
    for (double s : {0.2, 1.0, 4.0}) CHECK(F(s) == Catch::Approx(3.25 / s).margin(1e-13));
}

TEST_CASE("numeric_forward matches a known transform on a dense grid") {
    GridFunction g;
    g.grid = linspace(0.0, 20.0, 20001);
    g.values.resize(g.grid.size());
    for (std::size_t i = 0; i < g.grid.size(); ++i) g.values[i] = std::exp(-2.0 * g.grid[i]);
    g.tail = 0.0;
    const TransformFn F = numeric_forward(g);
    CHECK(F(1.0) == Catch::Approx(1.0 / 3.0).margin(1e-6));
    CHECK(forward_quadrature_error(g, 1.0) < 1e-6);
}

TEST_CASE("numeric_forward agrees with the closed-form expected-value transform") {
    const testspec::ExpOracle oracle{2.0, 1.0};
    GridFunction g;
    g.grid = linspace(0.0, 12.0, 12001);
    g.values.resize(g.grid.size());
    for (std::size_t i = 0; i < g.grid.size(); ++i) g.values[i] = oracle.E_plus(g.grid[i]);
    g.tail = oracle.gamma();
    const TransformFn F = numeric_forward(g);
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0})
        CHECK(F(s) == Catch::Approx(oracle.LE_plus(s)).margin(1e-5));
}

TEST_CASE("numeric_forward rejects grids that have not reached the tail") {
    GridFunction g;
    g.grid = linspace(0.0, 1.0, 64);
    g.values.resize(g.grid.size());
    for (std::size_t i = 0; i < g.grid.size(); ++i) g.values[i] = std::exp(-g.grid[i]);
    g.tail = 0.0;  // e^{-1} is nowhere near 0
    CHECK_THROWS_AS(numeric_forward(g), tail_error);
}

TEST_CASE("invert recovers smooth grid functions pushed through numeric_forward") {
    GridFunction g;
    g.grid = linspace(0.0, 30.0, 30001);
    g.values.resize(g.grid.size());
    const auto run = [&](auto f) {
        for (std::size_t i = 0; i < g.grid.size(); ++i) g.values[i] = f(g.grid[i]);
        g.tail = 0.0;
        const TransformFn F = numeric_forward(g);
        double worst = 0.0;
        for (double t : {0.5, 1.0, 2.0, 3.0, 5.0})
            worst = std::max(worst, std::abs(invert(F, t, 18) - f(t)));
        return worst;
    };
    CHECK(run([](double t) { return std::exp(-t); }) < 1e-4);
    CHECK(run([](double t) { return t * std::exp(-t); }) < 1e-4);
    CHECK(run([](double t) { return std::exp(-t) * std::cos(t); }) < 1e-4);
}

TEST_CASE("Talbot inversion handles smooth and oscillatory originals") {
    CHECK(invert_talbot(one_pole, 1.0) == Catch::Approx(std::exp(-1.0)).margin(1e-10));
    CHECK(invert_talbot(two_pole, 2.0) == Catch::Approx(2.0 * std::exp(-2.0)).margin(1e-10));
    const TransformFn damped_cos = make_transform([](auto s) {
        using S = decltype(s);
        return (s + S(1)) / ((s + S(1)) * (s + S(1)) + S(1));
    });
    for (double t : {1.0, 3.0, 10.0})
        CHECK(invert_talbot(damped_cos, t) == Catch::Approx(std::exp(-t) * std::cos(t)).margin(1e-9));
    TransformFn double_only;
    double_only.eval = [](double s) { return 1.0 / (1.0 + s); };
    CHECK_THROWS_AS(invert_talbot(double_only, 1.0), precision_error);
}

TEST_CASE("complete monotonicity probe verdicts") {
    const auto grid = log_spaced(1e-2, 1e2, 17);

    SECTION("1/(1+s) is completely monotone") {
        const CmReport rep = complete_monotonicity_probe(one_pole, grid);
        CHECK(rep.verdict == CmVerdict::consistent);
        CHECK(rep.violations.empty());
    }
    SECTION("e^{-s} is completely monotone") {
        const TransformFn es = make_transform([](auto s) { using std::exp; return exp(-s); });
        CHECK(complete_monotonicity_probe(es, grid).verdict == CmVerdict::consistent);
    }
    SECTION("the oscillatory-original rational is not") {
        // -L(E'_+) of the gamma(2,2)/gamma(3,1) pair, scaled to 1 at s=0
        const TransformFn osc = make_transform([](auto s) {
            using S = decltype(s);
            const S num = S(6) + S(6) * s + S(2) * s * s;
            const S den = S(7) + S(19) * s + S(25) * s * s + S(16) * s * s * s + S(4) * s * s * s * s;
            return (S(7) / S(6)) * num / den;
        });
        const CmReport rep = complete_monotonicity_probe(osc, grid);
        CHECK(rep.verdict == CmVerdict::violated);
        CHECK(!rep.violations.empty());
    }
    SECTION("argument validation") {
        CHECK_THROWS_AS(complete_monotonicity_probe(one_pole, grid, 1), parameter_error);
    }
}
