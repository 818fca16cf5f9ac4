#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "switchkit/switching_law.hpp"
#include "support/stats.hpp"

using namespace switchkit;

namespace {

// generic distributional checks every constructed law must satisfy
void check_law_invariants(const SwitchingLaw& law, std::uint64_t seed) {
    CHECK(law.mean > 0.0);
    CHECK(law.laplace(1e-8) == Catch::Approx(1.0).margin(1e-6));
    // strictly decreasing transform
    double prev = law.laplace(1e-3);
    for (double s : log_spaced(1e-2, 1e2, 13)) {
        const double cur = law.laplace(s);
        CHECK(cur < prev);
        prev = cur;
    }
    // -Psi'(0+) = mean, central difference at small s
    const double s0 = 1e-4, h = 5e-5;
    const double deriv = (law.laplace(s0 + h) - law.laplace(s0 - h)) / (2.0 * h);
    CHECK(-deriv == Catch::Approx(law.mean).epsilon(0.02));
    // CDF boundary behaviour and monotonicity
    CHECK(law.cdf(0.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(law.cdf(50.0 * law.mean) == Catch::Approx(1.0).margin(1e-3));
    double fprev = 0.0;
    for (double t : linspace(0.1, 10.0 * law.mean, 25)) {
        const double cur = law.cdf(t);
        CHECK(cur >= fprev - 1e-9);
        fprev = cur;
    }
    // sample mean within 4 standard errors
    Rng rng(seed);
    const long long n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (long long i = 0; i < n; ++i) {
        const double x = law.sampler(rng);
        REQUIRE(x >= 0.0);
        acc += x;
        acc2 += x * x;
    }
    const double m = acc / n;
    const double sd = std::sqrt((acc2 / n - m * m) * n / (n - 1.0));
    CHECK(std::abs(m - law.mean) <= 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

// empirical transform of 10^6 samples vs the analytic transform, 4 SE
void check_transform_against_samples(const SwitchingLaw& law, std::uint64_t seed) {
    Rng rng(seed);
    const long long n = 1000000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = law.sampler(rng);
    for (double s : {0.1, 0.5, 2.0}) {
        double acc = 0.0, acc2 = 0.0;
        for (double d : draws) {
            const double e = std::exp(-s * d);
            acc += e;
            acc2 += e * e;
        }
        const double m = acc / n;
        const double se = std::sqrt((acc2 / n - m * m) / (n - 1.0));
        CHECK(std::abs(m - law.laplace(s)) <= 4.0 * se + 1e-9);
    }
}

}  // namespace

TEST_CASE("exponential law basics") {
    const SwitchingLaw law = make_exponential(1.0);
    CHECK(law.laplace(1.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(make_exponential(2.0).mean == Catch::Approx(2.0));
    CHECK(law.cdf(1.0) == Catch::Approx(1.0 - std::exp(-1.0)).margin(1e-12));
    CHECK_THROWS_AS(make_exponential(0.0), parameter_error);
    CHECK_THROWS_AS(make_exponential(-1.0), parameter_error);
    check_law_invariants(law, 11);
}

TEST_CASE("gamma law matches its transform and mean") {
    const SwitchingLaw g22 = make_gamma(2.0, 2.0);
    CHECK(g22.mean == Catch::Approx(4.0));
    for (double s : {0.25, 1.0, 3.0})
        CHECK(g22.laplace(s) == Catch::Approx(std::pow(1.0 + 2.0 * s, -2.0)).margin(1e-14));
    const SwitchingLaw g31 = make_gamma(3.0, 1.0);
    CHECK(g31.mean == Catch::Approx(3.0));
    for (double s : {0.25, 1.0, 3.0})
        CHECK(g31.laplace(s) == Catch::Approx(std::pow(1.0 + s, -3.0)).margin(1e-14));
    CHECK_THROWS_AS(make_gamma(0.0, 1.0), parameter_error);
    CHECK_THROWS_AS(make_gamma(1.0, -2.0), parameter_error);
    check_law_invariants(g22, 13);
}

TEST_CASE("gamma with shape 1 is exponential") {
    const SwitchingLaw g = make_gamma(1.0, 1.0);
    const SwitchingLaw e = make_exponential(1.0);
    for (double s : log_spaced(1e-3, 1e3, 25))
        CHECK(g.laplace(s) == Catch::Approx(e.laplace(s)).margin(1e-12));
}

TEST_CASE("geometric divisible compound") {
    SECTION("closure: Exp(mu/r) divisor at p=1/r gives back Exp(mu)") {
        for (double mu : {1.0, 2.5}) {
            for (double r : {2.0, 3.0, 5.0}) {
                const SwitchingLaw w = make_geometric_divisible({make_exponential(mu / r), 1.0 / r});
                const SwitchingLaw target = make_exponential(mu);
                for (double s : log_spaced(1e-2, 1e2, 17))
                    CHECK(w.laplace(s) == Catch::Approx(target.laplace(s)).margin(1e-10));
            }
        }
    }
    SECTION("boundary p rejected") {
        CHECK_THROWS_AS(make_geometric_divisible({make_exponential(1.0), 1.0}), parameter_error);
        CHECK_THROWS_AS(make_geometric_divisible({make_exponential(1.0), 0.0}), parameter_error);
    }
    SECTION("Wald mean") {
        const SwitchingLaw w = make_geometric_divisible({make_exponential(1.0), 1.0 / 3.0});
        CHECK(w.mean == Catch::Approx(3.0));
        check_law_invariants(w, 17);
    }
    SECTION("density/cdf by inversion reproduce the exponential target") {
        const SwitchingLaw w = make_geometric_divisible({make_exponential(0.5), 0.5});
        for (double t : {0.5, 1.0, 2.0}) {
            CHECK(w.density(t) == Catch::Approx(std::exp(-t)).margin(5e-5));
            CHECK(w.cdf(t) == Catch::Approx(1.0 - std::exp(-t)).margin(5e-5));
        }
        CHECK(w.density(0.0) == 0.0);
        CHECK(w.cdf(0.0) == 0.0);
    }
}

TEST_CASE("first-attempt compound") {
    const SwitchingLaw z = make_first_attempt({make_exponential(1.0), make_exponential(1.0), 0.5});
    SECTION("transform algebra: Exp/Exp at alpha=1/2 is Exp(2)") {
        for (double s : log_spaced(1e-2, 1e2, 17))
            CHECK(z.laplace(s) == Catch::Approx(1.0 / (1.0 + 2.0 * s)).margin(1e-12));
    }
    SECTION("normalization at 0+") { CHECK(z.laplace(1e-8) == Catch::Approx(1.0).margin(1e-6)); }
    SECTION("sample mean mu_X + (1/alpha - 1) mu_Y") {
        CHECK(z.mean == Catch::Approx(2.0));
        check_law_invariants(z, 19);
    }
    SECTION("boundary alpha rejected") {
        CHECK_THROWS_AS(make_first_attempt({make_exponential(1.0), make_exponential(1.0), 1.0}),
                        parameter_error);
    }
}

TEST_CASE("scaled common divisor pair") {
    SECTION("a=b=1 degenerates to the plain first-attempt construction") {
        const auto [plus, minus] = make_scaled_common_divisor(1.0, 1.0, 0.5, make_exponential(1.0));
        const SwitchingLaw direct =
            make_first_attempt({make_exponential(1.0), make_exponential(1.0), 0.5});
        for (double s : log_spaced(1e-2, 1e2, 9)) {
            CHECK(plus.laplace(s) == Catch::Approx(direct.laplace(s)).margin(1e-12));
            CHECK(minus.laplace(s) == Catch::Approx(direct.laplace(s)).margin(1e-12));
        }
    }
    SECTION("means follow (b + a(1/alpha - 1)) mu and (a + b(1/beta - 1)) mu") {
        const auto [p1, m1] = make_scaled_common_divisor(1.0, 2.0, 0.5, make_exponential(1.0));
        CHECK(p1.mean == Catch::Approx(3.0));
        CHECK(m1.mean == Catch::Approx(3.0));
        const auto [p2, m2] = make_scaled_common_divisor(2.0, 1.0, 1.0 / 3.0, make_exponential(1.0));
        CHECK(p2.mean == Catch::Approx(5.0));
        CHECK(m2.mean == Catch::Approx(2.0 + 1.0 * (1.0 / (2.0 / 3.0) - 1.0)).margin(1e-12));
    }
    SECTION("parameter validation") {
        CHECK_THROWS_AS(make_scaled_common_divisor(0.0, 1.0, 0.5, make_exponential(1.0)),
                        parameter_error);
        CHECK_THROWS_AS(make_scaled_common_divisor(1.0, 1.0, 1.0, make_exponential(1.0)),
                        parameter_error);
    }
}

TEST_CASE("size-biased split sampler") {
    SECTION("exponential: the forward delay is exponential again") {
        const SizeBiasedSplitter split(make_exponential(1.3));
        Rng rng(23);
        std::vector<double> a_draws(100000);
        for (auto& a : a_draws) a = split(rng).first;
        const double ks = teststat::ks_one_sample(
            a_draws, [](double x) { return 1.0 - std::exp(-x / 1.3); });
        CHECK(ks < teststat::kKsCritical01);
    }
    SECTION("total length has mean E[L^2]/mu; exchangeable halves") {
        const SizeBiasedSplitter split(make_exponential(1.0));
        Rng rng(29);
        const long long n = 100000;
        double sa = 0, sb = 0, st2 = 0, st = 0;
        for (long long i = 0; i < n; ++i) {
            const auto [a, b] = split(rng);
            sa += a;
            sb += b;
            st += a + b;
            st2 += (a + b) * (a + b);
        }
        const double mt = st / n;
        const double se_t = std::sqrt((st2 / n - mt * mt) / (n - 1.0));
        CHECK(std::abs(mt - 2.0) <= 4.0 * se_t);  // E L = E T^2 / mu = 2 for Exp(1)
        // A and B exchangeable: their means agree within combined error
        CHECK(std::abs(sa / n - sb / n) <= 4.0 * 2.0 * se_t);
    }
    SECTION("gamma law: A-marginal follows survival/mean") {
        const SwitchingLaw g = make_gamma(2.0, 1.5);
        const SizeBiasedSplitter split(g);
        Rng rng(31);
        std::vector<double> a_draws(50000);
        for (auto& a : a_draws) a = split(rng).first;
        // CDF of A: int_0^x (1-F(u)) du / mu, by fine trapezoid
        const auto cdf_a = [&](double x) {
            const int n = 2000;
            double acc = 0.0, prev = 1.0;
            for (int i = 1; i <= n; ++i) {
                const double u = x * i / n;
                const double cur = 1.0 - g.cdf(u);
                acc += 0.5 * (x / n) * (prev + cur);
                prev = cur;
            }
            return acc / g.mean;
        };
        CHECK(teststat::ks_one_sample(a_draws, cdf_a) < teststat::kKsCritical01);
    }
}

TEST_CASE("analytic transforms match large-sample empirical transforms") {
    check_transform_against_samples(make_gamma(2.0, 2.0), 101);
    check_transform_against_samples(make_geometric_divisible({make_exponential(0.5), 0.25}), 103);
    check_transform_against_samples(
        make_first_attempt({make_gamma(2.0, 0.5), make_exponential(1.0), 0.4}), 107);
}

TEST_CASE("scale_law rescales every component") {
    const SwitchingLaw base = make_gamma(2.0, 1.0);
    const SwitchingLaw scaled = scale_law(base, 3.0);
    CHECK(scaled.mean == Catch::Approx(6.0));
    CHECK(scaled.laplace(0.5) == Catch::Approx(base.laplace(1.5)).margin(1e-14));
    CHECK(scaled.cdf(3.0) == Catch::Approx(base.cdf(1.0)).margin(1e-14));
    CHECK(scaled.density(3.0) == Catch::Approx(base.density(1.0) / 3.0).margin(1e-14));
}

TEST_CASE("geometric sampling matches the pmf") {
    Rng rng(37);
    const double p = 0.3;
    const long long n = 200000;
    std::vector<long long> counts(8, 0);
    for (long long i = 0; i < n; ++i) {
        const auto k = sample_geometric(p, rng);
        REQUIRE(k >= 1);
        if (k <= 7) ++counts[static_cast<std::size_t>(k)];
    }
    for (int k = 1; k <= 7; ++k) {
        const double expect = std::pow(1.0 - p, k - 1) * p;
        const double se = std::sqrt(expect * (1.0 - expect) / n);
        CHECK(std::abs(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n - expect) <=
              4.0 * se);
    }
}

TEST_CASE("law_from_grid_density round-trips an exponential density") {
    GridFunction f;
    f.grid = linspace(0.0, 25.0, 16001);
    f.values.resize(f.grid.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i) f.values[i] = std::exp(-f.grid[i]);
    f.tail = 0.0;
    const SwitchingLaw law = law_from_grid_density(f);
    CHECK(law.mean == Catch::Approx(1.0).epsilon(1e-4));
    for (double s : {0.2, 1.0, 5.0})
        CHECK(law.laplace(s) == Catch::Approx(1.0 / (1.0 + s)).epsilon(1e-4));
    Rng rng(41);
    std::vector<double> draws(50000);
    for (auto& d : draws) d = law.sampler(rng);
    CHECK(teststat::ks_one_sample(draws, [](double x) { return 1.0 - std::exp(-x); }) <
          teststat::kKsCritical01);
    GridFunction bad = f;
    bad.values[5] = -0.1;
    CHECK_THROWS_AS(law_from_grid_density(bad), density_error);
}
