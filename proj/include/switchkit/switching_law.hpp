#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "switchkit/errors.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/laplace.hpp"
#include "switchkit/rng.hpp"
#include "switchkit/transform.hpp"

namespace switchkit {

/// A switching-time distribution: positive, absolutely continuous, no atom at
/// zero, finite mean. Composite laws built from transforms evaluate their
/// density/CDF by numerical Laplace inversion, so treat those two closures as
/// diagnostics; the transform and the sampler are the exact objects.
struct SwitchingLaw {
    std::function<double(double)> density;
    std::function<double(double)> cdf;
    double mean = 0.0;
    TransformFn laplace;
    std::function<double(Rng&)> sampler;
};

inline SwitchingLaw make_exponential(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw parameter_error("exponential law needs mean > 0");
    SwitchingLaw law;
    law.mean = mean;
    law.density = [mean](double t) { return t < 0.0 ? 0.0 : std::exp(-t / mean) / mean; };
    law.cdf = [mean](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-t / mean); };
    law.laplace = make_transform([mean](auto s) {
        using S = decltype(s);
        return S(1) / (S(1) + S(mean) * s);
    });
    law.sampler = [mean](Rng& rng) { return std::exponential_distribution<double>(1.0 / mean)(rng); };
    return law;
}

inline SwitchingLaw make_gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw parameter_error("gamma law needs shape > 0 and scale > 0");
    SwitchingLaw law;
    law.mean = shape * scale;
    law.density = [shape, scale](double t) {
        if (t <= 0.0) return 0.0;
        const double x = t / scale;
        return std::exp((shape - 1.0) * std::log(x) - x - std::lgamma(shape)) / scale;
    };
    law.cdf = [shape, scale](double t) {
        return t <= 0.0 ? 0.0 : boost::math::gamma_p(shape, t / scale);
    };
    law.laplace = make_transform([shape, scale](auto s) {
        using S = decltype(s);
        using std::pow;
        return pow(S(1) + S(scale) * s, -S(shape));
    });
    law.sampler = [shape, scale](Rng& rng) {
        return std::gamma_distribution<double>(shape, scale)(rng);
    };
    return law;
}

/// Geometric variate with pmf (1-p)^{k-1} p, k >= 1, by CDF inversion.
inline std::int64_t sample_geometric(double p, Rng& rng) {
    const double u = uniform01(rng);
    const std::int64_t k = 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p)));
    return k < 1 ? 1 : k;
}

namespace detail {

// density/CDF of a transform-defined law, via Gaver-Stehfest
inline void attach_numeric_density(SwitchingLaw& law) {
    const TransformFn psi = law.laplace;
    const TransformFn lcdf = laplace_of_cdf(psi);
    law.density = [psi](double t) { return t <= 0.0 ? 0.0 : invert(psi, t); };
    law.cdf = [lcdf](double t) {
        if (t <= 0.0) return 0.0;
        const double v = invert(lcdf, t);
        return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    };
}

}  // namespace detail

/// W = sum of a geometric (success probability p) number of iid divisors.
struct GeometricDivisibleSpec {
    SwitchingLaw divisor;
    double success_prob = 0.0;   // 1/r

    double order() const { return 1.0 / success_prob; }
};

inline SwitchingLaw make_geometric_divisible(const GeometricDivisibleSpec& spec) {
    const double p = spec.success_prob;
    if (!(p > 0.0) || !(p < 1.0)) throw parameter_error("geometric divisibility needs p strictly inside (0,1)");
    SwitchingLaw law;
    law.mean = spec.divisor.mean / p;  // Wald
    const TransformFn psi_v = spec.divisor.laplace;
    law.laplace = make_transform_from(
        [psi_v, p](auto s) {
            using S = decltype(s);
            const auto v = psi_v.call(s);
            return S(p) * v / (S(1) - S(1 - p) * v);
        },
        {&psi_v});
    const auto draw = spec.divisor.sampler;
    law.sampler = [draw, p](Rng& rng) {
        const std::int64_t n = sample_geometric(p, rng);
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) acc += draw(rng);
        return acc;
    };
    detail::attach_numeric_density(law);
    return law;
}

/// Z = X + sum_{k=1}^{nu_alpha - 1} Y_k: time to the first switching attempt
/// plus the times between later attempts, stopping with probability alpha.
struct FirstAttemptSpec {
    SwitchingLaw first;    // X
    SwitchingLaw between;  // Y
    double stop_prob = 0.0;
};

inline SwitchingLaw make_first_attempt(const FirstAttemptSpec& spec) {
    const double alpha = spec.stop_prob;
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw parameter_error("first-attempt law needs stop probability strictly inside (0,1)");
    SwitchingLaw law;
    law.mean = spec.first.mean + (1.0 / alpha - 1.0) * spec.between.mean;
    const TransformFn psi_x = spec.first.laplace;
    const TransformFn psi_y = spec.between.laplace;
    law.laplace = make_transform_from(
        [psi_x, psi_y, alpha](auto s) {
            using S = decltype(s);
            return S(alpha) * psi_x.call(s) / (S(1) - S(1 - alpha) * psi_y.call(s));
        },
        {&psi_x, &psi_y});
    const auto draw_x = spec.first.sampler;
    const auto draw_y = spec.between.sampler;
    law.sampler = [draw_x, draw_y, alpha](Rng& rng) {
        double acc = draw_x(rng);
        const std::int64_t n = sample_geometric(alpha, rng);
        for (std::int64_t i = 1; i < n; ++i) acc += draw_y(rng);
        return acc;
    };
    detail::attach_numeric_density(law);
    return law;
}

/// Law of c*T for T ~ law.
inline SwitchingLaw scale_law(const SwitchingLaw& law, double c) {
    if (!(c > 0.0)) throw parameter_error("scale factor must be positive");
    SwitchingLaw out;
    out.mean = c * law.mean;
    const auto f = law.density;
    const auto F = law.cdf;
    out.density = [f, c](double t) { return f(t / c) / c; };
    out.cdf = [F, c](double t) { return F(t / c); };
    const TransformFn psi = law.laplace;
    out.laplace = make_transform_from([psi, c](auto s) { return psi.call(decltype(s)(c) * s); }, {&psi});
    const auto draw = law.sampler;
    out.sampler = [draw, c](Rng& rng) { return c * draw(rng); };
    return out;
}

/// The scaled common-divisor pair:
///   T+ = b V_1 + a sum_{k=2}^{nu_alpha} V_k,  T- = a V_1 + b sum_{k=2}^{nu_beta} V_k.
/// Means are (b + a(1/alpha - 1)) mu and (a + b(1/beta - 1)) mu.
inline std::pair<SwitchingLaw, SwitchingLaw> make_scaled_common_divisor(double a, double b,
                                                                        double alpha,
                                                                        const SwitchingLaw& divisor) {
    if (!(a > 0.0) || !(b > 0.0)) throw parameter_error("scaled common divisor needs a > 0 and b > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw parameter_error("scaled common divisor needs alpha strictly inside (0,1)");
    SwitchingLaw plus = make_first_attempt({scale_law(divisor, b), scale_law(divisor, a), alpha});
    SwitchingLaw minus = make_first_attempt({scale_law(divisor, a), scale_law(divisor, b), 1.0 - alpha});
    return {std::move(plus), std::move(minus)};
}

/// Smallest x with cdf(x) >= q, by bracket doubling and bisection.
inline double upper_quantile(const std::function<double(double)>& cdf, double q, double hint) {
    if (!(q > 0.0) || !(q < 1.0)) throw parameter_error("quantile level must lie in (0,1)");
    double hi = hint > 0.0 ? hint : 1.0;
    int expansions = 0;
    while (cdf(hi) < q) {
        hi *= 2.0;
        if (++expansions > 2000) throw density_error("CDF never reaches the requested quantile");
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < q ? lo : hi) = mid;
    }
    return hi;
}

/// Draws the origin-covering interval split (A, B): total length L from the
/// size-biased density x f(x)/mu, split uniformly. The induced joint density
/// is f(a+b)/mu. The size-biased draw rejects against the base density with
/// envelope x <= cap, cap at the (1 - 1e-9) quantile; proposals beyond the
/// cap are accepted outright.
class SizeBiasedSplitter {
  public:
    explicit SizeBiasedSplitter(SwitchingLaw law, double cap_quantile = 1.0 - 1e-9)
        : law_(std::move(law)), cap_(upper_quantile(law_.cdf, cap_quantile, 4.0 * law_.mean)) {}

    std::pair<double, double> operator()(Rng& rng) const {
        double total = 0.0;
        for (std::uint64_t tries = 0;; ++tries) {
            const double x = law_.sampler(rng);
            if (uniform01(rng) * cap_ <= x) {
                total = x;
                break;
            }
            if (tries > 100000000ULL) throw density_error("size-biased rejection sampler stalled");
        }
        const double u = uniform01(rng);
        return {u * total, (1.0 - u) * total};
    }

    double cap() const { return cap_; }

  private:
    SwitchingLaw law_;
    double cap_;
};

inline std::pair<double, double> size_biased_split_sampler(const SwitchingLaw& law, Rng& rng) {
    return SizeBiasedSplitter(law)(rng);
}

/// Turns a sampled density into a samplable law: linear interpolation for f,
/// cumulative trapezoid for F (normalized to unit mass), inverse-CDF sampling
/// on the monotone interpolant, and a numeric forward transform for Psi.
inline SwitchingLaw law_from_grid_density(const GridFunction& density) {
    density.validate();
    if (density.grid.front() < 0.0) throw density_error("density grid must start at t >= 0");
    for (double v : density.values)
        if (v < 0.0) throw density_error("grid density has negative values; clamp before building a law");

    auto cum = cumulative_trapezoid(density.grid, density.values);
    const double mass = cum.back();
    if (!(mass > 0.0) || !std::isfinite(mass)) throw density_error("grid density mass must be positive and finite");

    GridFunction norm = density;
    for (auto& v : norm.values) v /= mass;
    for (auto& c : cum) c /= mass;
    norm.tail = 0.0;

    SwitchingLaw law;
    std::vector<double> tmass(density.grid.size());
    for (std::size_t i = 0; i < tmass.size(); ++i) tmass[i] = density.grid[i] * norm.values[i];
    law.mean = trapezoid(density.grid, tmass);

    auto shared = std::make_shared<const GridFunction>(norm);
    auto shared_cum = std::make_shared<const std::vector<double>>(std::move(cum));
    law.density = [shared](double t) { return t < shared->grid.front() || t > shared->grid.back() ? 0.0 : (*shared)(t); };
    law.cdf = [shared, shared_cum](double t) {
        const auto& g = shared->grid;
        if (t <= g.front()) return 0.0;
        if (t >= g.back()) return 1.0;
        const auto it = std::upper_bound(g.begin(), g.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
        const double w = (t - g[i]) / (g[i + 1] - g[i]);
        return (*shared_cum)[i] + w * ((*shared_cum)[i + 1] - (*shared_cum)[i]);
    };
    // the density must have decayed by the grid end, up to its own noise scale
    law.laplace = numeric_forward(
        norm, std::max(1e-2, norm.noise.empty() ? 0.0 : 5.0 * norm.noise.back()));
    law.sampler = [shared, shared_cum](Rng& rng) {
        const double u = uniform01(rng);
        const auto& c = *shared_cum;
        const auto it = std::upper_bound(c.begin(), c.end(), u);
        std::size_t i = static_cast<std::size_t>(it - c.begin());
        if (i == 0) i = 1;
        if (i >= c.size()) i = c.size() - 1;
        const double span = c[i] - c[i - 1];
        const double w = span > 0.0 ? (u - c[i - 1]) / span : 0.5;
        return shared->grid[i - 1] + w * (shared->grid[i] - shared->grid[i - 1]);
    };
    return law;
}

}  // namespace switchkit
