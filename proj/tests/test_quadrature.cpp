#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stcorr/expectation.hpp"
#include "stcorr/geometry.hpp"
#include "stcorr/quadrature.hpp"

using namespace stcorr;
using std::numbers::pi;

namespace {

QuadratureSpec tight(double rel = 1e-10)
{
    QuadratureSpec s;
    s.rel_tol = rel;
    s.abs_tol = 1e-14;
    return s;
}

}  // namespace

TEST_CASE("1-D reference integrals")
{
    const auto one = integrate_1d([](double) { return 1.0; }, 0.0, 1.0, tight());
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.converged);

    const auto e = integrate_1d([](double x) { return std::exp(-x); }, 0.0, INFINITY, tight());
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));

    const auto at = integrate_1d([](double u) { return 1.0 / (1.0 + u * u); }, 1.0, INFINITY, tight());
    CHECK(at.value == doctest::Approx(pi / 4).epsilon(1e-10));
    CHECK(at.error < 1e-9);

    CHECK(integrate_1d([](double x) { return x; }, 2.0, 0.0, tight()).value == doctest::Approx(-2.0));
    CHECK(integrate_1d([](double x) { return x; }, 1.0, 1.0, tight()).value == 0.0);
    CHECK_THROWS(integrate_1d([](double x) { return x; }, -INFINITY, 0.0, tight()));
}

TEST_CASE("tail cutoff matches the mapped semi-infinite rule")
{
    QuadratureSpec s = tight(1e-9);
    s.truncation = Truncation::TailCutoff;
    const auto f = [](double r) { return 2 * pi * r / (1.0 + r * r * r * r); };
    const auto cut = integrate_1d(f, 0.0, INFINITY, s);
    CHECK(cut.value == doctest::Approx(pi * pi / 2).epsilon(1e-7));
    CHECK(cut.converged);
}

TEST_CASE("breakpoints handle kinks and cosine map handles sqrt ends")
{
    const auto kink = [](double x) { return std::abs(x - 0.3); };
    IntegrationOptions o;
    o.breakpoints = {0.3};
    const auto k = integrate_1d(kink, 0.0, 1.0, tight(), o);
    CHECK(k.value == doctest::Approx(0.045 + 0.245).epsilon(1e-13));

    // \int_0^1 sqrt(x(1-x)) dx = pi/8
    IntegrationOptions c;
    c.cosine_map = true;
    const auto semi = integrate_1d([](double x) { return std::sqrt(x * (1 - x)); }, 0.0, 1.0, tight(), c);
    CHECK(semi.value == doctest::Approx(pi / 8).epsilon(1e-12));
    const auto plain = integrate_1d([](double x) { return std::sqrt(x * (1 - x)); }, 0.0, 1.0, tight());
    CHECK(semi.evals < plain.evals);
}

TEST_CASE("nested estimates propagate convergence")
{
    QuadratureSpec s = tight();
    s.max_evals = 200;
    const auto noisy = integrate_1d([](double x) { return std::sin(1.0 / (x + 1e-4)); }, 0.0, 1.0, s);
    CHECK_FALSE(noisy.converged);

    const auto outer = integrate_1d(
        [&](double) { return integrate_1d([](double x) { return std::sin(1.0 / (x + 1e-4)); }, 0.0, 1.0, s); },
        0.0, 1.0, tight(1e-6));
    CHECK_FALSE(outer.converged);
}

TEST_CASE("parallel panels give the serial result exactly")
{
    const auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
    IntegrationOptions par;
    par.parallel = true;
    const auto a = integrate_1d(f, 0.0, INFINITY, tight(), par);
    const auto b = integrate_1d(f, 0.0, INFINITY, tight());
    CHECK(a.value == b.value);
    CHECK(a.value == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("polar regions")
{
    const auto one = [](double, double) { return 1.0; };
    PolarRegion disk;
    disk.r_max = 2.0;
    CHECK(integrate_polar_region(one, disk, tight()).value == doctest::Approx(4 * pi).epsilon(1e-12));

    PolarRegion annulus;
    annulus.r_min = 1.0;
    annulus.r_max = 3.0;
    CHECK(integrate_polar_region(one, annulus, tight()).value == doctest::Approx(8 * pi).epsilon(1e-12));

    // B(0, 1.5) minus the off-centre disk B((0.8, 0), 1), through the membership predicate.
    PolarRegion cut;
    cut.r_max = 1.5;
    cut.contains = [](double r, double g) {
        const double x = r * std::cos(g) - 0.8, y = r * std::sin(g);
        return x * x + y * y >= 1.0;
    };
    const auto got = integrate_polar_region(one, cut, tight(1e-7));
    CHECK(got.value == doctest::Approx(crescent_area(1.5, 1.0, 0.8)).epsilon(1e-4));

    // same region with exact angle limits
    PolarRegion exact;
    exact.r_max = 1.5;
    exact.angles = [](double r) {
        const double h = inside_half_angle(r, 0.8, 1.0);
        return std::vector<AngleInterval>{{h, 2 * pi - h}};
    };
    exact.r_breakpoints = {0.2};
    const auto ex = integrate_polar_region(one, exact, tight());
    CHECK(ex.value == doctest::Approx(crescent_area(1.5, 1.0, 0.8)).epsilon(1e-10));
}

TEST_CASE("polar and cartesian integration agree for radial functions")
{
    const auto f = [](double x2) { return std::exp(-x2) / (1.0 + x2); };
    PolarRegion plane;
    plane.gamma_max = 2 * pi;
    const auto polar = integrate_polar_region([&](double r, double) { return f(r * r); }, plane, tight(1e-9));
    const auto cart = integrate_1d(
        [&](double x) {
            return integrate_1d([&](double y) { return f(x * x + y * y); }, -8.0, 8.0, tight(1e-11));
        },
        -8.0, 8.0, tight(1e-9));
    CHECK(polar.value == doctest::Approx(cart.value).epsilon(1e-8));
}

TEST_CASE("expectations against model densities")
{
    const auto s = tight(1e-9);
    const auto rs = DensitySpec::rayleigh_serving(1.0);
    CHECK(expect([](double) { return 1.0; }, rs, s).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(expect([](double r) { return r; }, rs, s).value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(expect([](double r) { return r; }, DensitySpec::rayleigh_serving(4.0), s).value ==
          doctest::Approx(0.25).epsilon(1e-9));

    const auto th = DensitySpec::uniform_angle();
    CHECK(std::abs(expect([](double t) { return std::cos(t); }, th, s).value) < 1e-12);
    CHECK(expect([](double) { return 1.0; }, th, s).value == doctest::Approx(1.0).epsilon(1e-12));

    const auto geom = DisplacementGeometry::make(0.5, pi / 2, 0.5);
    const auto r2 = DensitySpec::conditional_r2(geom, 1.0);
    CHECK(expect([](double) { return 1.0; }, r2, tight(1e-8)).value == doctest::Approx(1.0).epsilon(1e-7));

    // E[R1 cos(Theta)^2] over the product law = 0.5 * 0.5
    const auto prod = expect([](std::span<const double> x) { return x[0] * std::cos(x[1]) * std::cos(x[1]); },
                             {rs, th}, tight(1e-8));
    CHECK(prod.value == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("tightening the tolerance does not move away from the reference")
{
    const auto f = [](double u) { return 1.0 / (1.0 + std::pow(u, 2.5)); };
    const double ref = integrate_1d(f, 0.5, INFINITY, tight(1e-13)).value;
    double prev = INFINITY;
    for (double rel : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        QuadratureSpec s;
        s.rel_tol = rel;
        s.abs_tol = 1e-15;
        const auto e = integrate_1d(f, 0.5, INFINITY, s);
        const double err = std::abs(e.value - ref);
        CHECK(err <= prev * 1.0001 + 1e-15);
        CHECK(err <= std::max(e.error, 1e-15));
        prev = err;
    }
}

TEST_CASE("specification checks")
{
    QuadratureSpec s;
    s.rel_tol = 0.0;
    CHECK_THROWS(s.validate());
    s = {};
    s.max_evals = 10;
    CHECK_THROWS(s.validate());
}
