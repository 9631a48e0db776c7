#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stcorr/correlation.hpp"
#include "stcorr/coverage.hpp"
#include "stcorr/geometry.hpp"
#include "stcorr/mc_engine.hpp"

using namespace stcorr;
using std::numbers::pi;

namespace {

// sup |F_n - F| for sorted samples.
template <class Cdf>
double ks_sup(std::vector<double> xs, Cdf&& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double dev = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double c = cdf(xs[i]);
        dev = std::max({dev, std::abs(c - i / n), std::abs(c - (i + 1) / n)});
    }
    return dev;
}

McOptions small_window(double radius = 6.0)
{
    McOptions o;
    o.window_radius = radius;
    return o;
}

}  // namespace

TEST_CASE("PPP counts")
{
    const SimWindow w{10.0};
    McEngine rng(1);
    const int draws = 10'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double n = double(sample_ppp(1.0, w, rng).size());
        s += n;
        s2 += n * n;
    }
    const double mean = s / draws;
    const double var = s2 / draws - mean * mean;
    CHECK(std::abs(mean - 100 * pi) < 2.0);
    CHECK(var == doctest::Approx(mean).epsilon(0.05));
}

TEST_CASE("PPP points stay in the window and a larger window extends a smaller one")
{
    McEngine a(42), b(42);
    const auto small = sample_ppp(2.0, SimWindow{5.0}, a);
    const auto large = sample_ppp(2.0, SimWindow{9.0}, b);
    REQUIRE(large.size() >= small.size());
    for (const auto& p : small) CHECK(std::hypot(p.x, p.y) <= 5.0);
    // rings of width 1/sqrt(2) fully inside radius 5 are shared
    const double shared = std::floor(5.0 * std::sqrt(2.0)) / std::sqrt(2.0);
    std::size_t k = 0;
    while (k < small.size() && std::hypot(small[k].x, small[k].y) <= shared) {
        CHECK(small[k].x == large[k].x);
        CHECK(small[k].y == large[k].y);
        ++k;
    }
    CHECK(k > 100);
}

TEST_CASE("nearest distance follows the null probability")
{
    const SimWindow w{6.0};
    McEngine rng(3);
    std::vector<double> d;
    for (int i = 0; i < 100'000; ++i) {
        double best = INFINITY;
        for (const auto& p : sample_ppp(1.0, w, rng)) best = std::min(best, std::hypot(p.x, p.y));
        d.push_back(best);
    }
    CHECK(ks_sup(d, [](double r) { return 1 - std::exp(-pi * r * r); }) < 0.01);
}

TEST_CASE("trial records")
{
    const NetworkParams p{};
    const auto recs0 = simulate_trials(p, 0.0, 2000, 5, small_window());
    for (const auto& t : recs0) {
        CHECK_FALSE(t.handoff);
        CHECK(t.r1 == t.r2);
        CHECK(t.I2 == t.I2_skip);
    }
    const auto recs = simulate_trials(p, 0.8, 5000, 6, small_window());
    for (const auto& t : recs) {
        CHECK(t.r12 >= t.r2);
        CHECK(t.handoff == (t.r2 < t.r12));
        CHECK(t.I1 >= 0.0);
        CHECK(t.r12 <= t.r1 + 0.8 + 1e-12);
        CHECK(t.r12 >= std::abs(t.r1 - 0.8) - 1e-12);
    }
}

TEST_CASE("serving distance laws")
{
    const NetworkParams p{};
    const double v = 1.0;
    const auto recs = simulate_trials(p, v, 115'000, 7, small_window());

    std::vector<double> r1;
    for (const auto& t : recs) r1.push_back(t.r1);
    CHECK(ks_sup(r1, [](double r) { return 1 - std::exp(-pi * r * r); }) < 0.01);

    // Probability integral transform of R2 through its conditional CDF given (r1, theta).
    std::vector<double> u;
    for (const auto& t : recs) {
        if (!t.handoff) continue;
        const double c = (t.r12 * t.r12 - t.r1 * t.r1 - v * v) / (2 * t.r1 * v);
        const auto g = DisplacementGeometry::make(t.r1, std::acos(std::clamp(c, -1.0, 1.0)), v);
        u.push_back(r2_conditional_cdf(t.r2, g, p.lambda));
    }
    REQUIRE(u.size() >= 100'000);
    u.resize(100'000);
    CHECK(ks_sup(u, [](double x) { return x; }) < 0.02);
}

TEST_CASE("handoff frequency matches the marginal handoff probability")
{
    const NetworkParams p{};
    int inside = 0;
    for (double v : {0.1, 0.3, 0.5, 1.0, 1.5}) {
        const auto e = estimate_jcp_all(p, v, 1.0, 100'000, 11, small_window(v + 6.0));
        const double a = handoff_probability_marginal(v, 1.0, QuadratureSpec{}).value;
        CAPTURE(v);
        CAPTURE(a);
        CAPTURE(e.handoff_frequency.mean);
        inside += e.handoff_frequency.contains(a) ? 1 : 0;
    }
    CHECK(inside >= 4);
}

TEST_CASE("bit-identical results at any parallelism")
{
    const NetworkParams p{};
    McOptions serial;
    serial.serial = true;
    const auto ref = estimate_jcp_all(p, 0.7, 1.0, 3000, 99, serial);
    for (int workers : {1, 4, 16}) {
        McOptions o;
        o.workers = workers;
        const auto e = estimate_jcp_all(p, 0.7, 1.0, 3000, 99, o);
        CHECK(e.conventional.mean == ref.conventional.mean);
        CHECK(e.skip.mean == ref.skip.mean);
        CHECK(e.handoff_frequency.mean == ref.handoff_frequency.mean);
    }
    const NetworkParams b{1.0, 4.0, 1.0, {}};
    const auto c_ref = estimate_corr(b, 0.7, 10'000, 99, serial);
    for (int workers : {1, 4, 16}) {
        McOptions o;
        o.workers = workers;
        const auto c = estimate_corr(b, 0.7, 10'000, 99, o);
        CHECK(c.mean == c_ref.mean);
        CHECK(c.half_width_95 == c_ref.half_width_95);
    }
    CHECK(estimate_jcp_all(p, 0.7, 1.0, 3000, 100, serial).conventional.mean != ref.conventional.mean);
}

TEST_CASE("window doubling moves estimates by less than half a CI")
{
    const NetworkParams cov{};
    const double r = SimWindow::automatic(cov, 1.0).radius;
    McOptions twice;
    twice.window_radius = 2 * r;
    const auto a = estimate_jcp(cov, 1.0, 1.0, McStrategy::Conventional, 20'000, 5);
    const auto b = estimate_jcp(cov, 1.0, 1.0, McStrategy::Conventional, 20'000, 5, twice);
    CHECK(std::abs(a.mean - b.mean) < 0.5 * a.half_width_95);
    // nested realizations and the far-field mean leave almost nothing for the wider window to change
    CHECK(std::abs(a.mean - b.mean) < 0.05 * a.half_width_95);

    const NetworkParams bounded{1.0, 4.0, 1.0, {}};
    const auto ja = estimate_jcp(bounded, 1.0, 1.0, McStrategy::Conventional, 20'000, 6);
    McOptions twice_b;
    twice_b.window_radius = 2 * SimWindow::automatic(bounded, 1.0).radius;
    const auto jb = estimate_jcp(bounded, 1.0, 1.0, McStrategy::Conventional, 20'000, 6, twice_b);
    CHECK(std::abs(ja.mean - jb.mean) < 0.5 * ja.half_width_95);

    McOptions twice_c;
    twice_c.window_radius = 2 * SimWindow::for_correlation(bounded, 1.0).radius;
    const auto ca = estimate_corr(bounded, 1.0, 20'000, 7);
    const auto cb = estimate_corr(bounded, 1.0, 20'000, 7, twice_c);
    CHECK(std::abs(ca.mean - cb.mean) < 0.5 * ca.half_width_95);
}

TEST_CASE("coverage estimates at the ends of the mobility range")
{
    const NetworkParams p{};
    const auto tiny = estimate_jcp(p, 0.5, 1e-9, McStrategy::Conventional, 2000, 1, small_window(7.0));
    CHECK(tiny.mean == 1.0);
    CHECK(tiny.ci_lower < 1.0);

    // single-shot checks use a 3.3 sigma band; the 95% interval misses 1 in 20 by design
    const auto stat = estimate_jcp(p, 0.0, 1.0, McStrategy::Conventional, 100'000, 2);
    CHECK(std::abs(stat.mean - jcp_static(1.0, 4.0).value) < 1.7 * stat.half_width_95);

    const auto far = estimate_jcp(p, 20.0, 1.0, McStrategy::Conventional, 50'000, 3);
    CHECK(std::abs(far.mean - jcp_mobile_limit(1.0, 4.0).value) < 1.7 * far.half_width_95);
}

TEST_CASE("correlation estimates")
{
    const NetworkParams b{1.0, 4.0, 1.0, {}};
    const auto c0 = estimate_corr(b, 0.0, 200'000, 21);
    CHECK(c0.contains(temporal_corr_coefficient(b, QuadratureSpec{}).value));
    CHECK(c0.mean >= -1.0);
    CHECK(c0.mean <= 1.0);

    McOptions indep;
    indep.independent_realizations = true;
    const auto ci = estimate_corr(b, 0.0, 50'000, 22, indep);
    CHECK(ci.contains(0.0));

    CHECK_THROWS(estimate_corr(NetworkParams{}, 1.0, 20'000, 1));
    CHECK_THROWS(estimate_corr(b, 1.0, 5'000, 1));
    McOptions few;
    few.batches = 10;
    CHECK_THROWS(estimate_corr(b, 1.0, 20'000, 1, few));
}

TEST_CASE("windows")
{
    const NetworkParams p{};
    const auto w = SimWindow::automatic(p, 2.0);
    CHECK_NOTHROW(w.validate(1.0, 2.0));
    CHECK(w.radius > 2.0 + 3.0);
    CHECK_THROWS(SimWindow{4.0}.validate(1.0, 2.0));
    CHECK_THROWS(SimWindow{5.5}.validate(1.0, 0.0));
    CHECK_THROWS(SimWindow::for_correlation(p, 1.0));

    // with eps = 0 the truncated mean interference share is (r/R)^(alpha-2) at a serving distance r
    const double r = 0.5;
    CHECK(std::pow(r / (w.radius - 2.0), 2.0) <= w.tail_fraction);

    // sparser network, proportionally larger window
    const auto ws = SimWindow::automatic(NetworkParams{0.25, 4.0, 0.0, {}}, 4.0);
    CHECK(ws.radius == doctest::Approx(2 * w.radius).epsilon(1e-12));

    CHECK_THROWS(estimate_jcp(p, 1.0, 1.0, McStrategy::Conventional, 999, 1));
    CHECK_THROWS(estimate_jcp(p, -1.0, 1.0, McStrategy::Conventional, 1000, 1));
    CHECK_THROWS(estimate_jcp(p, 1.0, 0.0, McStrategy::Conventional, 1000, 1));
}

TEST_CASE("proportion intervals")
{
    const auto mid = proportion_estimate(5000, 10000, 1);
    CHECK(mid.mean == 0.5);
    CHECK(mid.half_width_95 == doctest::Approx(1.96 * std::sqrt(0.25 * 10000.0 / 9999.0 / 10000.0)));
    CHECK(mid.contains(0.5));

    const auto zero = proportion_estimate(0, 1000, 1);
    CHECK(zero.mean == 0.0);
    CHECK(zero.ci_lower == 0.0);
    CHECK(zero.ci_upper > 0.0);
    CHECK(zero.ci_upper < 0.01);

    const auto all = proportion_estimate(1000, 1000, 1);
    CHECK(all.ci_upper == doctest::Approx(1.0));
    CHECK(all.ci_lower < 1.0);
    CHECK(all.n_trials == 1000);
    CHECK(all.seed == 1);
}

TEST_CASE("single trial entry point")
{
    const NetworkParams p{};
    McEngine a = trial_engine(5, 17), b = trial_engine(5, 17);
    const SimWindow w = SimWindow::automatic(p, 1.0);
    const auto ta = run_trial(p, 1.0, a, w);
    const auto tb = run_trial(p, 1.0, b, w);
    CHECK(ta.I1 == tb.I1);
    CHECK(ta.sir2_conventional == tb.sir2_conventional);

    const auto recs = simulate_trials(p, 1.0, 18, 5);
    CHECK(recs[17].I1 == ta.I1);
    CHECK_THROWS(run_trial(p, 1.0, a, SimWindow{3.0}));
}
