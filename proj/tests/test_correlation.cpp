#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stcorr/correlation.hpp"
#include "stcorr/mc_engine.hpp"

using namespace stcorr;
using std::numbers::pi;

// tests/oracles/oracles.py: temporal_corr conditions on the serving distance R
// (interferers form a PPP outside B(0, R)); adhoc_corr is the ratio of the two
// plane integrals.
namespace oracle {
constexpr double kTemporal_l1_e1 = 0.57120073524737268;
constexpr double kTemporal_l01_e1 = 0.58596866323489641;
constexpr double kTemporal_l10_e1 = 0.51021996776262336;
constexpr double kTemporal_l1_e05 = 0.58303687502793716;
constexpr double kTemporal_l1_e2 = 0.55813191414630183;
constexpr double kTemporal_l1_e1_a3 = 0.56168061757604738;
constexpr double kAdhoc_v1_e1 = 0.33401320055037264;
constexpr double kAdhoc_v2_e05 = 0.067240165799845153;
}  // namespace oracle

namespace {

NetworkParams net(double lambda, double eps, double alpha = 4.0) { return {lambda, alpha, eps, {}}; }

QuadratureSpec spec(double rel = 1e-7)
{
    QuadratureSpec s;
    s.rel_tol = rel;
    s.abs_tol = 1e-12;
    return s;
}

}  // namespace

TEST_CASE("moments need bounded path loss")
{
    CHECK_THROWS_AS(corr_coefficient(net(1, 0), 1.0, spec()), std::domain_error);
    CHECK_THROWS_AS(temporal_corr_coefficient(net(1, 0), spec()), std::domain_error);
    CHECK_THROWS_AS(cellular_moments(net(1, 0), 0.5, spec()), std::domain_error);
    CHECK_THROWS_AS(total_field_moments(net(1, 0), 0.5, spec()), std::domain_error);
}

TEST_CASE("total field moments")
{
    const auto t0 = total_field_moments(net(1, 1), 0.0, spec());
    CHECK(t0.mean.value == doctest::Approx(pi * pi / 2).epsilon(1e-7));
    CHECK(t0.second.value >= t0.mean.value * t0.mean.value);
    // at v = 0 the cross moment differs from the second moment only by (E[h^2] - 1) lambda int g^2,
    // and lambda int g^2 = pi * pi / 4 for eps = 1, alpha = 4
    CHECK(t0.second.value - t0.cross.value == doctest::Approx(pi * pi / 4).epsilon(1e-6));

    const auto far = total_field_moments(net(1, 1), 60.0, spec());
    CHECK(far.cross.value == doctest::Approx(far.mean.value * far.mean.value).epsilon(1e-4));
}

TEST_CASE("cellular moments at v = 0")
{
    const auto m = cellular_moments(net(1, 1), 0.0, spec());
    CHECK(m.t1 == doctest::Approx(m.t2).epsilon(1e-6));
    CHECK(m.handoff_t1 == 0.0);
    CHECK(m.handoff_t2 == 0.0);
    CHECK(m.second >= m.mean_sq);
    CHECK(m.converged);
}

TEST_CASE("moment inequalities over a parameter grid")
{
    for (double lambda : {0.1, 1.0, 10.0})
        for (double eps : {0.5, 2.0})
            for (double v : {0.0, 0.7, 2.0}) {
                CAPTURE(lambda);
                CAPTURE(eps);
                CAPTURE(v);
                const auto m = cellular_moments(net(lambda, eps), v, spec(1e-6));
                CHECK(m.variance > 0.0);
                CHECK(m.second >= m.mean_sq);
                CHECK(m.cross <= m.second * (1 + 1e-9));
                CHECK(std::abs(m.covariance) <= m.variance * (1 + 1e-9));
                CHECK(m.total_second >= m.total_mean * m.total_mean);
                CHECK(m.t1 == doctest::Approx(m.t2).epsilon(1e-5));
            }
}

TEST_CASE("temporal coefficient against the conditional-PPP oracle")
{
    const auto s = spec(1e-9);
    CHECK(temporal_corr_coefficient(net(1, 1), s).value == doctest::Approx(oracle::kTemporal_l1_e1).epsilon(1e-7));
    CHECK(temporal_corr_coefficient(net(0.1, 1), s).value ==
          doctest::Approx(oracle::kTemporal_l01_e1).epsilon(1e-7));
    CHECK(temporal_corr_coefficient(net(10, 1), s).value == doctest::Approx(oracle::kTemporal_l10_e1).epsilon(1e-7));
    CHECK(temporal_corr_coefficient(net(1, 0.5), s).value ==
          doctest::Approx(oracle::kTemporal_l1_e05).epsilon(1e-7));
    CHECK(temporal_corr_coefficient(net(1, 2), s).value == doctest::Approx(oracle::kTemporal_l1_e2).epsilon(1e-7));
    CHECK(temporal_corr_coefficient(net(1, 1, 3), s).value ==
          doctest::Approx(oracle::kTemporal_l1_e1_a3).epsilon(1e-7));
}

TEST_CASE("temporal coefficient asymptotes")
{
    const auto s = spec(1e-8);
    CHECK(std::abs(temporal_corr_coefficient(net(1e-6, 1), s).value - 0.5) < 0.01);
    CHECK(std::abs(temporal_corr_coefficient(net(1e6, 1), s).value - 0.5) < 0.01);
    CHECK(std::abs(temporal_corr_coefficient(net(1, 1e-6), s).value - 0.5) < 0.02);
}

TEST_CASE("general coefficient")
{
    const auto s = spec();
    const double temporal = temporal_corr_coefficient(net(1, 1), s).value;
    const auto c0 = corr_coefficient(net(1, 1), 0.0, s);
    CHECK(c0.coefficient == doctest::Approx(temporal).epsilon(1e-6));
    CHECK(c0.converged);

    const auto far = corr_coefficient(net(1, 1), 10.0, s);
    CHECK(std::abs(far.coefficient) < 0.05);

    double prev = c0.coefficient;
    for (double v : {0.5, 1.0, 2.0, 4.0}) {
        const double c = corr_coefficient(net(1, 1), v, s).coefficient;
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("general coefficient against Monte Carlo")
{
    const auto a = corr_coefficient(net(1, 1), 1.0, spec());
    const auto mc = estimate_corr(net(1, 1), 1.0, 200'000, 404);
    CAPTURE(mc.ci_lower);
    CAPTURE(mc.ci_upper);
    CHECK(mc.contains(a.coefficient));
}

TEST_CASE("ad hoc coefficient")
{
    const auto s = spec(1e-9);
    CHECK(adhoc_corr_coefficient(net(1, 1), 0.0, s).value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(adhoc_corr_coefficient(net(1, 1), 1.0, s).value == doctest::Approx(oracle::kAdhoc_v1_e1).epsilon(1e-7));
    CHECK(adhoc_corr_coefficient(net(1, 0.5), 2.0, s).value ==
          doctest::Approx(oracle::kAdhoc_v2_e05).epsilon(1e-7));
    CHECK(adhoc_corr_coefficient(net(1, 1), 200.0, s).value < 1e-4);

    const double base = adhoc_corr_coefficient(net(1, 1), 1.3, s).value;
    for (double lambda : {0.1, 10.0})
        CHECK(adhoc_corr_coefficient(net(lambda, 1), 1.3, s).value == doctest::Approx(base).epsilon(1e-6));

    for (double eps : {0.5, 1.0, 2.0}) {
        double prev = 0.5 + 1e-12;
        for (double v = 0.25; v <= 3.0; v += 0.25) {
            const double c = adhoc_corr_coefficient(net(1, eps), v, s).value;
            CHECK(c < prev);
            prev = c;
        }
    }
}
