#include "stcorr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stcorr/expectation.hpp"

namespace stcorr {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

DisplacementGeometry DisplacementGeometry::make(double r1, double theta, double v)
{
    if (!(r1 > 0.0) || !std::isfinite(r1)) throw std::invalid_argument("r1 must be positive");
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("v must be non-negative");
    if (!(theta >= 0.0 && theta <= kPi)) throw std::invalid_argument("theta must lie in [0, pi]");
    return {v, theta, r1};
}

double DisplacementGeometry::r12() const
{
    const double sq = r1 * r1 + v * v + 2.0 * r1 * v * std::cos(theta);
    return std::sqrt(std::max(0.0, sq));
}

double DisplacementGeometry::z1() const { return std::max(0.0, r1 - v); }

const char* to_string(OverlapCase c)
{
    switch (c) {
    case OverlapCase::Disjoint: return "disjoint";
    case OverlapCase::Intersecting: return "intersecting";
    case OverlapCase::Engulfed: return "engulfed";
    }
    return "?";
}

double lens_area(double ra, double rb, double d)
{
    if (ra <= 0.0 || rb <= 0.0) return 0.0;
    if (d >= ra + rb) return 0.0;
    if (d <= std::abs(ra - rb)) {
        const double rmin = std::min(ra, rb);
        return kPi * rmin * rmin;
    }
    const double ca = clamp_unit((d * d + ra * ra - rb * rb) / (2.0 * d * ra));
    const double cb = clamp_unit((d * d + rb * rb - ra * ra) / (2.0 * d * rb));
    const double k = (-d + ra + rb) * (d + ra - rb) * (d - ra + rb) * (d + ra + rb);
    return ra * ra * std::acos(ca) + rb * rb * std::acos(cb) - 0.5 * std::sqrt(std::max(0.0, k));
}

double crescent_area(double rA, double rB, double d)
{
    const double full = kPi * rA * rA;
    return std::clamp(full - lens_area(rA, rB, d), 0.0, full);
}

double handoff_region_area(const DisplacementGeometry& g)
{
    const double r12 = g.r12();
    const double st = std::sin(g.theta);
    // Angle of the triangle (l1, l2, x1) at x1.
    const double at_x1 = std::atan2(g.v * st, g.r1 + g.v * std::cos(g.theta));
    const double area =
        r12 * r12 * (kPi - g.theta + at_x1) - g.r1 * g.r1 * (kPi - g.theta) + g.r1 * g.v * st;
    return std::max(0.0, area);
}

OverlapCase classify_overlap(double r1, double r2, double v)
{
    if (r1 < 0.0 || r2 < 0.0 || v < 0.0) throw std::invalid_argument("negative radius or distance");
    if (v >= r1 + r2) return OverlapCase::Disjoint;
    if (v <= r2 - r1) return OverlapCase::Engulfed;
    return OverlapCase::Intersecting;
}

double inside_half_angle(double r, double v, double radius)
{
    if (v == 0.0 || r == 0.0) return (std::max(r, v) < radius) ? kPi : 0.0;
    return std::acos(clamp_unit((r * r + v * v - radius * radius) / (2.0 * r * v)));
}

double handoff_probability(const DisplacementGeometry& geom, double lambda)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const double area = crescent_area(geom.r12(), geom.r1, geom.v);
    return -std::expm1(-lambda * area);
}

Estimate handoff_probability_marginal(double v, double lambda, const QuadratureSpec& spec)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(v >= 0.0)) throw std::invalid_argument("v must be non-negative");
    if (v == 0.0) return {};
    auto over_theta = [&](double r1) -> Estimate {
        auto ph = [&](double th) { return handoff_probability({v, th, r1}, lambda); };
        return integrate_1d(ph, 0.0, kPi, spec) * (1.0 / kPi);
    };
    IntegrationOptions opts;
    opts.breakpoints = {v};
    return expect_serving_distance(over_theta, lambda, spec, opts);
}

double r2_handoff_density(double r2, double r1, double v, double lambda)
{
    if (r2 <= 0.0) return 0.0;
    const double beta = inside_half_angle(r2, v, r1);
    const double arc = 2.0 * (kPi - beta);
    return lambda * r2 * arc * std::exp(-lambda * crescent_area(r2, r1, v));
}

namespace {

double checked_handoff_probability(const DisplacementGeometry& geom, double lambda)
{
    const double ph = handoff_probability(geom, lambda);
    if (!(ph > 0.0))
        throw std::domain_error("R2 given handoff is undefined: handoff probability is zero");
    return ph;
}

}  // namespace

double r2_conditional_cdf(double r2, const DisplacementGeometry& geom, double lambda)
{
    const double ph = checked_handoff_probability(geom, lambda);
    if (r2 < geom.z1()) return 0.0;
    if (r2 >= geom.r12()) return 1.0;
    const double num = -std::expm1(-lambda * crescent_area(r2, geom.r1, geom.v));
    return std::clamp(num / ph, 0.0, 1.0);
}

double r2_conditional_pdf(double r2, const DisplacementGeometry& geom, double lambda)
{
    const double ph = checked_handoff_probability(geom, lambda);
    if (r2 < geom.z1() || r2 > geom.r12()) return 0.0;
    return r2_handoff_density(r2, geom.r1, geom.v, lambda) / ph;
}

double r2_sample_given_handoff(double u, const DisplacementGeometry& geom, double lambda)
{
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in (0, 1)");
    const double ph = checked_handoff_probability(geom, lambda);
    double lo = geom.z1();
    double hi = geom.r12();
    const double tol = 1e-10 * hi;
    // Work with the unnormalised CDF to avoid a division per step.
    const double target = u * ph;
    auto cdf = [&](double r) { return -std::expm1(-lambda * crescent_area(r, geom.r1, geom.v)); };
    if (!(cdf(lo) <= target && cdf(hi) >= target))
        throw std::logic_error("R2 inverse-CDF bracket failure");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double fx = cdf(x) - target;
        if (fx > 0.0) hi = x; else lo = x;
        const double dens = r2_handoff_density(x, geom.r1, geom.v, lambda);
        double next = (dens > 0.0) ? x - fx / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < 0.5 * tol) {
            x = next;
            break;
        }
        x = next;
    }
    return std::clamp(x, geom.z1(), geom.r12());
}

std::vector<AngleInterval> x2_admissible_arc(double r2, const DisplacementGeometry& geom)
{
    const double two_pi = 2.0 * kPi;
    const double v = geom.v;
    const double r1 = geom.r1;
    if (v == 0.0 || r2 == 0.0) {
        const bool outside = (v == 0.0) ? (r2 >= r1) : (v >= r1);
        if (outside) return {{0.0, two_pi}};
        return {};
    }
    const double c = (r1 * r1 - r2 * r2 - v * v) / (2.0 * r2 * v);
    if (c <= -1.0) return {{0.0, two_pi}};
    if (c > 1.0) return {};
    const double half = std::acos(c);
    return {{0.0, half}, {two_pi - half, two_pi}};
}

}  // namespace stcorr
