#include "stcorr/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stcorr/expectation.hpp"
#include "stcorr/geometry.hpp"

namespace stcorr {

namespace {

constexpr double kPi = std::numbers::pi;

// Single-location integrals are positive and may be tiny at extreme density,
// so only the relative tolerance is used for them.
constexpr double kNegligibleAbs = 1e-300;
// Inner geometry integrals are O(1) in scaled units; sliver regions are
// noisy relative to their size, so they get an absolute floor.
constexpr double kInnerAbsFactor = 1e-5;

// Lengths are measured in units of eps^(1/alpha), so g(d) = 1/(1 + d^alpha)
// and the density becomes lambda * eps^(2/alpha). First-order quantities scale
// back by 1/eps and second-order ones by 1/eps^2.
struct Scaled {
    double lam = 1.0;
    double alpha = 4.0;
    double v = 0.0;
    double m2 = 2.0;
    double eps = 1.0;
    QuadratureSpec q;
    QuadratureSpec qi;

    double g(double d) const { return 1.0 / (1.0 + pow_alpha_from_sq(d * d, alpha)); }
    double g_sq(double d2) const { return 1.0 / (1.0 + pow_alpha_from_sq(d2, alpha)); }
    double rayleigh_scale() const { return 1.0 / std::sqrt(lam * kPi); }
};

Scaled make_scaled(const NetworkParams& params, double v, const QuadratureSpec& spec)
{
    params.validate();
    params.require_bounded_path_loss();
    spec.validate();
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("v must be finite and non-negative");
    const double len = std::pow(params.epsilon, 1.0 / params.alpha);
    Scaled s;
    s.lam = params.lambda * len * len;
    s.alpha = params.alpha;
    s.v = v / len;
    s.m2 = params.fading.second_moment;
    s.eps = params.epsilon;
    s.q = spec.with_tolerances(spec.rel_tol, kNegligibleAbs);
    s.qi = spec.with_tolerances(spec.rel_tol, spec.rel_tol * kInnerAbsFactor);
    return s;
}

Estimate exact(double x) { return {x, 0.0, 0, true}; }

// \int_{R^2} g^power
Estimate plane_g(const Scaled& s, int power)
{
    PolarRegion reg;
    reg.r_breakpoints = {1.0};
    return integrate_polar_region(
        [&](double r, double) { return power == 1 ? s.g(r) : s.g(r) * s.g(r); }, reg, s.q);
}

// \int g(|x|) g(|x - l1|), gamma measured from the direction of l1.
Estimate cross_plane(const Scaled& s)
{
    PolarRegion reg;
    reg.gamma_max = kPi;
    reg.r_breakpoints = {1.0, s.v, s.v + 1.0};
    const double v = s.v;
    auto f = [&](double r, double gam) {
        return s.g(r) * s.g_sq(r * r + v * v - 2.0 * r * v * std::cos(gam));
    };
    return integrate_polar_region(f, reg, s.q) * 2.0;
}

// K(r) = \int_{B(0, r)} g
Estimate disk_g(const Scaled& s, double r, const QuadratureSpec& q)
{
    if (!(r > 0.0)) return {};
    IntegrationOptions o;
    o.breakpoints = {1.0};
    return integrate_1d([&](double x) { return 2.0 * kPi * x * s.g(x); }, 0.0, r, q, o);
}

// \int_{C1 \ B(l2, rc)} g(|x|) in polar coordinates about l2.
Estimate c1_outside_disk(const Scaled& s, double r1, double rc)
{
    const double lo = std::max(rc, s.v - r1);
    const double hi = s.v + r1;
    if (!(hi > lo) || s.v == 0.0) return {};
    auto f = [&](double r) { return s.g(r) * 2.0 * inside_half_angle(r, s.v, r1) * r; };
    IntegrationOptions o;
    o.breakpoints = {std::abs(r1 - s.v)};
    o.cosine_map = true;
    return integrate_1d(f, lo, hi, s.qi, o);
}

// \int_{B(l2, rc) \ C1} g(|x - l1|) in polar coordinates about l1.
Estimate disk_outside_c1(const Scaled& s, double r1, double rc)
{
    const double lo = std::max(r1, s.v - rc);
    const double hi = s.v + rc;
    if (!(hi > lo) || s.v == 0.0) return {};
    auto f = [&](double x) { return s.g(x) * 2.0 * inside_half_angle(x, s.v, rc) * x; };
    IntegrationOptions o;
    o.breakpoints = {std::abs(rc - s.v)};
    o.cosine_map = true;
    return integrate_1d(f, lo, hi, s.qi, o);
}

// Mean of g(|x2 - l1|) over the bearings at distance r2 from l2 that lie outside C1.
Estimate arc_mean_g_from_l1(const Scaled& s, double r1, double r2)
{
    const double beta = inside_half_angle(r2, s.v, r1);
    const double width = kPi - beta;
    if (!(width > 0.0)) return {};
    const double v = s.v;
    auto f = [&](double gam) { return s.g_sq(r2 * r2 + v * v - 2.0 * r2 * v * std::cos(gam)); };
    return integrate_1d(f, beta, kPi, s.qi) * (1.0 / width);
}

// \int_{z1}^{r12} P(H) f(r2 | H) h(r2) dr2
template <class F>
Estimate over_handoff_r2(const Scaled& s, double r1, double r12, F&& h)
{
    const double z1 = std::max(0.0, r1 - s.v);
    if (!(r12 > z1)) return {};
    auto w = [&](double r2) -> Estimate {
        const double d = r2_handoff_density(r2, r1, s.v, s.lam);
        if (d == 0.0) return {};
        return h(r2) * d;
    };
    IntegrationOptions o;
    o.breakpoints = {s.v - r1};
    o.cosine_map = true;
    return integrate_1d(w, z1, r12, s.qi, o);
}

// E_{R1, Theta}[J(r1, theta, r12, P(no handoff))]
template <class J>
Estimate over_geometry(const Scaled& s, J&& term)
{
    auto per_r1 = [&](double r1) -> Estimate {
        auto per_theta = [&](double th) -> Estimate {
            const DisplacementGeometry geom{s.v, th, r1};
            const double r12 = geom.r12();
            const double stay = std::exp(-s.lam * crescent_area(r12, r1, s.v));
            return term(r1, r12, stay);
        };
        return integrate_1d(per_theta, 0.0, kPi, s.qi) * (1.0 / kPi);
    };
    IntegrationOptions o;
    o.breakpoints = {s.v, 1.0};
    o.parallel = true;
    return expect_serving_distance(per_r1, s.lam, s.q, o);
}

// Single-location quantities in scaled units.
struct SiteTerms {
    Estimate m;         // \int g
    Estimate int_g2;    // \int g^2
    Estimate excess;    // lambda \int g^2 - E[g^2(R)]
    Estimate g1;        // E[g(R)]
    Estimate g2;        // E[g^2(R)]
    Estimate gk;        // E[g(R) K(R)]
};

SiteTerms site_terms(const Scaled& s)
{
    SiteTerms t;
    t.m = plane_g(s, 1);
    t.int_g2 = plane_g(s, 2);

    const double a = s.rayleigh_scale();
    IntegrationOptions o;
    o.breakpoints = {a, 3.0 * a, 1.0, 3.0};
    o.scale = std::min(a, 1.0);
    auto excess = [&](double x) {
        const double gx = s.g(x);
        return 2.0 * kPi * s.lam * x * gx * gx * -std::expm1(-s.lam * kPi * x * x);
    };
    t.excess = integrate_1d(excess, 0.0, std::numeric_limits<double>::infinity(), s.q, o);

    IntegrationOptions ro;
    ro.breakpoints = {1.0, 3.0};
    t.g1 = expect_serving_distance([&](double r) { return s.g(r); }, s.lam, s.q, ro);
    t.g2 = expect_serving_distance([&](double r) { return s.g(r) * s.g(r); }, s.lam, s.q, ro);
    t.gk = expect_serving_distance([&](double r) { return disk_g(s, r, s.q) * s.g(r); }, s.lam, s.q, ro);
    return t;
}

// Var I(2) = E[h^2] (lambda \int g^2 - E g^2) - (E g)^2 + 2 lambda E[g K], scaled units.
Estimate site_variance(const Scaled& s, const SiteTerms& t)
{
    return t.excess * s.m2 - product(t.g1, t.g1) + t.gk * (2.0 * s.lam);
}

Estimate ratio(const Estimate& num, const Estimate& den)
{
    Estimate r;
    r.value = num.value / den.value;
    r.error = (num.error + std::abs(r.value) * den.error) / std::abs(den.value);
    r.evals = num.evals + den.evals;
    r.converged = num.converged && den.converged;
    return r;
}

}  // namespace

TotalFieldMoments total_field_moments(const NetworkParams& params, double v, const QuadratureSpec& spec)
{
    const Scaled s = make_scaled(params, v, spec);
    const double k1 = 1.0 / s.eps;
    const double k2 = k1 * k1;
    const Estimate m = plane_g(s, 1);
    const Estimate g2 = plane_g(s, 2);
    const Estimate q = cross_plane(s);
    const Estimate mean_sq = product(m, m) * (s.lam * s.lam);

    TotalFieldMoments out;
    out.mean = m * (s.lam * k1);
    out.second = (g2 * (s.m2 * s.lam) + mean_sq) * k2;
    out.cross = (q * s.lam + mean_sq) * k2;
    return out;
}

MomentSet cellular_moments(const NetworkParams& params, double v, const QuadratureSpec& spec)
{
    const Scaled s = make_scaled(params, v, spec);
    const double lam = s.lam;
    const SiteTerms t = site_terms(s);
    const Estimate q = cross_plane(s);

    // E[g(x1 - l1) g(x2)]
    const Estimate x_a = over_geometry(s, [&](double r1, double r12, double stay) {
        Estimate h = over_handoff_r2(s, r1, r12, [&](double r2) { return exact(s.g(r2)); });
        return (h + exact(stay * s.g(r12))) * s.g(r1);
    });
    // E[g(x1 - l1) \int_{C1 u C2} g(|x|)]
    const Estimate x_u2 = over_geometry(s, [&](double r1, double r12, double stay) {
        Estimate h = over_handoff_r2(s, r1, r12, [&](double r2) {
            return disk_g(s, r2, s.qi) + c1_outside_disk(s, r1, r2);
        });
        Estimate nh = (disk_g(s, r12, s.qi) + c1_outside_disk(s, r1, r12)) * stay;
        return (h + nh) * s.g(r1);
    });
    // E[g(x2) \int_{C1 u C2} g(|x - l1|)]
    const Estimate x_u1 = over_geometry(s, [&](double r1, double r12, double stay) {
        const Estimate k1 = disk_g(s, r1, s.qi);
        Estimate h = over_handoff_r2(s, r1, r12, [&](double r2) {
            return (k1 + disk_outside_c1(s, r1, r2)) * s.g(r2);
        });
        Estimate nh = (k1 + disk_outside_c1(s, r1, r12)) * (stay * s.g(r12));
        return h + nh;
    });
    // E[g(x1 - l1) g(x1), H]
    const Estimate x_h1 = over_geometry(s, [&](double r1, double r12, double stay) {
        return exact((1.0 - stay) * s.g(r1) * s.g(r12));
    });
    // E[g(x2) g(x2 - l1), H]
    const Estimate x_h2 = over_geometry(s, [&](double r1, double r12, double) {
        return over_handoff_r2(s, r1, r12,
                               [&](double r2) { return arc_mean_g_from_l1(s, r1, r2) * s.g(r2); });
    });

    const Estimate lam_m_g1 = product(t.m, t.g1) * lam;
    const Estimate t1 = lam_m_g1 - x_u2 * lam + x_h1;
    const Estimate t2 = lam_m_g1 - x_u1 * lam + x_h2;
    const Estimate cov = q * lam - product(t.g1, t.g1) + x_u2 * lam + x_u1 * lam - x_a - x_h1 - x_h2;
    const Estimate var = site_variance(s, t);
    const Estimate mean = t.m * lam - t.g1;

    const double k1 = 1.0 / s.eps;
    const double k2 = k1 * k1;
    MomentSet ms;
    ms.mean = mean.value * k1;
    ms.mean_sq = ms.mean * ms.mean;
    ms.variance = var.value * k2;
    ms.covariance = cov.value * k2;
    ms.second = ms.mean_sq + ms.variance;
    ms.cross = ms.mean_sq + ms.covariance;
    const double lm = lam * t.m.value;
    ms.total_mean = lm * k1;
    ms.total_second = (s.m2 * lam * t.int_g2.value + lm * lm) * k2;
    ms.total_cross = (lam * q.value + lm * lm) * k2;
    ms.t1 = t1.value * k2;
    ms.t2 = t2.value * k2;
    ms.handoff_t1 = x_h1.value * k2;
    ms.handoff_t2 = x_h2.value * k2;
    ms.err_est = (cov.error + var.error) * k2;
    ms.converged = cov.converged && var.converged && t1.converged && t2.converged;
    return ms;
}

CorrelationResult corr_coefficient(const NetworkParams& params, double v, const QuadratureSpec& spec)
{
    CorrelationResult res;
    res.moments = cellular_moments(params, v, spec);
    res.v = v;
    res.params = params;
    const MomentSet& m = res.moments;
    res.coefficient = m.covariance / m.variance;
    res.err_est = (m.err_est * (1.0 + std::abs(res.coefficient))) / m.variance;
    res.converged = m.converged;
    return res;
}

Estimate temporal_corr_coefficient(const NetworkParams& params, const QuadratureSpec& spec)
{
    const Scaled s = make_scaled(params, 0.0, spec);
    const SiteTerms t = site_terms(s);
    const Estimate shared = t.gk * (2.0 * s.lam) - product(t.g1, t.g1);
    return ratio(t.excess + shared, t.excess * s.m2 + shared);
}

Estimate adhoc_corr_coefficient(const NetworkParams& params, double v, const QuadratureSpec& spec)
{
    const Scaled s = make_scaled(params, v, spec);
    return ratio(cross_plane(s), plane_g(s, 2) * s.m2);
}

}  // namespace stcorr
