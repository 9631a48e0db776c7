#include "stcorr/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stcorr/expectation.hpp"
#include "stcorr/geometry.hpp"

namespace stcorr {

namespace {

constexpr double kPi = std::numbers::pi;

Estimate exp_neg(const Estimate& x)
{
    const double e = std::exp(-x.value);
    return {e, e * x.error, x.evals, x.converged};
}

struct Ctx {
    double lambda = 1.0;
    double alpha = 4.0;
    double eps = 0.0;
    double T = 1.0;
    double v = 0.0;
    double b1_sign = 1.0;
    NetworkParams params;
    QuadratureSpec outer;
    QuadratureSpec inner;

    double scale() const { return 1.0 / std::sqrt(lambda); }
};

Ctx make_ctx(const CoverageQuery& q)
{
    q.validate();
    Ctx c;
    c.lambda = q.params.lambda;
    c.alpha = q.params.alpha;
    c.eps = q.params.epsilon;
    c.T = q.threshold.linear();
    c.v = q.v;
    c.b1_sign = q.b1_sign;
    c.params = q.params;
    c.outer = q.spec;
    // Exponent integrals are areas of order 1/lambda.
    c.inner = q.spec.with_tolerances(q.spec.rel_tol, q.spec.abs_tol / c.lambda);
    return c;
}

// \int_{R^2 \ B(l2, rc)} F dA, using the cosine symmetry in gamma.
Estimate outside_disk_integral(const Ctx& c, double r1, double rc, const LinkLoads& loads)
{
    const double v = c.v;
    PolarRegion reg;
    reg.r_min = rc;
    reg.gamma_max = kPi;
    reg.r_breakpoints = {v, v + r1, 2.0 * (v + r1)};
    reg.r_scale = std::max({rc, v + r1, c.scale()});
    auto f = [&](double r, double gam) {
        const double d1_sq = r * r + v * v - 2.0 * r * v * std::cos(gam);
        return coverage_penalty(loads, d1_sq, r * r, c.alpha, c.eps);
    };
    return integrate_polar_region(f, reg, c.inner) * 2.0;
}

// lambda * \int_{R^2 \ (C1 u B(l2, rc))} F dA
Estimate exclusion_exponent(const Ctx& c, double r1, double rc, const LinkLoads& loads)
{
    const Estimate full = outside_disk_integral(c, r1, rc, loads);
    const Estimate lens = b1_arc_integral(r1, rc, c.v, loads, c.params, c.inner);
    return (full - lens * c.b1_sign) * c.lambda;
}

template <class J>
Estimate over_r1(const Ctx& c, J&& per_r1)
{
    IntegrationOptions o;
    o.breakpoints = {c.v};
    o.parallel = true;
    return expect_serving_distance(per_r1, c.lambda, c.outer, o);
}

template <class J>
Estimate theta_mean(const Ctx& c, J&& per_theta)
{
    return integrate_1d(per_theta, 0.0, kPi, c.outer) * (1.0 / kPi);
}

}  // namespace

const char* to_string(CoverageStrategy s)
{
    switch (s) {
    case CoverageStrategy::Skip: return "skip";
    case CoverageStrategy::Conventional: return "conventional";
    case CoverageStrategy::StaticClosedForm: return "static";
    case CoverageStrategy::MobileLimit: return "mobile-limit";
    }
    return "?";
}

void CoverageQuery::validate() const
{
    params.validate();
    spec.validate();
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("v must be finite and non-negative");
    if (strategy == CoverageStrategy::StaticClosedForm && v != 0.0)
        throw std::invalid_argument("static closed form requires v = 0");
    if (!std::isfinite(b1_sign)) throw std::invalid_argument("b1_sign must be finite");
}

LinkLoads LinkLoads::from(double T, const NetworkParams& params, double serving1, double serving2)
{
    return {T * (params.epsilon + std::pow(serving1, params.alpha)),
            T * (params.epsilon + std::pow(serving2, params.alpha))};
}

double coverage_penalty(const LinkLoads& loads, double d1_sq, double r_sq, double alpha, double eps)
{
    const double a = eps + pow_alpha_from_sq(d1_sq, alpha);
    const double b = eps + pow_alpha_from_sq(r_sq, alpha);
    const double s1 = loads.s1;
    const double s2 = loads.s2;
    const double den = (a + s1) * (b + s2);
    if (den == 0.0) return 1.0;
    return (s1 * b + s2 * a + s1 * s2) / den;
}

double integrand_f1(double r1, double r, double gamma, double theta, double v, double T, double alpha,
                    double eps)
{
    const double r12 = DisplacementGeometry{v, theta, r1}.r12();
    return integrand_f2(r1, r12, r, gamma, v, T, alpha, eps);
}

double integrand_f2(double r1, double r2, double r, double gamma, double v, double T, double alpha,
                    double eps)
{
    NetworkParams p;
    p.alpha = alpha;
    p.epsilon = eps;
    const LinkLoads loads = LinkLoads::from(T, p, r1, r2);
    const double d1_sq = std::max(0.0, r * r + v * v - 2.0 * r * v * std::cos(gamma));
    return coverage_penalty(loads, d1_sq, r * r, alpha, eps);
}

Estimate b1_arc_integral(double r1, double r2, double v, const LinkLoads& loads,
                         const NetworkParams& params, const QuadratureSpec& spec)
{
    double lo = 0.0;
    switch (classify_overlap(r1, r2, v)) {
    case OverlapCase::Engulfed: return {};
    case OverlapCase::Disjoint: lo = v - r1; break;
    case OverlapCase::Intersecting: lo = r2; break;
    }
    const double hi = v + r1;
    if (!(hi > lo)) return {};
    auto radial = [&](double r) -> Estimate {
        const double beta = inside_half_angle(r, v, r1);
        if (!(beta > 0.0)) return {};
        auto ang = [&](double gam) {
            const double d1_sq = r * r + v * v - 2.0 * r * v * std::cos(gam);
            return coverage_penalty(loads, d1_sq, r * r, params.alpha, params.epsilon);
        };
        return integrate_1d(ang, 0.0, beta, spec) * (2.0 * r);
    };
    IntegrationOptions o;
    o.breakpoints = {std::abs(v - r1)};
    o.cosine_map = true;
    return integrate_1d(radial, lo, hi, spec, o);
}

Estimate jcp_skip(const CoverageQuery& q)
{
    const Ctx c = make_ctx(q);
    auto per_r1 = [&](double r1) -> Estimate {
        const double z1 = std::max(0.0, r1 - c.v);
        return theta_mean(c, [&](double th) -> Estimate {
            const double r12 = DisplacementGeometry{c.v, th, r1}.r12();
            const LinkLoads loads = LinkLoads::from(c.T, c.params, r1, r12);
            return exp_neg(exclusion_exponent(c, r1, z1, loads));
        });
    };
    return over_r1(c, per_r1);
}

Estimate jcp_no_handoff(const CoverageQuery& q)
{
    const Ctx c = make_ctx(q);
    auto per_r1 = [&](double r1) -> Estimate {
        return theta_mean(c, [&](double th) -> Estimate {
            const DisplacementGeometry geom{c.v, th, r1};
            const double r12 = geom.r12();
            const double stay = std::exp(-c.lambda * crescent_area(r12, r1, c.v));
            if (stay == 0.0) return {};
            const LinkLoads loads = LinkLoads::from(c.T, c.params, r1, r12);
            return exp_neg(exclusion_exponent(c, r1, r12, loads)) * stay;
        });
    };
    return over_r1(c, per_r1);
}

Estimate jcp_handoff(const CoverageQuery& q)
{
    const Ctx c = make_ctx(q);
    const double v = c.v;
    if (v == 0.0) return {};
    // Given r1 and r2, theta only enters through the support r12(theta) >= r2
    // and the factor for x1 interfering at l2, so theta is integrated innermost.
    auto per_r1 = [&](double r1) -> Estimate {
        const double z1 = std::max(0.0, r1 - v);
        auto per_r2 = [&](double r2) -> Estimate {
            const double dens = r2_handoff_density(r2, r1, v, c.lambda);
            if (dens == 0.0) return {};
            const LinkLoads loads = LinkLoads::from(c.T, c.params, r1, r2);

            // x1 as interferer at l2, over the theta range with r12(theta) >= r2.
            const double cth = std::clamp((r2 * r2 - r1 * r1 - v * v) / (2.0 * r1 * v), -1.0, 1.0);
            const double th_max = std::acos(cth);
            auto x1_term = [&](double th) {
                const double r12 = DisplacementGeometry{v, th, r1}.r12();
                return laplace_factor_sq(loads.s2, r12 * r12, c.alpha, c.eps);
            };
            const Estimate via_x1 = integrate_1d(x1_term, 0.0, th_max, c.inner) * (1.0 / kPi);

            // x2 as interferer at l1, bearing uniform over the arc outside C1.
            const double beta = inside_half_angle(r2, v, r1);
            const double width = kPi - beta;
            if (!(width > 0.0)) return {};
            auto x2_term = [&](double gam) {
                const double d1_sq = r2 * r2 + v * v - 2.0 * r2 * v * std::cos(gam);
                return laplace_factor_sq(loads.s1, d1_sq, c.alpha, c.eps);
            };
            const Estimate via_x2 = integrate_1d(x2_term, beta, kPi, c.inner) * (1.0 / width);

            const Estimate field = exp_neg(exclusion_exponent(c, r1, r2, loads));
            return product(product(via_x1, via_x2), field) * dens;
        };
        IntegrationOptions o;
        o.breakpoints = {v - r1, std::abs(r1 - v)};
        o.cosine_map = true;
        return integrate_1d(per_r2, z1, r1 + v, c.outer, o);
    };
    return over_r1(c, per_r1);
}

CoverageResult jcp_total(const CoverageQuery& q)
{
    const Estimate nh = jcp_no_handoff(q);
    const Estimate h = jcp_handoff(q);
    CoverageResult r;
    r.joint = nh.value + h.value;
    r.components = CoverageComponents{nh.value, h.value};
    r.err_est = nh.error + h.error;
    r.converged = nh.converged && h.converged;
    return r;
}

Estimate jcp_static(const NetworkParams& params, double T, const QuadratureSpec& spec)
{
    params.validate();
    spec.validate();
    if (!(T > 0.0)) throw std::invalid_argument("threshold must be positive");
    const double lambda = params.lambda;
    const QuadratureSpec inner = spec.with_tolerances(spec.rel_tol, spec.abs_tol / lambda);
    auto per_r1 = [&](double r1) -> Estimate {
        const double s = T * (params.epsilon + std::pow(r1, params.alpha));
        auto f = [&](double r) {
            const double b = params.epsilon + pow_alpha_from_sq(r * r, params.alpha);
            // 1 - (b / (b + s))^2
            return s * (2.0 * b + s) / ((b + s) * (b + s)) * r;
        };
        IntegrationOptions o;
        o.scale = std::max(r1, 1.0 / std::sqrt(lambda));
        const Estimate tail = integrate_1d(f, r1, std::numeric_limits<double>::infinity(), inner, o);
        return exp_neg(tail * (2.0 * kPi * lambda));
    };
    return expect_serving_distance(per_r1, lambda, spec);
}

Estimate jcp_static(double T, double alpha, const QuadratureSpec& spec)
{
    NetworkParams p;
    p.alpha = alpha;
    return jcp_static(p, T, spec);
}

double jcp_static_hypergeometric(double T, double alpha)
{
    if (!(T > 0.0) || !(alpha > 2.0)) throw std::invalid_argument("need T > 0 and alpha > 2");
    // 2F1(2, b; c; -T) = (1 + T)^(-b) 2F1(c - 2, b; c; T / (1 + T)), b = -2/a, c = 1 - 2/a.
    const double b = -2.0 / alpha;
    const double c = 1.0 + b;
    const double a = c - 2.0;
    const double z = T / (1.0 + T);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 100000; ++n) {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return 1.0 / (std::pow(1.0 + T, -b) * sum);
}

Estimate rho(double T, double alpha, const QuadratureSpec& spec)
{
    if (!(T > 0.0) || !(alpha > 2.0)) throw std::invalid_argument("need T > 0 and alpha > 2");
    spec.validate();
    const double lo = std::pow(T, -2.0 / alpha);
    auto f = [&](double u) { return 1.0 / (1.0 + std::pow(u, 0.5 * alpha)); };
    IntegrationOptions o;
    o.scale = std::max(lo, 1.0);
    return integrate_1d(f, lo, std::numeric_limits<double>::infinity(), spec, o) * std::pow(T, 2.0 / alpha);
}

Estimate jcp_mobile_limit(double T, double alpha, const QuadratureSpec& spec)
{
    const Estimate r = rho(T, alpha, spec);
    const double single = 1.0 / (1.0 + r.value);
    Estimate out = r;
    out.value = single * single;
    out.error = 2.0 * single * single * single * r.error;
    return out;
}

CoverageResult joint_coverage(const CoverageQuery& q)
{
    q.validate();
    auto wrap = [](const Estimate& e) {
        CoverageResult r;
        r.joint = e.value;
        r.err_est = e.error;
        r.converged = e.converged;
        return r;
    };
    switch (q.strategy) {
    case CoverageStrategy::Skip: return wrap(jcp_skip(q));
    case CoverageStrategy::Conventional: return jcp_total(q);
    case CoverageStrategy::StaticClosedForm: return wrap(jcp_static(q.params, q.threshold.linear(), q.spec));
    case CoverageStrategy::MobileLimit:
        return wrap(jcp_mobile_limit(q.threshold.linear(), q.params.alpha, q.spec));
    }
    return {};
}

}  // namespace stcorr
