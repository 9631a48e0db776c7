#pragma once

// Joint SIR coverage at two locations a distance v apart: handoff skipping,
// conventional handoff (no-handoff + handoff split), and the static and
// highly-mobile closed forms.
//
// Path loss 1/(eps + d^alpha) with Rayleigh fading. With eps = 0 every result
// is invariant under (lambda, v) -> (k lambda, v / sqrt(k)).

#include <optional>

#include "stcorr/core_model.hpp"
#include "stcorr/quadrature.hpp"

namespace stcorr {

enum class CoverageStrategy { Skip, Conventional, StaticClosedForm, MobileLimit };

const char* to_string(CoverageStrategy s);

struct CoverageQuery {
    NetworkParams params{};
    double v = 0.0;
    SirThreshold threshold = SirThreshold::from_db(0.0);
    CoverageStrategy strategy = CoverageStrategy::Conventional;
    QuadratureSpec spec{};
    /// Multiplier on the lens correction inside the handoff exponent. Anything
    /// other than 1 is wrong; it exists so tests can check the MC oracle catches it.
    double b1_sign = 1.0;

    /// Throws std::invalid_argument on inconsistent fields.
    void validate() const;
};

struct CoverageComponents {
    double no_handoff = 0.0;
    double handoff = 0.0;
};

struct CoverageResult {
    double joint = 0.0;
    std::optional<CoverageComponents> components{};
    double err_est = 0.0;
    bool converged = true;
};

/// Laplace arguments s = T (eps + r_serving^alpha) for the two slots.
struct LinkLoads {
    double s1 = 0.0;
    double s2 = 0.0;

    static LinkLoads from(double T, const NetworkParams& params, double serving1, double serving2);
};

/// 1 - L(s1, |x - l1|) L(s2, |x|), with L(s, d) = (eps + d^a)/(eps + d^a + s).
/// `d1_sq` and `r_sq` are squared distances of the interferer to l1 and l2.
double coverage_penalty(const LinkLoads& loads, double d1_sq, double r_sq, double alpha, double eps);

/// F1 for skip / no-handoff: serving distances r1 at l1 and r12 at l2.
/// gamma is measured at l2 from the direction of l1.
double integrand_f1(double r1, double r, double gamma, double theta, double v, double T, double alpha,
                    double eps = 0.0);

/// F2 for the handoff case: serving distances r1 at l1 and r2 at l2.
double integrand_f2(double r1, double r2, double r, double gamma, double v, double T, double alpha,
                    double eps = 0.0);

/// \int_{C1 \ B(l2, r2)} F dA with the radial limits chosen by overlap case:
/// disjoint [v - r1, v + r1], intersecting [r2, v + r1], engulfed 0.
/// At each radius only the arc inside C1 is integrated.
Estimate b1_arc_integral(double r1, double r2, double v, const LinkLoads& loads,
                         const NetworkParams& params, const QuadratureSpec& spec);

Estimate jcp_skip(const CoverageQuery& q);
Estimate jcp_no_handoff(const CoverageQuery& q);
Estimate jcp_handoff(const CoverageQuery& q);
/// no_handoff + handoff, with both recorded as components.
CoverageResult jcp_total(const CoverageQuery& q);

/// Static user with eps = 0. Independent of lambda.
Estimate jcp_static(double T, double alpha, const QuadratureSpec& spec = {});
/// Static user for general parameters (depends on lambda only when eps > 0).
Estimate jcp_static(const NetworkParams& params, double T, const QuadratureSpec& spec = {});
/// 1 / 2F1(2, -2/a; 1 - 2/a; -T) summed after a Pfaff transformation.
double jcp_static_hypergeometric(double T, double alpha);

/// rho(T, a) = T^(2/a) \int_{T^(-2/a)}^inf du / (1 + u^(a/2)).
Estimate rho(double T, double alpha, const QuadratureSpec& spec = {});
/// (1 / (1 + rho))^2, eps = 0.
Estimate jcp_mobile_limit(double T, double alpha, const QuadratureSpec& spec = {});

/// Dispatch on q.strategy.
CoverageResult joint_coverage(const CoverageQuery& q);

}  // namespace stcorr
