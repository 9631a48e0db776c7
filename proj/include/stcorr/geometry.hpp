#pragma once

// Circle geometry of a displaced user and the handoff laws derived from it.
//
// Frame: the second location l2 is the origin and the first location is
// l1 = (-v, 0). The serving BS x1 sits at distance r1 from l1, at bearing
// theta in [0, pi] measured so that |x1 - l2|^2 = r1^2 + v^2 + 2 r1 v cos(theta).

#include <vector>

#include "stcorr/quadrature.hpp"

namespace stcorr {

struct DisplacementGeometry {
    double v = 0.0;
    double theta = 0.0;
    double r1 = 1.0;

    /// Throws std::invalid_argument on v < 0, r1 <= 0 or theta outside [0, pi].
    static DisplacementGeometry make(double r1, double theta, double v);

    /// Distance from l2 to x1.
    double r12() const;
    /// Radius of the disk around l2 that lies inside B(l1, r1).
    double z1() const;
};

enum class OverlapCase { Disjoint, Intersecting, Engulfed };

const char* to_string(OverlapCase c);

/// Area of B(0, ra) intersected with B(d, rb).
double lens_area(double ra, double rb, double d);

/// |B(l2, rA) \ B(l1, rB)| for centres a distance d apart.
double crescent_area(double rA, double rB, double d);

/// Handoff-region area parameterised by (r1, theta, v); equals crescent_area(r12, r1, v).
double handoff_region_area(const DisplacementGeometry& geom);

/// Disjoint iff v >= r1 + r2, Engulfed iff v <= r2 - r1, Intersecting otherwise.
OverlapCase classify_overlap(double r1, double r2, double v);

/// Half-angle of the circle of radius r about l2 that lies inside B(l1, radius),
/// measured from the direction of l1. 0 when no part is inside, pi when all of it is.
double inside_half_angle(double r, double v, double radius);

/// P(H | r1, theta) = 1 - exp(-lambda |C|).
double handoff_probability(const DisplacementGeometry& geom, double lambda);

/// Handoff probability averaged over the Rayleigh serving distance and uniform theta.
Estimate handoff_probability_marginal(double v, double lambda, const QuadratureSpec& spec);

/// CDF of R2 given handoff. Throws std::domain_error when P(H | r1, theta) == 0.
double r2_conditional_cdf(double r2, const DisplacementGeometry& geom, double lambda);

/// Density of R2 given handoff, d/dr2 of r2_conditional_cdf, on [z1, r12].
double r2_conditional_pdf(double r2, const DisplacementGeometry& geom, double lambda);

/// P(H | r1, theta) * f(r2 | H, r1, theta) for r2 in [z1, r12]. Does not depend on theta
/// apart from the support, so it is also defined when P(H) vanishes.
double r2_handoff_density(double r2, double r1, double v, double lambda);

/// Inverse-CDF draw of R2 given handoff (bisection with Newton polish).
double r2_sample_given_handoff(double u, const DisplacementGeometry& geom, double lambda);

/// Bearings phi (from +x, about l2) at which a point at distance r2 from l2 lies
/// outside B(l1, r1), i.e. r2^2 + v^2 + 2 r2 v cos(phi) >= r1^2.
std::vector<AngleInterval> x2_admissible_arc(double r2, const DisplacementGeometry& geom);

}  // namespace stcorr
