#pragma once

// Expectations against the distance and angle laws of the model.

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "stcorr/quadrature.hpp"

namespace stcorr {

/// E[f(R)] for the nearest-BS distance, pdf 2*lambda*pi*r*exp(-lambda*pi*r^2).
///
/// Integrates over u = lambda*pi*r^2 on [0, inf) with e^{-u} weight.
/// `opts.breakpoints` are given in r units and mapped to u.
template <class F>
Estimate expect_serving_distance(F&& f, double lambda, const QuadratureSpec& spec,
                                 const IntegrationOptions& opts = {})
{
    const double c = lambda * std::numbers::pi;
    auto weighted = [&](double u) {
        const double r = std::sqrt(u / c);
        const double w = std::exp(-u);
        using R = std::invoke_result_t<F&, double>;
        if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
            if (w == 0.0) return Estimate{};
            return f(r) * w;
        } else {
            if (w == 0.0) return 0.0;
            return static_cast<double>(f(r)) * w;
        }
    };
    IntegrationOptions mapped = opts;
    mapped.scale = 1.0;
    mapped.breakpoints.clear();
    for (double rb : opts.breakpoints)
        if (rb > 0.0) mapped.breakpoints.push_back(c * rb * rb);
    return integrate_1d(weighted, 0.0, std::numeric_limits<double>::infinity(), spec, mapped);
}

struct DisplacementGeometry;

/// Named densities the analytic engine takes expectations against.
struct DensitySpec {
    enum class Kind { RayleighServing, UniformAngle, ConditionalR2 };

    Kind kind = Kind::RayleighServing;
    double lambda = 1.0;
    // ConditionalR2 geometry
    double r1 = 1.0;
    double theta = 0.0;
    double v = 0.0;

    static DensitySpec rayleigh_serving(double lambda);
    static DensitySpec uniform_angle();
    static DensitySpec conditional_r2(const DisplacementGeometry& geom, double lambda);

    double pdf(double x) const;
    double support_lo() const;
    double support_hi() const;  ///< may be +inf
};

/// E[f(X1, ..., Xn)] over a product of densities. The first density is the
/// outermost integral and the last is innermost.
Estimate expect(const std::function<double(std::span<const double>)>& f,
                const std::vector<DensitySpec>& densities, const QuadratureSpec& spec);

/// Single-density convenience overload.
Estimate expect(const std::function<double(double)>& f, const DensitySpec& density,
                const QuadratureSpec& spec);

}  // namespace stcorr
