#include "stcorr/expectation.hpp"

#include <stdexcept>

#include "stcorr/geometry.hpp"

namespace stcorr {

DensitySpec DensitySpec::rayleigh_serving(double lambda)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    DensitySpec d;
    d.kind = Kind::RayleighServing;
    d.lambda = lambda;
    return d;
}

DensitySpec DensitySpec::uniform_angle()
{
    DensitySpec d;
    d.kind = Kind::UniformAngle;
    return d;
}

DensitySpec DensitySpec::conditional_r2(const DisplacementGeometry& geom, double lambda)
{
    if (!(handoff_probability(geom, lambda) > 0.0))
        throw std::domain_error("conditional R2 law needs a positive handoff probability");
    DensitySpec d;
    d.kind = Kind::ConditionalR2;
    d.lambda = lambda;
    d.r1 = geom.r1;
    d.theta = geom.theta;
    d.v = geom.v;
    return d;
}

double DensitySpec::pdf(double x) const
{
    switch (kind) {
    case Kind::RayleighServing: {
        const double c = lambda * std::numbers::pi;
        return x < 0.0 ? 0.0 : 2.0 * c * x * std::exp(-c * x * x);
    }
    case Kind::UniformAngle:
        return (x >= 0.0 && x <= std::numbers::pi) ? 1.0 / std::numbers::pi : 0.0;
    case Kind::ConditionalR2:
        return r2_conditional_pdf(x, {v, theta, r1}, lambda);
    }
    return 0.0;
}

double DensitySpec::support_lo() const
{
    if (kind == Kind::ConditionalR2) return DisplacementGeometry{v, theta, r1}.z1();
    return 0.0;
}

double DensitySpec::support_hi() const
{
    switch (kind) {
    case Kind::RayleighServing: return std::numeric_limits<double>::infinity();
    case Kind::UniformAngle: return std::numbers::pi;
    case Kind::ConditionalR2: return DisplacementGeometry{v, theta, r1}.r12();
    }
    return 0.0;
}

namespace {

Estimate expect_level(const std::function<double(std::span<const double>)>& f,
                      const std::vector<DensitySpec>& ds, std::size_t level, std::vector<double>& xs,
                      const QuadratureSpec& spec)
{
    const DensitySpec& d = ds[level];
    const bool innermost = level + 1 == ds.size();
    auto inner = [&](double x) -> Estimate {
        xs[level] = x;
        if (innermost) return {f(xs), 0.0, 0, true};
        return expect_level(f, ds, level + 1, xs, spec);
    };
    if (d.kind == DensitySpec::Kind::RayleighServing) return expect_serving_distance(inner, d.lambda, spec);
    auto weighted = [&](double x) -> Estimate {
        const double p = d.pdf(x);
        if (p == 0.0) return {};
        return inner(x) * p;
    };
    return integrate_1d(weighted, d.support_lo(), d.support_hi(), spec);
}

}  // namespace

Estimate expect(const std::function<double(std::span<const double>)>& f,
                const std::vector<DensitySpec>& densities, const QuadratureSpec& spec)
{
    if (densities.empty()) throw std::invalid_argument("expect needs at least one density");
    spec.validate();
    std::vector<double> xs(densities.size(), 0.0);
    return expect_level(f, densities, 0, xs, spec);
}

Estimate expect(const std::function<double(double)>& f, const DensitySpec& density,
                const QuadratureSpec& spec)
{
    return expect([&](std::span<const double> x) { return f(x[0]); }, std::vector<DensitySpec>{density},
                  spec);
}

}  // namespace stcorr
