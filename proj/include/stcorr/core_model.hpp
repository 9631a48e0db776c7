#pragma once

// Network, channel and threshold parameters shared by every engine.

#include <cmath>
#include <stdexcept>
#include <string>

namespace stcorr {

enum class FadingKind { RayleighUnitMean };

/// Fading power-gain law. Only unit-mean Rayleigh (exponential power) is modelled.
struct FadingModel {
    FadingKind kind = FadingKind::RayleighUnitMean;
    double first_moment = 1.0;
    double second_moment = 2.0;

    static FadingModel rayleigh() { return {}; }
};

/// Poisson cellular network: BS density, bounded path-loss 1/(eps + d^alpha), fading.
struct NetworkParams {
    double lambda = 1.0;
    double alpha = 4.0;
    double epsilon = 0.0;
    FadingModel fading{};

    /// Throws std::invalid_argument when lambda <= 0, alpha <= 2 or epsilon < 0.
    void validate() const;
    /// Interference moments diverge for epsilon == 0; throws std::domain_error then.
    void require_bounded_path_loss() const;
};

/// SIR threshold held in both scales.
class SirThreshold {
public:
    static SirThreshold from_db(double db);
    static SirThreshold from_linear(double linear);

    double linear() const { return linear_; }
    double db() const { return db_; }

private:
    SirThreshold(double linear, double db) : linear_(linear), db_(db) {}
    double linear_;
    double db_;
};

/// g(d) = 1/(eps + d^alpha). d == 0 with eps == 0 throws std::domain_error.
double path_loss(double distance, const NetworkParams& params);

/// d^alpha from a squared distance, with a fast path for alpha == 4.
inline double pow_alpha_from_sq(double dist_sq, double alpha)
{
    if (alpha == 4.0) return dist_sq * dist_sq;
    return std::pow(dist_sq, 0.5 * alpha);
}

/// 1/(1 + s*g(d)) written as (eps + d^a)/(eps + d^a + s); finite at d = 0.
/// This is the per-interferer Laplace factor under unit-mean Rayleigh fading.
inline double laplace_factor_sq(double s, double dist_sq, double alpha, double epsilon)
{
    const double denom_pl = epsilon + pow_alpha_from_sq(dist_sq, alpha);
    return denom_pl / (denom_pl + s);
}

/// Uniform on [0, 1) with 53 random bits from a 64-bit engine.
template <class Engine>
double unit_uniform(Engine& rng)
{
    static_assert(Engine::max() == ~0ULL && Engine::min() == 0, "needs a full 64-bit engine");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// One unit-mean exponential power gain, by inversion.
template <class Engine>
double fading_power_sample(Engine& rng)
{
    return -std::log(1.0 - unit_uniform(rng));
}

}  // namespace stcorr
