#include "stcorr/core_model.hpp"

namespace stcorr {

void NetworkParams::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be positive and finite");
    if (!(alpha > 2.0) || !std::isfinite(alpha))
        throw std::invalid_argument("alpha must exceed 2");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be non-negative");
    if (fading.first_moment != 1.0)
        throw std::invalid_argument("fading must have unit mean power");
    if (fading.second_moment < fading.first_moment * fading.first_moment)
        throw std::invalid_argument("fading second moment below squared mean");
}

void NetworkParams::require_bounded_path_loss() const
{
    validate();
    if (epsilon <= 0.0)
        throw std::domain_error("interference moments need epsilon > 0");
}

SirThreshold SirThreshold::from_db(double db)
{
    if (!std::isfinite(db)) throw std::invalid_argument("threshold dB must be finite");
    return SirThreshold(std::pow(10.0, db / 10.0), db);
}

SirThreshold SirThreshold::from_linear(double linear)
{
    if (!(linear > 0.0) || !std::isfinite(linear))
        throw std::invalid_argument("linear threshold must be positive");
    return SirThreshold(linear, 10.0 * std::log10(linear));
}

double path_loss(double distance, const NetworkParams& params)
{
    if (!(distance >= 0.0)) throw std::invalid_argument("distance must be non-negative");
    const double d_alpha = std::pow(distance, params.alpha);
    const double denom = params.epsilon + d_alpha;
    if (denom == 0.0) throw std::domain_error("path loss is singular at distance 0 with epsilon 0");
    return 1.0 / denom;
}

}  // namespace stcorr
