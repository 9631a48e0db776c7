#pragma once

// Interference moments and correlation coefficients at two locations a
// distance v apart under closest-BS association.

#include "stcorr/core_model.hpp"
#include "stcorr/quadrature.hpp"

namespace stcorr {

/// Moments of the total received power (no serving BS removed).
struct TotalFieldMoments {
    Estimate mean;    ///< lambda * int g
    Estimate second;  ///< E[h^2] lambda int g^2 + (lambda int g)^2
    Estimate cross;   ///< lambda int g(x) g(x - v) + (lambda int g)^2
};

/// Interference moments at the two locations.
///
/// `variance` and `covariance` are assembled directly in cancellation-free
/// form; `second` and `cross` are reconstructed from them and `mean_sq`.
struct MomentSet {
    double mean = 0.0;     ///< E[I(2)]
    double mean_sq = 0.0;  ///< E[I(2)]^2
    double second = 0.0;   ///< E[I(2)^2]
    double cross = 0.0;    ///< E[I(1) I(2)]
    double variance = 0.0;
    double covariance = 0.0;
    double total_mean = 0.0;
    double total_second = 0.0;
    double total_cross = 0.0;
    /// E[h_{x1}(1) g(x1 - l1) I(2)] and E[h_{x2}(2) g(x2) I(1)].
    double t1 = 0.0;
    double t2 = 0.0;
    /// Handoff-only parts of t1 and t2: E[g(x1 - l1) g(x1), H] and E[g(x2) g(x2 - l1), H].
    double handoff_t1 = 0.0;
    double handoff_t2 = 0.0;
    double err_est = 0.0;
    bool converged = true;
};

struct CorrelationResult {
    double coefficient = 0.0;
    MomentSet moments;
    double v = 0.0;
    NetworkParams params;
    double err_est = 0.0;
    bool converged = true;
};

/// Requires epsilon > 0.
TotalFieldMoments total_field_moments(const NetworkParams& params, double v, const QuadratureSpec& spec);

/// Cellular interference moments at separation v. Requires epsilon > 0.
MomentSet cellular_moments(const NetworkParams& params, double v, const QuadratureSpec& spec);

/// Spatio-temporal interference correlation coefficient at separation v.
CorrelationResult corr_coefficient(const NetworkParams& params, double v, const QuadratureSpec& spec);

/// Temporal (v = 0) coefficient from the single-location closed expectation form.
Estimate temporal_corr_coefficient(const NetworkParams& params, const QuadratureSpec& spec);

/// Ad hoc (all transmitters active, no association) coefficient; independent of lambda.
Estimate adhoc_corr_coefficient(const NetworkParams& params, double v, const QuadratureSpec& spec);

}  // namespace stcorr
