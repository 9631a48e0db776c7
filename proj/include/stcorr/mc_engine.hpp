#pragma once

// Monte Carlo replay of the two-location experiment on a truncated PPP.
//
// Every trial draws from its own engine seeded from (seed, trial index), so
// results do not depend on how trials are spread over threads. The OpenMP
// estimators and the serial reference estimators produce identical bits.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stcorr/core_model.hpp"

namespace stcorr {

using McEngine = std::mt19937_64;

/// Disk of BSs around l2 (the origin). Points are drawn ring by ring outward
/// with ring width 1/sqrt(lambda), so a larger window extends the realization
/// of a smaller one drawn from the same engine.
struct SimWindow {
    double radius = 0.0;
    /// Relative size of the truncated tail the radius was chosen for.
    double tail_fraction = 4e-4;

    /// Coverage window: smallest ring multiple covering v plus a guard whose
    /// truncated mean interference is below tail_fraction.
    static SimWindow automatic(const NetworkParams& params, double v, double tail_fraction = 4e-4);
    /// Correlation window (eps > 0): the guard bounds the truncated part of
    /// lambda \int g^2, which is what the interference covariance sees.
    static SimWindow for_correlation(const NetworkParams& params, double v, double tail_fraction = 1e-4);
    /// Throws std::invalid_argument unless radius > v + 3/sqrt(lambda) and
    /// lambda*pi*radius^2 >= 100.
    void validate(double lambda, double v) const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// PPP of intensity lambda on the window disk.
std::vector<Point> sample_ppp(double lambda, const SimWindow& window, McEngine& rng);

struct TrialRecord {
    double r1 = 0.0;   ///< |x1 - l1|
    double r2 = 0.0;   ///< |x2 - l2|
    double r12 = 0.0;  ///< |x1 - l2|
    bool handoff = false;
    double I1 = 0.0;       ///< in-window interference at l1, serving x1 excluded
    double I2 = 0.0;       ///< in-window interference at l2, serving x2 excluded
    double I2_skip = 0.0;  ///< in-window interference at l2, x1 excluded
    /// SIRs add the mean interference of the PPP outside the window.
    double sir1 = 0.0;
    double sir2_conventional = 0.0;
    double sir2_skip = 0.0;
    int rejected = 0;  ///< empty windows redrawn before this trial
};

/// One realization: l1 = (-v, 0), l2 = origin, independent unit-mean
/// exponential fading per link and slot. The skip strategy reuses the slot-2
/// fading of the conventional one.
TrialRecord run_trial(const NetworkParams& params, double v, McEngine& rng, const SimWindow& window);

/// Engine for trial `index` of a run with `seed`.
McEngine trial_engine(std::uint64_t seed, std::uint64_t index);

struct EstimateWithCI {
    double mean = 0.0;
    double half_width_95 = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    long n_trials = 0;
    std::uint64_t seed = 0;
    long rejected = 0;
    std::string warning{};

    bool contains(double x) const { return x >= ci_lower && x <= ci_upper; }
};

enum class McStrategy { Conventional, Skip };

struct McOptions {
    /// OpenMP threads; 0 uses the runtime default.
    int workers = 0;
    /// Run the plain loop instead of the OpenMP one.
    bool serial = false;
    /// Window radius; 0 selects SimWindow::automatic or SimWindow::for_correlation.
    double window_radius = 0.0;
    /// Correlation only: draw the two locations from independent realizations.
    bool independent_realizations = false;
    int batches = 50;
};

/// Joint coverage estimates sharing one set of trials.
struct JcpEstimates {
    EstimateWithCI conventional;
    EstimateWithCI skip;
    EstimateWithCI no_handoff;  ///< both covered and no handoff
    EstimateWithCI handoff;     ///< both covered and handoff
    EstimateWithCI handoff_frequency;
};

JcpEstimates estimate_jcp_all(const NetworkParams& params, double v, double threshold, long n_trials,
                              std::uint64_t seed, const McOptions& opts = {});

/// P(sir1 > T and sir2 > T) under the strategy. Requires n_trials >= 1000.
EstimateWithCI estimate_jcp(const NetworkParams& params, double v, double threshold, McStrategy strategy,
                            long n_trials, std::uint64_t seed, const McOptions& opts = {});

/// Pearson correlation of (I1, I2) with a batch-means interval.
/// Requires epsilon > 0 and n_trials >= 10^4.
EstimateWithCI estimate_corr(const NetworkParams& params, double v, long n_trials, std::uint64_t seed,
                             const McOptions& opts = {});

/// Raw trial records, for distribution checks.
std::vector<TrialRecord> simulate_trials(const NetworkParams& params, double v, long n_trials,
                                         std::uint64_t seed, const McOptions& opts = {});

/// Binomial proportion interval: Wilson score near 0 or 1, normal otherwise.
EstimateWithCI proportion_estimate(long successes, long n, std::uint64_t seed);

}  // namespace stcorr
