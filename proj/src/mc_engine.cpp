#include "stcorr/mc_engine.hpp"

#include "stcorr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <omp.h>

namespace stcorr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZ95 = 1.96;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(McEngine& rng) { return unit_uniform(rng); }

// Calls emit(x, y) for each point, ring by ring from the centre outward.
template <class Emit>
void sample_rings(double lambda, double radius, McEngine& rng, Emit&& emit)
{
    const double w = 1.0 / std::sqrt(lambda);
    const long rings = std::max(1L, static_cast<long>(std::ceil(radius / w - 1e-9)));
    for (long k = 0; k < rings; ++k) {
        const double a = static_cast<double>(k) * w;
        const double b = (k + 1 == rings) ? radius : static_cast<double>(k + 1) * w;
        const double a2 = a * a;
        const double span = b * b - a2;
        std::poisson_distribution<long> count(lambda * kPi * span);
        const long n = count(rng);
        for (long i = 0; i < n; ++i) {
            const double r = std::sqrt(a2 + uniform01(rng) * span);
            double ux = 0.0;
            double uy = 0.0;
            double s = 0.0;
            // Direction by rejection in the square, 32 bits per coordinate.
            do {
                const std::uint64_t bits = rng();
                ux = static_cast<double>(bits >> 32) * 0x1.0p-31 - 1.0;
                uy = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-31 - 1.0;
                s = ux * ux + uy * uy;
            } while (s > 1.0 || s == 0.0);
            const double scale = r / std::sqrt(s);
            emit(ux * scale, uy * scale);
        }
    }
}

struct Sample {
    double d1_sq;
    double d2_sq;
    double h1;
    double h2;
};

double gain_sq(double dist_sq, const NetworkParams& p)
{
    return 1.0 / (p.epsilon + pow_alpha_from_sq(dist_sq, p.alpha));
}

void draw_realization(const NetworkParams& p, double v, double radius, McEngine& rng, std::vector<Sample>& buf,
                      int& rejected)
{
    for (;;) {
        buf.clear();
        sample_rings(p.lambda, radius, rng, [&](double x, double y) {
            const double dx = x + v;
            const double h1 = fading_power_sample(rng);
            const double h2 = fading_power_sample(rng);
            buf.push_back({dx * dx + y * y, x * x + y * y, h1, h2});
        });
        if (!buf.empty()) return;
        ++rejected;
    }
}

// Mean interference from the PPP outside the window, at l1 and at l2.
struct TailLoad {
    double at_l1 = 0.0;
    double at_l2 = 0.0;
};

// lambda \int_{|x| > radius} g(|x - a|) dx with |a| = offset < radius.
double tail_mean(const NetworkParams& p, double offset, double radius)
{
    QuadratureSpec spec;
    spec.rel_tol = 1e-8;
    spec.abs_tol = 1e-15;
    auto ring = [&](double r) {
        auto arc = [&](double phi) { return gain_sq(r * r + offset * offset - 2 * r * offset * std::cos(phi), p); };
        return 2.0 * r * integrate_1d(arc, 0.0, kPi, spec).value;
    };
    return p.lambda * integrate_1d(ring, radius, std::numeric_limits<double>::infinity(), spec).value;
}

TailLoad tail_load(const NetworkParams& p, double v, double radius)
{
    return {tail_mean(p, v, radius), tail_mean(p, 0.0, radius)};
}

TrialRecord trial_impl(const NetworkParams& p, double v, McEngine& rng, double radius, const TailLoad& tail,
                       std::vector<Sample>& buf)
{
    TrialRecord rec;
    draw_realization(p, v, radius, rng, buf, rec.rejected);

    std::size_t i1 = 0;
    std::size_t i2 = 0;
    for (std::size_t i = 1; i < buf.size(); ++i) {
        if (buf[i].d1_sq < buf[i1].d1_sq) i1 = i;
        if (buf[i].d2_sq < buf[i2].d2_sq) i2 = i;
    }
    double I1 = 0.0;
    double I2 = 0.0;
    double I2_skip = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const Sample& s = buf[i];
        const double g2 = s.h2 * gain_sq(s.d2_sq, p);
        if (i != i1) {
            I1 += s.h1 * gain_sq(s.d1_sq, p);
            I2_skip += g2;
        }
        if (i != i2) I2 += g2;
    }
    auto sir = [](double signal, double interference) {
        return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
    };
    rec.r1 = std::sqrt(buf[i1].d1_sq);
    rec.r2 = std::sqrt(buf[i2].d2_sq);
    rec.r12 = std::sqrt(buf[i1].d2_sq);
    rec.handoff = i1 != i2;
    rec.I1 = I1;
    rec.I2 = I2;
    rec.I2_skip = I2_skip;
    // the field beyond the window is a sum of many tiny terms; its mean stands in for it
    rec.sir1 = sir(buf[i1].h1 * gain_sq(buf[i1].d1_sq, p), I1 + tail.at_l1);
    rec.sir2_conventional = sir(buf[i2].h2 * gain_sq(buf[i2].d2_sq, p), I2 + tail.at_l2);
    rec.sir2_skip = sir(buf[i1].h2 * gain_sq(buf[i1].d2_sq, p), I2_skip + tail.at_l2);
    return rec;
}

double resolve_radius(const NetworkParams& p, double v, const McOptions& o, bool correlation)
{
    SimWindow w{o.window_radius};
    if (!(o.window_radius > 0.0))
        w = correlation ? SimWindow::for_correlation(p, v) : SimWindow::automatic(p, v);
    w.validate(p.lambda, v);
    return w.radius;
}

double ring_multiple(double length, double lambda)
{
    const double w = 1.0 / std::sqrt(lambda);
    return std::ceil(length / w - 1e-9) * w;
}

double count_guard(double lambda) { return std::sqrt(500.0 / (lambda * kPi)); }

// body(i, buf) for i in [0, n); each index is handled exactly once.
template <class Body>
void for_trials(long n, const McOptions& o, Body&& body)
{
    if (o.serial) {
        std::vector<Sample> buf;
        for (long i = 0; i < n; ++i) body(i, buf);
        return;
    }
    const int workers = o.workers > 0 ? o.workers : omp_get_max_threads();
#pragma omp parallel num_threads(workers)
    {
        std::vector<Sample> buf;
#pragma omp for schedule(dynamic, 256)
        for (long i = 0; i < n; ++i) body(i, buf);
    }
}

void check_common(const NetworkParams& p, double v, long n_trials, long min_trials)
{
    p.validate();
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("v must be finite and non-negative");
    if (n_trials < min_trials)
        throw std::invalid_argument("n_trials must be at least " + std::to_string(min_trials));
}

struct Pearson {
    double value = 0.0;
    bool degenerate = false;
};

Pearson pearson(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi)
{
    const double n = static_cast<double>(hi - lo);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return {0.0, true};
    return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

}  // namespace

SimWindow SimWindow::automatic(const NetworkParams& params, double v, double tail_fraction)
{
    params.validate();
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must lie in (0, 1)");
    const double w = 1.0 / std::sqrt(params.lambda);
    // (r / R)^(alpha - 2) is the truncated share of the mean interference seen
    // beyond a serving distance r; r = w/2 is the typical serving distance.
    const double tail = 0.5 * w * std::pow(tail_fraction, -1.0 / (params.alpha - 2.0));
    const double guard = std::min(std::max({tail, 3.0 * w, count_guard(params.lambda)}), 200.0 * w);
    return {ring_multiple(v + guard, params.lambda), tail_fraction};
}

SimWindow SimWindow::for_correlation(const NetworkParams& params, double v, double tail_fraction)
{
    params.require_bounded_path_loss();
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must lie in (0, 1)");
    const double a = params.alpha;
    const double e = params.epsilon;
    // \int_{R^2} g^2 = (2 pi / a) eps^(2/a - 2) (1 - 2/a) pi / sin(2 pi / a)
    const double s = 2.0 / a;
    const double plane_g2 = 2.0 * kPi / a * std::pow(e, s - 2.0) * (1.0 - s) * kPi / std::sin(kPi * s);
    // \int_{|x| > R} g^2 <= 2 pi R^(2 - 2a) / (2a - 2)
    const double tail = std::pow(2.0 * kPi / ((2.0 * a - 2.0) * tail_fraction * plane_g2), 1.0 / (2.0 * a - 2.0));
    const double w = 1.0 / std::sqrt(params.lambda);
    const double guard = std::min(std::max({tail, 3.0 * w, count_guard(params.lambda)}), 200.0 * w);
    return {ring_multiple(v + guard, params.lambda), tail_fraction};
}

void SimWindow::validate(double lambda, double v) const
{
    if (!(radius > v + 3.0 / std::sqrt(lambda)))
        throw std::invalid_argument("window radius must exceed v + 3/sqrt(lambda)");
    if (!(lambda * kPi * radius * radius >= 100.0))
        throw std::invalid_argument("window must hold at least 100 expected points");
}

std::vector<Point> sample_ppp(double lambda, const SimWindow& window, McEngine& rng)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(window.radius > 0.0)) throw std::invalid_argument("window radius must be positive");
    std::vector<Point> pts;
    sample_rings(lambda, window.radius, rng, [&](double x, double y) { pts.push_back({x, y}); });
    return pts;
}

McEngine trial_engine(std::uint64_t seed, std::uint64_t index)
{
    return McEngine(splitmix64(splitmix64(seed) ^ index));
}

TrialRecord run_trial(const NetworkParams& params, double v, McEngine& rng, const SimWindow& window)
{
    params.validate();
    window.validate(params.lambda, v);
    std::vector<Sample> buf;
    return trial_impl(params, v, rng, window.radius, tail_load(params, v, window.radius), buf);
}

EstimateWithCI proportion_estimate(long successes, long n, std::uint64_t seed)
{
    if (n <= 0 || successes < 0 || successes > n) throw std::invalid_argument("invalid proportion counts");
    EstimateWithCI e;
    e.n_trials = n;
    e.seed = seed;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    e.mean = p;
    if (successes <= 5 || n - successes <= 5) {
        const double z2 = kZ95 * kZ95;
        const double denom = 1.0 + z2 / nn;
        const double centre = (p + z2 / (2.0 * nn)) / denom;
        const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
        e.ci_lower = std::max(0.0, centre - half);
        e.ci_upper = std::min(1.0, centre + half);
        e.half_width_95 = half;
    } else {
        const double sd = std::sqrt(p * (1.0 - p) * nn / (nn - 1.0));
        e.half_width_95 = kZ95 * sd / std::sqrt(nn);
        e.ci_lower = p - e.half_width_95;
        e.ci_upper = p + e.half_width_95;
    }
    return e;
}

std::vector<TrialRecord> simulate_trials(const NetworkParams& params, double v, long n_trials,
                                         std::uint64_t seed, const McOptions& opts)
{
    check_common(params, v, n_trials, 1);
    const double radius = resolve_radius(params, v, opts, false);
    const TailLoad tail = tail_load(params, v, radius);
    std::vector<TrialRecord> out(static_cast<std::size_t>(n_trials));
    for_trials(n_trials, opts, [&](long i, std::vector<Sample>& buf) {
        McEngine rng = trial_engine(seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = trial_impl(params, v, rng, radius, tail, buf);
    });
    return out;
}

JcpEstimates estimate_jcp_all(const NetworkParams& params, double v, double threshold, long n_trials,
                              std::uint64_t seed, const McOptions& opts)
{
    check_common(params, v, n_trials, 1000);
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    const double radius = resolve_radius(params, v, opts, false);
    const TailLoad tail = tail_load(params, v, radius);

    enum : std::uint8_t { kConv = 1, kSkip = 2, kHandoff = 4 };
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(n_trials));
    std::vector<std::int32_t> rejected(static_cast<std::size_t>(n_trials));
    for_trials(n_trials, opts, [&](long i, std::vector<Sample>& buf) {
        McEngine rng = trial_engine(seed, static_cast<std::uint64_t>(i));
        const TrialRecord t = trial_impl(params, v, rng, radius, tail, buf);
        std::uint8_t f = 0;
        if (t.sir1 > threshold && t.sir2_conventional > threshold) f |= kConv;
        if (t.sir1 > threshold && t.sir2_skip > threshold) f |= kSkip;
        if (t.handoff) f |= kHandoff;
        flags[static_cast<std::size_t>(i)] = f;
        rejected[static_cast<std::size_t>(i)] = t.rejected;
    });

    long conv = 0, skip = 0, ho = 0, conv_ho = 0, rej = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const std::uint8_t f = flags[i];
        conv += (f & kConv) ? 1 : 0;
        skip += (f & kSkip) ? 1 : 0;
        ho += (f & kHandoff) ? 1 : 0;
        conv_ho += ((f & kConv) && (f & kHandoff)) ? 1 : 0;
        rej += rejected[i];
    }
    JcpEstimates out;
    out.conventional = proportion_estimate(conv, n_trials, seed);
    out.skip = proportion_estimate(skip, n_trials, seed);
    out.no_handoff = proportion_estimate(conv - conv_ho, n_trials, seed);
    out.handoff = proportion_estimate(conv_ho, n_trials, seed);
    out.handoff_frequency = proportion_estimate(ho, n_trials, seed);
    for (EstimateWithCI* e : {&out.conventional, &out.skip, &out.no_handoff, &out.handoff, &out.handoff_frequency})
        e->rejected = rej;
    return out;
}

EstimateWithCI estimate_jcp(const NetworkParams& params, double v, double threshold, McStrategy strategy,
                            long n_trials, std::uint64_t seed, const McOptions& opts)
{
    const JcpEstimates all = estimate_jcp_all(params, v, threshold, n_trials, seed, opts);
    return strategy == McStrategy::Skip ? all.skip : all.conventional;
}

EstimateWithCI estimate_corr(const NetworkParams& params, double v, long n_trials, std::uint64_t seed,
                             const McOptions& opts)
{
    check_common(params, v, n_trials, 10000);
    params.require_bounded_path_loss();
    if (opts.batches < 30) throw std::invalid_argument("batch-means interval needs at least 30 batches");
    const double radius = resolve_radius(params, v, opts, true);

    std::vector<double> x(static_cast<std::size_t>(n_trials));
    std::vector<double> y(static_cast<std::size_t>(n_trials));
    std::vector<std::int32_t> rejected(static_cast<std::size_t>(n_trials));
    for_trials(n_trials, opts, [&](long i, std::vector<Sample>& buf) {
        McEngine rng = trial_engine(seed, static_cast<std::uint64_t>(i));
        // only the in-window sums are used, so no tail load
        const TrialRecord a = trial_impl(params, v, rng, radius, {}, buf);
        const auto k = static_cast<std::size_t>(i);
        x[k] = a.I1;
        y[k] = a.I2;
        rejected[k] = a.rejected;
        if (opts.independent_realizations) {
            const TrialRecord b = trial_impl(params, v, rng, radius, {}, buf);
            y[k] = b.I2;
            rejected[k] += b.rejected;
        }
    });

    EstimateWithCI e;
    e.n_trials = n_trials;
    e.seed = seed;
    for (std::int32_t r : rejected) e.rejected += r;
    const std::size_t n = x.size();
    const Pearson global = pearson(x, y, 0, n);
    e.mean = global.value;

    const auto nb = static_cast<std::size_t>(opts.batches);
    std::vector<double> batch(nb);
    bool degenerate = global.degenerate;
    for (std::size_t b = 0; b < nb; ++b) {
        const Pearson pb = pearson(x, y, b * n / nb, (b + 1) * n / nb);
        batch[b] = pb.value;
        degenerate = degenerate || pb.degenerate;
    }
    double mb = 0.0;
    for (double c : batch) mb += c;
    mb /= static_cast<double>(nb);
    double ss = 0.0;
    for (double c : batch) ss += (c - mb) * (c - mb);
    const double sd = std::sqrt(ss / static_cast<double>(nb - 1));
    e.half_width_95 = kZ95 * sd / std::sqrt(static_cast<double>(nb));
    e.ci_lower = e.mean - e.half_width_95;
    e.ci_upper = e.mean + e.half_width_95;
    if (degenerate) e.warning = "zero-variance batch";
    return e;
}

}  // namespace stcorr
