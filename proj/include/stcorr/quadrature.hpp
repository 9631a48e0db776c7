#pragma once

// Adaptive Gauss-Kronrod (G10/K21) integration with semi-infinite mapping,
// breakpoints and error propagation through nested integrals.
//
// An integrand may return either a double or an Estimate. In the latter case
// the inner error estimates are integrated alongside the value and reported
// in the outer error, but they do not drive subdivision.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include <omp.h>

namespace stcorr {

enum class Truncation {
    MapToFinite,  ///< x = a + s*t/(1-t)
    TailCutoff,   ///< doubling windows until a window adds < 1e-2*rel_tol of the total
};

struct QuadratureSpec {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    long max_evals = 1'000'000;
    Truncation truncation = Truncation::MapToFinite;

    void validate() const
    {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("quadrature tolerances must be positive");
        if (max_evals < 100) throw std::invalid_argument("max_evals must be at least 100");
    }

    QuadratureSpec with_tolerances(double rel, double abs) const
    {
        QuadratureSpec s = *this;
        s.rel_tol = rel;
        s.abs_tol = abs;
        return s;
    }
};

/// Value with an error estimate. `converged` is false when any contributing
/// integration ran out of evaluations or could not reach its tolerance.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    long evals = 0;
    bool converged = true;

    Estimate& operator+=(const Estimate& o)
    {
        value += o.value;
        error += o.error;
        evals += o.evals;
        converged = converged && o.converged;
        return *this;
    }
    Estimate& operator-=(const Estimate& o)
    {
        value -= o.value;
        error += o.error;
        evals += o.evals;
        converged = converged && o.converged;
        return *this;
    }
    Estimate& operator*=(double c)
    {
        value *= c;
        error *= std::abs(c);
        return *this;
    }
    friend Estimate operator+(Estimate a, const Estimate& b) { return a += b; }
    friend Estimate operator-(Estimate a, const Estimate& b) { return a -= b; }
    friend Estimate operator*(Estimate a, double c) { return a *= c; }
    friend Estimate operator*(double c, Estimate a) { return a *= c; }

    /// Product with first-order error propagation.
    friend Estimate product(const Estimate& a, const Estimate& b)
    {
        return {a.value * b.value, std::abs(a.value) * b.error + std::abs(b.value) * a.error,
                a.evals + b.evals, a.converged && b.converged};
    }
};

struct IntegrationOptions {
    /// Interior points where the integrand has kinks; out-of-range points are ignored.
    std::vector<double> breakpoints{};
    /// Length scale of the semi-infinite map / tail windows.
    double scale = 1.0;
    /// Evaluate the 21 nodes of a panel across OpenMP threads (deterministic).
    bool parallel = false;
    /// Finite intervals only: map each segment through x = a + (b-a)(1-cos(pi u))/2,
    /// which removes square-root behaviour at the segment ends.
    bool cosine_map = false;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct NodeValue {
    double value = 0.0;
    double inner_error = 0.0;
    long inner_evals = 0;
    bool inner_ok = true;
};

template <class F>
NodeValue eval_node(F& f, double x)
{
    using R = std::invoke_result_t<F&, double>;
    if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
        const Estimate e = f(x);
        return {e.value, e.error, e.evals, e.converged};
    } else {
        return {static_cast<double>(f(x)), 0.0, 0, true};
    }
}

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double inner_error = 0.0;
    long inner_evals = 0;
    bool inner_ok = true;
};

/// One G10/K21 panel with the QUADPACK error heuristic.
template <class F>
Panel gk21_panel(F& f, double a, double b, bool parallel)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 21> xs{};
    xs[0] = centre;
    for (int j = 0; j < 10; ++j) {
        xs[1 + 2 * j] = centre - half * kXgk[j];
        xs[2 + 2 * j] = centre + half * kXgk[j];
    }
    std::array<NodeValue, 21> fv{};
    if (parallel && !omp_in_parallel()) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < 21; ++i) fv[i] = eval_node(f, xs[i]);
    } else {
        for (int i = 0; i < 21; ++i) fv[i] = eval_node(f, xs[i]);
    }

    double res_k = kWgk[10] * fv[0].value;
    double res_g = 0.0;
    double res_abs = std::abs(res_k);
    double inner_err = kWgk[10] * fv[0].inner_error;
    long inner_evals = fv[0].inner_evals;
    bool inner_ok = fv[0].inner_ok;
    for (int j = 0; j < 10; ++j) {
        const double f1 = fv[1 + 2 * j].value;
        const double f2 = fv[2 + 2 * j].value;
        res_k += kWgk[j] * (f1 + f2);
        res_abs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
        inner_err += kWgk[j] * (fv[1 + 2 * j].inner_error + fv[2 + 2 * j].inner_error);
        inner_evals += fv[1 + 2 * j].inner_evals + fv[2 + 2 * j].inner_evals;
        inner_ok = inner_ok && fv[1 + 2 * j].inner_ok && fv[2 + 2 * j].inner_ok;
    }
    const double mean = 0.5 * res_k;
    double res_asc = kWgk[10] * std::abs(fv[0].value - mean);
    for (int j = 0; j < 10; ++j)
        res_asc += kWgk[j] * (std::abs(fv[1 + 2 * j].value - mean) + std::abs(fv[2 + 2 * j].value - mean));

    const double h = std::abs(half);
    res_asc *= h;
    res_abs *= h;
    double err = std::abs((res_k - res_g) * half);
    if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);

    return {a, b, res_k * half, err, inner_err * h, inner_evals, inner_ok};
}

/// Globally adaptive integration of f over the segments between `edges`.
template <class F>
Estimate adaptive(F& f, const std::vector<double>& edges, const QuadratureSpec& spec, bool parallel)
{
    auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::vector<Panel> heap;
    heap.reserve(64);
    long evals = 0;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) continue;
        Panel p = gk21_panel(f, edges[i], edges[i + 1], parallel);
        evals += 21;
        total += p.value;
        total_err += p.error;
        heap.push_back(p);
    }
    std::make_heap(heap.begin(), heap.end(), worse);

    bool converged = true;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (evals + 42 > spec.max_evals || heap.empty()) {
            converged = false;
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        const double width_floor = 1e3 * std::numeric_limits<double>::epsilon() *
                                   std::max({std::abs(worst.a), std::abs(worst.b), 1e-300});
        if (!(worst.b - worst.a > width_floor)) {
            // Cannot subdivide further; keep the panel and stop.
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), worse);
            converged = false;
            break;
        }
        Panel left = gk21_panel(f, worst.a, mid, parallel);
        Panel right = gk21_panel(f, mid, worst.b, parallel);
        evals += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), worse);
    }

    // Re-sum in a fixed order so the result does not depend on heap history.
    std::sort(heap.begin(), heap.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    Estimate out;
    for (const Panel& p : heap) {
        out.value += p.value;
        out.error += p.error + p.inner_error;
        out.evals += p.inner_evals;
        out.converged = out.converged && p.inner_ok;
    }
    out.evals += evals;
    out.converged = out.converged && converged;
    return out;
}

inline std::vector<double> finite_edges(double a, double b, const std::vector<double>& breaks)
{
    std::vector<double> edges{a};
    for (double x : breaks)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace detail

/// Integral of f over [a, b]; b may be +infinity.
template <class F>
Estimate integrate_1d(F&& f, double a, double b, const QuadratureSpec& spec,
                      const IntegrationOptions& opts = {})
{
    if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integration limits are NaN");
    if (std::isinf(a)) throw std::invalid_argument("lower limit must be finite");
    if (b == a) return {};
    if (b < a) {
        Estimate e = integrate_1d(f, b, a, spec, opts);
        e.value = -e.value;
        return e;
    }
    if (std::isfinite(b)) {
        auto edges = detail::finite_edges(a, b, opts.breakpoints);
        if (!opts.cosine_map) return detail::adaptive(f, edges, spec, opts.parallel);
        // u in [k, k+1] covers edges[k]..edges[k+1].
        const std::size_t nseg = edges.size() - 1;
        auto mapped = [&](double u) {
            const std::size_t k = std::min(nseg - 1, static_cast<std::size_t>(std::max(0.0, u)));
            const double lo = edges[k];
            const double w = edges[k + 1] - lo;
            const double t = std::numbers::pi * (u - static_cast<double>(k));
            const double x = lo + 0.5 * w * (1.0 - std::cos(t));
            const double jac = 0.5 * w * std::numbers::pi * std::sin(t);
            using R = std::invoke_result_t<F&, double>;
            if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
                if (jac == 0.0) return Estimate{};
                Estimate e = f(x);
                e.value *= jac;
                e.error *= jac;
                return e;
            } else {
                if (jac == 0.0) return 0.0;
                return static_cast<double>(f(x)) * jac;
            }
        };
        std::vector<double> uedges(nseg + 1);
        for (std::size_t k = 0; k <= nseg; ++k) uedges[k] = static_cast<double>(k);
        return detail::adaptive(mapped, uedges, spec, opts.parallel);
    }

    const double s = opts.scale > 0.0 ? opts.scale : 1.0;
    if (spec.truncation == Truncation::MapToFinite) {
        auto mapped = [&](double t) {
            const double one_m = 1.0 - t;
            const double x = a + s * t / one_m;
            const double jac = s / (one_m * one_m);
            using R = std::invoke_result_t<F&, double>;
            if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
                Estimate e = f(x);
                e.value *= jac;
                e.error *= jac;
                return e;
            } else {
                return static_cast<double>(f(x)) * jac;
            }
        };
        std::vector<double> tbreaks;
        for (double x : opts.breakpoints)
            if (x > a && std::isfinite(x)) tbreaks.push_back((x - a) / (x - a + s));
        auto edges = detail::finite_edges(0.0, 1.0, tbreaks);
        return detail::adaptive(mapped, edges, spec, opts.parallel);
    }

    // Tail cutoff: windows [a + s(2^k - 1), a + s(2^(k+1) - 1)].
    Estimate total;
    double lo = a;
    double width = s;
    int quiet = 0;
    for (int k = 0; k < 64; ++k) {
        const double hi = lo + width;
        auto edges = detail::finite_edges(lo, hi, opts.breakpoints);
        const Estimate w = detail::adaptive(f, edges, spec, opts.parallel);
        total += w;
        if (std::abs(w.value) <= 1e-2 * spec.rel_tol * std::abs(total.value) && lo > a) {
            if (++quiet >= 2) return total;
        } else {
            quiet = 0;
        }
        if (total.evals > spec.max_evals) break;
        lo = hi;
        width *= 2.0;
    }
    total.converged = false;
    return total;
}

/// Half-open angular interval [lo, hi).
struct AngleInterval {
    double lo = 0.0;
    double hi = 0.0;
    double measure() const { return hi - lo; }
};

/// Region in polar coordinates (r, gamma) about a centre.
///
/// Angular limits come from `angles(r)` when set (exact), otherwise from
/// [gamma_min, gamma_max] filtered by the optional membership predicate.
struct PolarRegion {
    double r_min = 0.0;
    double r_max = std::numeric_limits<double>::infinity();
    double gamma_min = 0.0;
    double gamma_max = 2.0 * std::numbers::pi;
    std::function<std::vector<AngleInterval>(double)> angles{};
    std::function<bool(double, double)> contains{};
    std::vector<double> r_breakpoints{};
    double r_scale = 1.0;
};

/// \int\int_region f(r, gamma) r dr dgamma, gamma innermost.
template <class F>
Estimate integrate_polar_region(F&& f, const PolarRegion& region, const QuadratureSpec& spec)
{
    auto radial = [&](double r) -> Estimate {
        auto ang = [&](double g) -> double {
            if (region.contains && !region.contains(r, g)) return 0.0;
            return f(r, g);
        };
        Estimate acc;
        if (region.angles) {
            for (const AngleInterval& iv : region.angles(r))
                acc += integrate_1d(ang, iv.lo, iv.hi, spec);
        } else {
            acc = integrate_1d(ang, region.gamma_min, region.gamma_max, spec);
        }
        acc *= r;
        return acc;
    };
    IntegrationOptions opts;
    opts.breakpoints = region.r_breakpoints;
    opts.scale = region.r_scale;
    return integrate_1d(radial, region.r_min, region.r_max, spec, opts);
}

}  // namespace stcorr
