#include "stcorr/validate.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "stcorr/correlation.hpp"
#include "stcorr/coverage.hpp"
#include "stcorr/geometry.hpp"
#include "stcorr/mc_engine.hpp"

namespace stcorr {

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string interval(const EstimateWithCI& e)
{
    return "[" + fmt(e.ci_lower) + ", " + fmt(e.ci_upper) + "]";
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

class Checks {
public:
    void add(std::string name, std::string expected, std::string observed, bool pass)
    {
        report.checks.push_back({std::move(name), std::move(expected), std::move(observed), pass});
    }
    void rel(std::string name, double observed, double target, double tol)
    {
        add(std::move(name), fmt(target) + " (rel " + fmt(tol) + ")", fmt(observed),
            close_rel(observed, target, tol));
    }
    void inside(std::string name, double analytic, const EstimateWithCI& mc)
    {
        add(std::move(name), "analytic " + fmt(analytic) + " in MC 95% CI", interval(mc), mc.contains(analytic));
    }

    ValidationReport report;
};

}  // namespace

bool ValidationReport::all_passed() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

const ValidationCheck* ValidationReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport run_validation(const ValidateOptions& opts)
{
    Checks ck;
    QuadratureSpec spec;
    spec.rel_tol = 1e-7;
    spec.abs_tol = 1e-10;
    const double pi = std::numbers::pi;

    // closed forms
    const double rho14 = rho(1.0, 4.0, spec).value;
    ck.rel("rho(1,4) = pi/4", rho14, pi / 4, 1e-8);
    const double mobile = jcp_mobile_limit(1.0, 4.0, spec).value;
    ck.rel("mobile limit = (1/(1+pi/4))^2", mobile, 1.0 / ((1 + pi / 4) * (1 + pi / 4)), 1e-6);
    const double stat = jcp_static(1.0, 4.0, spec).value;
    const double single = 1.0 / (1.0 + rho14);
    ck.add("static coverage bracket", "(" + fmt(mobile) + ", " + fmt(single) + ")", fmt(stat),
           stat > mobile && stat < single);
    ck.rel("static coverage = 1/2F1", stat, jcp_static_hypergeometric(1.0, 4.0), 1e-6);

    NetworkParams dense{100.0, 4.0, 0.0, FadingModel::rayleigh()};
    ck.rel("static coverage lambda-invariant", jcp_static(dense, 1.0, spec).value, stat, 1e-6);

    // coverage engine
    CoverageQuery q;
    q.spec = spec;
    q.b1_sign = opts.b1_sign;
    q.v = 0.0;
    ck.rel("jcp(v=0) = static coverage", jcp_total(q).joint, stat, 1e-6);

    q.v = 1.0;
    const CoverageResult at1 = jcp_total(q);
    q.strategy = CoverageStrategy::Skip;
    const double skip1 = jcp_skip(q).value;
    ck.add("skip below conventional at v=1", "< " + fmt(at1.joint), fmt(skip1), skip1 < at1.joint);

    CoverageQuery scaled = q;
    scaled.params.lambda = 4.0;
    scaled.v = 0.5;
    ck.rel("jcp invariant under (4 lambda, v/2)", jcp_total(scaled).joint, at1.joint, 1e-5);

    // correlation engine
    NetworkParams corr_params{1.0, 4.0, 1.0, FadingModel::rayleigh()};
    const double temporal = temporal_corr_coefficient(corr_params, spec).value;
    ck.rel("corr(v=0) = temporal coefficient", corr_coefficient(corr_params, 0.0, spec).coefficient, temporal,
           1e-6);
    NetworkParams huge = corr_params;
    huge.lambda = 1e6;
    const double t_huge = temporal_corr_coefficient(huge, spec).value;
    ck.add("temporal coefficient at lambda=1e6 near 1/E[h^2]", "|x - 0.5| < 0.01", fmt(t_huge),
           std::abs(t_huge - 0.5) < 0.01);
    ck.rel("ad hoc corr(v=0) = 1/E[h^2]", adhoc_corr_coefficient(corr_params, 0.0, spec).value, 0.5, 1e-6);

    // geometry
    const double h05 = handoff_probability_marginal(0.5, 1.0, spec).value;
    const double h1 = handoff_probability_marginal(1.0, 1.0, spec).value;
    ck.add("handoff probability increases with v", "P(0.5) < P(1) < 1", fmt(h05) + ", " + fmt(h1),
           h05 < h1 && h1 < 1.0);

    // Monte Carlo against analytic
    McOptions mc;
    mc.workers = opts.workers;
    const NetworkParams cov{1.0, 4.0, 0.0, FadingModel::rayleigh()};
    const JcpEstimates est = estimate_jcp_all(cov, 1.0, 1.0, opts.trials, opts.seed, mc);
    ck.inside("MC jcp conventional at v=1", at1.joint, est.conventional);
    ck.inside("MC jcp handoff part at v=1", at1.components->handoff, est.handoff);
    ck.inside("MC jcp skip at v=1", skip1, est.skip);
    ck.inside("MC handoff frequency at v=1", h1, est.handoff_frequency);

    McOptions serial = mc;
    serial.serial = true;
    const long n_det = std::min(opts.trials, 5'000L);
    const auto a = estimate_jcp(cov, 1.0, 1.0, McStrategy::Conventional, n_det, opts.seed, mc);
    const auto b = estimate_jcp(cov, 1.0, 1.0, McStrategy::Conventional, n_det, opts.seed, serial);
    ck.add("parallel and serial MC identical", fmt(b.mean), fmt(a.mean), a.mean == b.mean);

    return ck.report;
}

void write_report(std::ostream& os, const ValidationReport& report)
{
    int failed = 0;
    for (const auto& c : report.checks) {
        os << (c.pass ? "PASS  " : "FAIL  ") << c.name << "\n      expected " << c.expected << "\n      observed "
           << c.observed << "\n";
        failed += c.pass ? 0 : 1;
    }
    os << report.checks.size() - failed << "/" << report.checks.size() << " checks passed\n";
}

}  // namespace stcorr
