#include "stcorr/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <type_traits>

#include <omp.h>

#include "stcorr/correlation.hpp"
#include "stcorr/coverage.hpp"
#include "stcorr/geometry.hpp"
#include "stcorr/mc_engine.hpp"

namespace stcorr {

namespace {

constexpr long kMaxGridPoints = 1'000'000;

std::string_view trim(std::string_view s)
{
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, const std::string& field)
{
    text = trim(text);
    double x = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(x))
        throw UsageError(field, "not a number: '" + std::string(text) + "'");
    return x;
}

long parse_count(std::string_view text, const std::string& field)
{
    const double x = parse_number(text, field);
    if (x < 0.0 || x != std::floor(x) || x > 1e15)
        throw UsageError(field, "expected a non-negative integer, got '" + std::string(trim(text)) + "'");
    return static_cast<long>(x);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool needs_threshold(Quantity q) { return q == Quantity::Jcp || q == Quantity::JcpSkip; }
bool is_correlation(Quantity q)
{
    return q == Quantity::Corr || q == Quantity::TemporalCorr || q == Quantity::AdhocCorr;
}
bool runs_analytic(Method m) { return m != Method::Mc; }
bool runs_mc(Method m) { return m != Method::Analytic; }

long min_trials(Quantity q) { return is_correlation(q) ? 10'000 : 1'000; }

void require_grid(const std::vector<double>& g, const std::string& field)
{
    if (g.empty()) throw UsageError(field, "empty grid");
    for (double x : g)
        if (!std::isfinite(x)) throw UsageError(field, "non-finite grid value");
}

struct GridPoint {
    double alpha, epsilon, lambda, v;
    std::optional<double> threshold_db;
};

std::vector<GridPoint> expand(const SweepConfig& cfg)
{
    std::vector<std::optional<double>> thresholds;
    if (needs_threshold(cfg.quantity))
        for (double t : cfg.threshold_db) thresholds.emplace_back(t);
    else
        thresholds.emplace_back(std::nullopt);

    std::vector<GridPoint> pts;
    for (double a : cfg.alpha)
        for (double e : cfg.epsilon)
            for (double l : cfg.lambda)
                for (const auto& t : thresholds)
                    for (double v : cfg.v) pts.push_back({a, e, l, v, t});
    return pts;
}

QuadratureSpec spec_of(const SweepConfig& cfg)
{
    QuadratureSpec s;
    s.rel_tol = cfg.rel_tol;
    s.abs_tol = cfg.abs_tol;
    return s;
}

SweepRow row_base(const SweepConfig& cfg, const GridPoint& p, Method m)
{
    SweepRow r;
    r.quantity = cfg.quantity;
    r.method = m;
    r.v = p.v;
    r.lambda = p.lambda;
    r.epsilon = p.epsilon;
    r.alpha = p.alpha;
    r.threshold_db = p.threshold_db;
    return r;
}

SweepRow analytic_row(const SweepConfig& cfg, const GridPoint& p)
{
    SweepRow row = row_base(cfg, p, Method::Analytic);
    const NetworkParams params{p.lambda, p.alpha, p.epsilon, FadingModel::rayleigh()};
    const QuadratureSpec spec = spec_of(cfg);

    Estimate e;
    switch (cfg.quantity) {
    case Quantity::Corr: {
        const CorrelationResult c = corr_coefficient(params, p.v, spec);
        e = {c.coefficient, c.err_est, 0, c.converged};
        break;
    }
    case Quantity::TemporalCorr: e = temporal_corr_coefficient(params, spec); break;
    case Quantity::AdhocCorr: e = adhoc_corr_coefficient(params, p.v, spec); break;
    case Quantity::Handoff: e = handoff_probability_marginal(p.v, p.lambda, spec); break;
    case Quantity::Jcp:
    case Quantity::JcpSkip: {
        CoverageQuery q;
        q.params = params;
        q.v = p.v;
        q.threshold = SirThreshold::from_db(*p.threshold_db);
        q.spec = spec;
        if (cfg.quantity == Quantity::Jcp) {
            const CoverageResult c = jcp_total(q);
            e = {c.joint, c.err_est, 0, c.converged};
        } else {
            e = jcp_skip(q);
        }
        break;
    }
    }
    row.value = e.value;
    row.err_est = e.error;
    if (!e.converged) row.warning = "unconverged";
    return row;
}

SweepRow mc_row(const SweepConfig& cfg, const GridPoint& p, int workers)
{
    SweepRow row = row_base(cfg, p, Method::Mc);
    const NetworkParams params{p.lambda, p.alpha, p.epsilon, FadingModel::rayleigh()};
    McOptions opts;
    opts.workers = workers;
    opts.serial = workers == 1;

    EstimateWithCI e;
    switch (cfg.quantity) {
    case Quantity::Corr: e = estimate_corr(params, p.v, cfg.trials, cfg.seed, opts); break;
    case Quantity::TemporalCorr: e = estimate_corr(params, 0.0, cfg.trials, cfg.seed, opts); break;
    case Quantity::AdhocCorr: throw UsageError("method", "adhoc-corr has no Monte Carlo estimator");
    case Quantity::Jcp:
    case Quantity::JcpSkip:
    case Quantity::Handoff: {
        const double T = p.threshold_db ? SirThreshold::from_db(*p.threshold_db).linear() : 1.0;
        const JcpEstimates all = estimate_jcp_all(params, p.v, T, cfg.trials, cfg.seed, opts);
        e = cfg.quantity == Quantity::Jcp       ? all.conventional
            : cfg.quantity == Quantity::JcpSkip ? all.skip
                                                : all.handoff_frequency;
        break;
    }
    }
    row.value = e.mean;
    row.ci_half_width = e.half_width_95;
    row.n_trials = e.n_trials;
    row.seed = e.seed;
    row.warning = e.warning;
    return row;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

const char* to_string(Quantity q)
{
    switch (q) {
    case Quantity::Corr: return "corr";
    case Quantity::TemporalCorr: return "temporal-corr";
    case Quantity::AdhocCorr: return "adhoc-corr";
    case Quantity::Jcp: return "jcp";
    case Quantity::JcpSkip: return "jcp-skip";
    case Quantity::Handoff: return "handoff";
    }
    return "?";
}

const char* to_string(Method m)
{
    switch (m) {
    case Method::Analytic: return "analytic";
    case Method::Mc: return "mc";
    case Method::Both: return "both";
    }
    return "?";
}

Quantity parse_quantity(std::string_view s)
{
    s = trim(s);
    for (Quantity q : {Quantity::Corr, Quantity::TemporalCorr, Quantity::AdhocCorr, Quantity::Jcp,
                       Quantity::JcpSkip, Quantity::Handoff})
        if (s == to_string(q)) return q;
    throw UsageError("quantity", "unknown quantity '" + std::string(s) +
                                     "' (corr, temporal-corr, adhoc-corr, jcp, jcp-skip, handoff)");
}

Method parse_method(std::string_view s)
{
    s = trim(s);
    for (Method m : {Method::Analytic, Method::Mc, Method::Both})
        if (s == to_string(m)) return m;
    throw UsageError("method", "unknown method '" + std::string(s) + "' (analytic, mc, both)");
}

std::vector<double> parse_grid(std::string_view text, const std::string& field)
{
    text = trim(text);
    if (text.empty()) throw UsageError(field, "empty grid");

    if (text.find(':') == std::string_view::npos) {
        std::vector<double> out;
        for (auto part : split(text, ',')) out.push_back(parse_number(part, field));
        return out;
    }

    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError(field, "range must be start:stop:step");
    const double start = parse_number(parts[0], field);
    const double stop = parse_number(parts[1], field);
    if (stop < start) throw UsageError(field, "range stop is below start");

    std::vector<double> out;
    const std::string_view step_text = trim(parts[2]);
    if (!step_text.empty() && step_text.front() == 'x') {
        const double factor = parse_number(step_text.substr(1), field);
        if (!(start > 0.0)) throw UsageError(field, "geometric range needs start > 0");
        if (!(factor > 1.0)) throw UsageError(field, "geometric factor must exceed 1");
        const double n = std::floor(std::log(stop / start) / std::log(factor) + 1e-9);
        if (n + 1 > kMaxGridPoints) throw UsageError(field, "too many grid points");
        for (long i = 0; i <= static_cast<long>(n); ++i) out.push_back(start * std::pow(factor, double(i)));
        return out;
    }

    const double step = parse_number(step_text, field);
    if (!(step > 0.0)) throw UsageError(field, "range step must be positive");
    const double n = std::floor((stop - start) / step + 1e-9);
    if (n + 1 > kMaxGridPoints) throw UsageError(field, "too many grid points");
    for (long i = 0; i <= static_cast<long>(n); ++i) out.push_back(start + double(i) * step);
    return out;
}

void apply_setting(SweepConfig& cfg, std::string_view raw_key, std::string_view value)
{
    std::string key(trim(raw_key));
    std::replace(key.begin(), key.end(), '-', '_');

    if (key == "quantity") cfg.quantity = parse_quantity(value);
    else if (key == "method") cfg.method = parse_method(value);
    else if (key == "v") cfg.v = parse_grid(value, key);
    else if (key == "lambda") cfg.lambda = parse_grid(value, key);
    else if (key == "epsilon") cfg.epsilon = parse_grid(value, key);
    else if (key == "alpha") cfg.alpha = parse_grid(value, key);
    else if (key == "threshold_db") cfg.threshold_db = parse_grid(value, key);
    else if (key == "trials") cfg.trials = parse_count(value, key);
    else if (key == "seed") {
        const auto t = trim(value);
        std::uint64_t s = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
            throw UsageError(key, "expected an unsigned 64-bit integer");
        cfg.seed = s;
    }
    else if (key == "out") cfg.out = std::string(trim(value));
    else if (key == "rel_tol") cfg.rel_tol = parse_number(value, key);
    else if (key == "abs_tol") cfg.abs_tol = parse_number(value, key);
    else if (key == "workers") cfg.workers = static_cast<int>(parse_count(value, key));
    else throw UsageError(key, "unknown setting");
}

std::map<std::string, std::string> parse_config_text(std::string_view text)
{
    std::map<std::string, std::string> out;
    int lineno = 0;
    for (auto line : split(text, '\n')) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config", "line " + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw UsageError("config", "line " + std::to_string(lineno) + ": empty key");
        out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void SweepConfig::validate() const
{
    require_grid(v, "v");
    require_grid(lambda, "lambda");
    require_grid(epsilon, "epsilon");
    require_grid(alpha, "alpha");
    if (needs_threshold(quantity)) require_grid(threshold_db, "threshold_db");

    for (double x : v)
        if (x < 0.0) throw UsageError("v", "displacement must be non-negative");
    for (double x : lambda)
        if (!(x > 0.0)) throw UsageError("lambda", "density must be positive");
    for (double x : alpha)
        if (!(x > 2.0)) throw UsageError("alpha", "path-loss exponent must exceed 2");
    for (double x : epsilon) {
        if (x < 0.0) throw UsageError("epsilon", "must be non-negative");
        if (is_correlation(quantity) && x == 0.0)
            throw UsageError("epsilon", "interference moments need epsilon > 0");
    }
    if (quantity == Quantity::TemporalCorr && !(v.size() == 1 && v[0] == 0.0))
        throw UsageError("v", "temporal-corr is defined at v = 0 only");
    if (quantity == Quantity::AdhocCorr && runs_mc(method))
        throw UsageError("method", "adhoc-corr has no Monte Carlo estimator");
    if (runs_mc(method)) {
        if (trials == 0) throw UsageError("trials", "required when method includes mc");
        if (trials < min_trials(quantity))
            throw UsageError("trials", "at least " + std::to_string(min_trials(quantity)) + " for " +
                                           to_string(quantity));
    }
    if (!(rel_tol > 0.0) || rel_tol >= 1.0) throw UsageError("rel_tol", "must lie in (0, 1)");
    if (!(abs_tol > 0.0)) throw UsageError("abs_tol", "must be positive");
    if (workers < 0) throw UsageError("workers", "must be non-negative");
}

std::vector<SweepConfig> preset(std::string_view name)
{
    std::vector<double> v_grid;
    for (int i = 0; i <= 12; ++i) v_grid.push_back(0.25 * i);

    if (name == "fig3") {
        SweepConfig cellular;
        cellular.quantity = Quantity::Corr;
        cellular.v = v_grid;
        cellular.epsilon = {0.5, 1.0, 2.0};
        SweepConfig adhoc = cellular;
        adhoc.quantity = Quantity::AdhocCorr;
        return {cellular, adhoc};
    }
    if (name == "fig4") {
        SweepConfig c;
        c.quantity = Quantity::TemporalCorr;
        c.lambda.clear();
        for (int i = -12; i <= 12; ++i) c.lambda.push_back(std::pow(10.0, 0.25 * i));
        c.epsilon = {0.5, 1.0, 2.0};
        return {c};
    }
    if (name == "fig5") {
        SweepConfig c;
        c.quantity = Quantity::Jcp;
        c.method = Method::Both;
        c.v = v_grid;
        c.trials = 100'000;
        return {c};
    }
    if (name == "fig6") {
        SweepConfig skip;
        skip.quantity = Quantity::JcpSkip;
        skip.method = Method::Both;
        skip.v = v_grid;
        skip.trials = 100'000;
        SweepConfig conventional = skip;
        conventional.quantity = Quantity::Jcp;
        return {skip, conventional};
    }
    throw UsageError("preset", "unknown preset '" + std::string(name) + "' (fig3, fig4, fig5, fig6)");
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    const std::vector<GridPoint> pts = expand(cfg);
    const int per_point = (runs_analytic(cfg.method) ? 1 : 0) + (runs_mc(cfg.method) ? 1 : 0);
    std::vector<SweepRow> rows(pts.size() * per_point);

    const auto fill = [&](std::size_t i, int mc_workers) {
        std::size_t k = i * per_point;
        if (runs_analytic(cfg.method)) rows[k++] = analytic_row(cfg, pts[i]);
        if (runs_mc(cfg.method)) rows[k] = mc_row(cfg, pts[i], mc_workers);
    };

    const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
    const long n = static_cast<long>(pts.size());
    if (workers == 1 || n < workers) {
        for (long i = 0; i < n; ++i) fill(i, workers);
        return rows;
    }

    // Points are independent; each MC run is serial inside its worker.
    std::vector<std::string> errors(pts.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long i = 0; i < n; ++i) {
        try {
            fill(i, 1);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return rows;
}

const std::vector<std::string> kCsvColumns = {
    "quantity", "method", "v",     "lambda",        "epsilon",  "alpha",    "threshold_db",
    "value",    "ci_half_width", "err_est", "n_trials", "seed", "warning"};

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

void write_csv_header(std::ostream& os)
{
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
    os << "\r\n";
}

void write_csv_rows(std::ostream& os, const std::vector<SweepRow>& rows)
{
    const auto opt = [](const auto& o) -> std::string {
        if (!o) return "";
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(*o)>>) return format_double(*o);
        else return std::to_string(*o);
    };
    for (const SweepRow& r : rows) {
        os << to_string(r.quantity) << ',' << to_string(r.method) << ',' << format_double(r.v) << ','
           << format_double(r.lambda) << ',' << format_double(r.epsilon) << ',' << format_double(r.alpha)
           << ',' << opt(r.threshold_db) << ',' << format_double(r.value) << ',' << opt(r.ci_half_width)
           << ',' << opt(r.err_est) << ',' << opt(r.n_trials) << ',' << opt(r.seed) << ','
           << csv_field(r.warning) << "\r\n";
    }
}

std::string plot_script(const std::string& csv_path)
{
    std::string s;
    s += "# Plots the sweep in " + csv_path + " (needs pandas and matplotlib).\n";
    s += "import sys\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n";
    s += "df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else " + std::string("r\"") + csv_path + "\")\n";
    s += R"(for quantity, q in df.groupby("quantity"):
    x = "lambda" if quantity == "temporal-corr" else "v"
    fig, ax = plt.subplots()
    keys = ["epsilon", "lambda", "alpha", "threshold_db"]
    keys = [k for k in keys if k != x and q[k].nunique() > 1]
    for key, g in q.groupby(["method"] + keys, dropna=False):
        g = g.sort_values(x)
        label = ", ".join(str(k) for k in (key if isinstance(key, tuple) else (key,)))
        if g["method"].iloc[0] == "mc":
            ax.errorbar(g[x], g["value"], yerr=g["ci_half_width"], fmt="o", ms=3, label=label)
        else:
            ax.plot(g[x], g["value"], label=label)
    if x == "lambda":
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(quantity)
    ax.legend(fontsize="small")
    fig.savefig(f"{quantity}.png", dpi=150)
)";
    return s;
}

}  // namespace stcorr
