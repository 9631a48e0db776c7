// stcorr: sweeps, figure presets and self-validation from the command line.
//
//   stcorr sweep --quantity jcp --method both --v 0:3:0.25 --trials 1e5 --out jcp.csv
//   stcorr preset fig4 --out fig4.csv
//   stcorr validate

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stcorr/sweep.hpp"
#include "stcorr/validate.hpp"

namespace {

// Setting name -> flag value, for the flags shared by sweep and preset.
struct SweepFlags {
    std::map<std::string, std::string> values;
    std::string config;

    void add_to(CLI::App* app, bool with_grid_defaults)
    {
        const auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
            app->add_option(name, values[key], help);
        };
        flag("--quantity", "quantity", "corr, temporal-corr, adhoc-corr, jcp, jcp-skip or handoff");
        flag("--method", "method", "analytic, mc or both");
        flag("--v", "v", "displacement: x, a,b,c, start:stop:step or start:stop:xFACTOR");
        flag("--lambda", "lambda", "BS density grid");
        flag("--epsilon", "epsilon", "path-loss offset grid");
        flag("--alpha", "alpha", "path-loss exponent grid");
        flag("--threshold-db", "threshold_db", "SIR threshold grid in dB");
        flag("--trials", "trials", "Monte Carlo trials per point (accepts 1e6)");
        flag("--seed", "seed", "master seed");
        flag("--rel-tol", "rel_tol", "quadrature relative tolerance");
        flag("--abs-tol", "abs_tol", "quadrature absolute tolerance");
        flag("--workers", "workers", "worker threads (0: OpenMP default)");
        flag("--out", "out", "CSV path (default stdout); a .plot.py script is written next to it");
        if (with_grid_defaults)
            app->add_option("--config", config, "key=value file; flags override it")->check(CLI::ExistingFile);
    }

    void apply(CLI::App* app, stcorr::SweepConfig& cfg) const
    {
        if (!config.empty())
            for (const auto& [k, v] : stcorr::read_config_file(config)) stcorr::apply_setting(cfg, k, v);
        for (const auto& [k, v] : values) {
            std::string flag = "--" + k;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (app->count(flag) > 0) stcorr::apply_setting(cfg, k, v);
        }
    }
};

int emit(const std::vector<stcorr::SweepConfig>& configs)
{
    std::vector<stcorr::SweepRow> rows;
    for (const auto& cfg : configs) {
        auto part = stcorr::run_sweep(cfg);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    const std::string& out = configs.front().out;
    if (out.empty() || out == "-") {
        stcorr::write_csv_header(std::cout);
        stcorr::write_csv_rows(std::cout, rows);
        return 0;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw stcorr::UsageError("out", "cannot write '" + out + "'");
    stcorr::write_csv_header(f);
    stcorr::write_csv_rows(f, rows);
    std::ofstream(out + ".plot.py") << stcorr::plot_script(out);

    int warned = 0;
    for (const auto& r : rows) warned += r.warning.empty() ? 0 : 1;
    std::cerr << rows.size() << " rows -> " << out;
    if (warned) std::cerr << " (" << warned << " with warnings)";
    std::cerr << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interference correlation and joint coverage in Poisson cellular networks"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write CSV");
    SweepFlags sweep_flags;
    sweep_flags.add_to(sweep, true);

    auto* pre = app.add_subcommand("preset", "reproduce a figure sweep (fig3, fig4, fig5, fig6)");
    std::string preset_name;
    pre->add_option("name", preset_name, "preset name")->required()->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6"}));
    SweepFlags preset_flags;
    preset_flags.add_to(pre, false);

    auto* val = app.add_subcommand("validate", "run the reduced-scale self checks");
    stcorr::ValidateOptions vopts;
    double val_trials = static_cast<double>(vopts.trials);
    val->add_option("--seed", vopts.seed, "master seed");
    val->add_option("--trials", val_trials, "trials per Monte Carlo check")->check(CLI::Range(1e3, 1e9));
    val->add_option("--workers", vopts.workers, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            stcorr::SweepConfig cfg;
            sweep_flags.apply(sweep, cfg);
            return emit({cfg});
        }
        if (*pre) {
            auto configs = stcorr::preset(preset_name);
            for (auto& cfg : configs) preset_flags.apply(pre, cfg);
            return emit(configs);
        }
        vopts.trials = static_cast<long>(val_trials);
        const auto report = stcorr::run_validation(vopts);
        stcorr::write_report(std::cout, report);
        return report.all_passed() ? 0 : 1;
    } catch (const stcorr::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
