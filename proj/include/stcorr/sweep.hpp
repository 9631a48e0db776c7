#pragma once

// Parameter sweeps over the analytic and Monte Carlo engines, written as CSV.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stcorr {

enum class Quantity { Corr, TemporalCorr, AdhocCorr, Jcp, JcpSkip, Handoff };
enum class Method { Analytic, Mc, Both };

const char* to_string(Quantity q);
const char* to_string(Method m);
Quantity parse_quantity(std::string_view s);
Method parse_method(std::string_view s);

/// Invalid configuration; `field()` names the offending setting.
class UsageError : public std::invalid_argument {
public:
    UsageError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct SweepConfig {
    Quantity quantity = Quantity::Jcp;
    Method method = Method::Analytic;
    std::vector<double> v{0.0};
    std::vector<double> lambda{1.0};
    std::vector<double> epsilon{0.0};
    std::vector<double> alpha{4.0};
    std::vector<double> threshold_db{0.0};
    long trials = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string out{};
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    /// Worker threads; 0 uses the OpenMP default.
    int workers = 0;

    /// Throws UsageError.
    void validate() const;
};

/// "x", "a,b,c", "start:stop:step" or "start:stop:xF" (geometric, factor F).
std::vector<double> parse_grid(std::string_view text, const std::string& field);

/// Applies one setting by name (the long flag names without dashes, plus
/// "quantity", "method", "threshold_db", "rel_tol", "workers").
void apply_setting(SweepConfig& cfg, std::string_view key, std::string_view value);

/// Flat key=value lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Figure presets: fig3, fig4, fig5, fig6.
std::vector<SweepConfig> preset(std::string_view name);

struct SweepRow {
    Quantity quantity = Quantity::Jcp;
    Method method = Method::Analytic;  ///< Analytic or Mc, never Both
    double v = 0.0;
    double lambda = 1.0;
    double epsilon = 0.0;
    double alpha = 4.0;
    std::optional<double> threshold_db{};
    double value = 0.0;
    std::optional<double> ci_half_width{};
    std::optional<double> err_est{};
    std::optional<long> n_trials{};
    std::optional<std::uint64_t> seed{};
    std::string warning{};
};

std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

extern const std::vector<std::string> kCsvColumns;

/// Shortest round-trip decimal form.
std::string format_double(double x);
void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const std::vector<SweepRow>& rows);

/// Python/matplotlib script that plots a sweep CSV, one figure per quantity.
std::string plot_script(const std::string& csv_path);

}  // namespace stcorr
