#pragma once

// Reduced-scale self checks across all engines, for `stcorr validate`.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stcorr {

struct ValidateOptions {
    std::uint64_t seed = 20240917;
    /// Trials for each Monte Carlo comparison.
    long trials = 40'000;
    int workers = 0;
    /// Forwarded to the handoff coverage integral; only tests change it.
    double b1_sign = 1.0;
};

struct ValidationCheck {
    std::string name;
    std::string expected;
    std::string observed;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_passed() const;
    const ValidationCheck* find(const std::string& name) const;
};

ValidationReport run_validation(const ValidateOptions& opts = {});

/// One line per check; no timings, so a pinned seed gives identical bytes.
void write_report(std::ostream& os, const ValidationReport& report);

}  // namespace stcorr
