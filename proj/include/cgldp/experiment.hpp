#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cgldp/config.hpp"

namespace cgldp {

std::string library_version();

struct RateRun {
    RateResult result;
    std::string digest;
};

/// Minimizes the crossing rate and writes rate.txt and profile.csv into out_dir.
RateRun run_rate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct ValidateRun {
    SlopeReport slope;
    double theory_rate = 0.0;
    double relative_gap = 0.0;
    std::string digest;
};

/// Runs the Monte Carlo ladder of config.mc, fits the decay rate and writes
/// mc.csv, slope.txt and series.csv into out_dir. Throws ConfigError if the
/// config has no mc section.
ValidateRun run_validate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Invariant checks on built-in problems; one PASS/FAIL line per check on
/// out. Returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace cgldp
