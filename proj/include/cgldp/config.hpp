#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgldp/crossing.hpp"

namespace cgldp {

/// Barrier phi: a named built-in or a table of equally spaced samples on
/// [0, 1] that is resampled linearly onto the grid.
struct BarrierSpec {
    enum class Kind { Zero, Linear, Table };
    Kind kind = Kind::Zero;
    double slope = 0.0;
    std::vector<double> values;

    bool operator==(const BarrierSpec&) const = default;
};

/// Base kernel of the random mean/variance family.
struct KernelSpec {
    enum class Kind { Brownian, OrnsteinUhlenbeck };
    Kind kind = Kind::Brownian;
    double a1 = 0.0;
    double y = 1.0;

    bool operator==(const KernelSpec&) const = default;
};

struct PriorSpec {
    PriorModel::Law law = Degenerate{1.0};

    bool operator==(const PriorSpec&) const = default;
};

struct SearchSpec {
    int t_grid_refine = 0;
    int y_scan_points = 64;
    double tol = 1e-9;

    bool operator==(const SearchSpec&) const = default;
};

struct McSpec {
    std::vector<int> n_ladder;
    std::uint64_t paths = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t batch_size = 1u << 14;

    bool operator==(const McSpec&) const = default;
};

/// Settings that change how a run executes but never what it produces.
/// Excluded from the digest.
struct RuntimeSpec {
    unsigned threads = 1;
    std::string out_dir = "out";

    bool operator==(const RuntimeSpec&) const = default;
};

struct ExperimentConfig {
    enum class Family { RandomMeanVariance, OrnsteinUhlenbeck };
    Family family = Family::RandomMeanVariance;
    std::size_t grid_M = 256;
    double level = 1.0;
    double alpha = kDefaultAlpha;
    BarrierSpec barrier;

    // Random mean/variance family.
    KernelSpec kernel;
    PriorSpec y1{Degenerate{1.0}};
    PriorSpec y2{Degenerate{0.0}};

    // OU family.
    double a0 = 0.0;
    double a1 = 0.0;
    double x = 0.0;
    PriorSpec y{Degenerate{1.0}};

    SearchSpec search;
    std::optional<McSpec> mc;
    RuntimeSpec runtime;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a JSON document. Unknown keys, wrong types and out of
/// range values raise ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Canonical JSON text: every field present, keys sorted, two-space indent.
/// parse_config(to_canonical_json(c)) == c.
std::string to_canonical_json(const ExperimentConfig& config);

/// SHA-256 (hex) of the canonical text with the runtime section removed.
std::string config_digest(const ExperimentConfig& config);

/// Re-checks every numeric constraint; throws ConfigError.
void validate(const ExperimentConfig& config);

Path build_barrier(const ExperimentConfig& config);
CrossingProblem build_problem(const ExperimentConfig& config);
SearchSettings build_search(const ExperimentConfig& config);

}  // namespace cgldp
