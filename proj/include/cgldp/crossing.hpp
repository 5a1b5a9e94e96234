#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cgldp/grid.hpp"
#include "cgldp/kernels.hpp"
#include "cgldp/priors.hpp"
#include "cgldp/rkhs.hpp"
#include "cgldp/simulate.hpp"

namespace cgldp {

/// Z^n = y1 X / sqrt(n) + y2 with independent scalar priors on y1 (variance
/// slot) and y2 (mean slot); I_Y(y1, y2) = I_{Y1}(y1) + I_{Y2}(y2).
struct RandomMeanVariance {
    KernelModel base;
    PriorModel y1;
    PriorModel y2;
};

/// dZ = (a0 + a1 Z) dt + y / sqrt(n) dW, Z_0 = x, with a scalar prior on y.
struct RandomDiffusionOU {
    double a0 = 0.0;
    double a1 = 0.0;
    double x = 0.0;
    PriorModel y;
};

/// p_n = P(sup_t (Z^n_t - phi(t)) > c) for a barrier phi sampled on a grid.
class CrossingProblem {
public:
    using Family = std::variant<RandomMeanVariance, RandomDiffusionOU>;

    CrossingProblem(Family family, Path barrier, double level = 1.0);

    const Family& family() const noexcept { return family_; }
    const Path& barrier() const noexcept { return barrier_; }
    const TimeGrid& grid() const noexcept { return barrier_.grid(); }
    double level() const noexcept { return level_; }
    bool is_ou() const noexcept { return std::holds_alternative<RandomDiffusionOU>(family_); }

    /// 2 for the random mean/variance family ({y1, y2}), 1 for OU ({y}).
    std::size_t conditioning_dims() const noexcept { return is_ou() ? 1 : 2; }
    std::vector<const PriorModel*> priors() const;

    /// c + phi(t).
    double crossing_level(double t) const noexcept { return level_ + barrier_.at(t); }

    /// Conditional mean of Z at time t given y: y2 or m(t).
    double conditional_mean(double t, std::span<const double> y) const;
    /// Conditional variance at speed normalization: y1^2 k(t,t) or k^y(t,t).
    double conditional_variance(double t, std::span<const double> y) const;

private:
    Family family_;
    Path barrier_;
    double level_;
};

/// I_Y(y) summed over coordinates.
double prior_rate(const CrossingProblem& problem, std::span<const double> y);

/// I_Y(y1, y2) + (c + phi(t) - y2)^2 / (2 y1^2 k(t,t)).
///
/// Where k(t,t) = 0 the crossing term is 0 if the conditional mean already
/// sits at or above the level, +infinity otherwise.
double pointwise_rate_rmv(double t, double y1, double y2, const CrossingProblem& problem);

/// I_Y(y) + (c + phi(t) - m(t))^2 / (2 k^y(t,t)), same convention at k = 0.
double pointwise_rate_ou(double t, double y, const CrossingProblem& problem);

double pointwise_rate(const CrossingProblem& problem, double t, std::span<const double> y);

/// Multiplier beta of the optimal measure beta * delta_t. Throws
/// DegenerateTime when the conditional variance vanishes at t.
double lagrange_beta(double t, const CrossingProblem& problem, std::span<const double> y);

struct SearchSettings {
    /// The t pre-scan runs on a grid with M * 2^t_grid_refine intervals.
    int t_grid_refine = 0;
    int y_scan_points = 64;
    /// Golden-section and scan results disagreeing by more than this trigger
    /// a local restart around the scan argmin.
    double value_tol = 1e-9;
    double fallback_tol = 1e-6;
    /// Golden-section stops when the bracket is narrower than arg_tol * scale.
    double arg_tol = 1e-11;
    /// Per-coordinate overrides of the finite-rate bracket.
    std::vector<std::optional<Bracket>> y_brackets;
    bool with_profile = true;

    bool operator==(const SearchSettings&) const = default;
};

struct RateResult {
    double rate = 0.0;
    double t_star = 0.0;
    std::vector<double> y_star;
    /// min over y of the pointwise rate at every grid node.
    std::vector<double> profile_t;
    std::vector<double> profile_rate;
};

/// inf_y inf_t pointwise_rate(t, y): grid scan plus golden-section in t,
/// nested with scan-guarded golden-section over each non-degenerate y
/// coordinate. Throws NoFiniteRate if nothing finite is found.
RateResult minimize_rate(const CrossingProblem& problem, const SearchSettings& search = {});

/// Independent check of the closed forms: minimizes the discrete RKHS
/// quadratic form over grid paths w with w(t_j) = c + phi(t_j) by solving the
/// KKT system of the precision matrix directly.
class BruteForceOracle {
public:
    BruteForceOracle(const CrossingProblem& problem, std::size_t t_intervals);

    const TimeGrid& grid() const noexcept { return grid_; }

    /// I_Y(y) + min { J(w | y) : w(t_j) = c + phi(t_j) } on the oracle grid.
    double value(std::size_t j, std::span<const double> y) const;

    /// Constrained minimum of h^T K^{-1} h / 2 subject to h_j = b.
    double constrained_min(const Eigen::MatrixXd& precision, std::size_t j_active, double b) const;

private:
    CrossingProblem problem_;
    TimeGrid grid_;
    std::vector<std::size_t> active_;        // nodes with positive variance
    std::vector<long> position_;             // grid index -> row in active set
    Eigen::MatrixXd precision_;              // inverse of K on active nodes (unit y)
    std::vector<double> mean_;               // m(t_j) for OU
};

struct BruteForceSettings {
    std::size_t t_intervals = 32;  ///< power of two, at most 64
    int y_points = 33;             ///< per non-degenerate coordinate, at most 64
};

struct BruteForceResult {
    double rate = kInfinity;
    double t = 0.0;
    std::vector<double> y;
};

BruteForceResult brute_force_rate(const CrossingProblem& problem,
                                  const BruteForceSettings& settings = {});

struct MCEstimate {
    int n = 1;
    double p_hat = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t paths = 0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const MCEstimate&) const = default;
};

struct McSettings {
    /// Paths per independently seeded batch. Results depend on this, never
    /// on the thread count.
    std::uint64_t batch_size = 1u << 14;
    unsigned threads = 1;
};

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t paths);

/// Crude Monte Carlo estimate of p_n with crossings detected at grid nodes.
MCEstimate mc_crossing_probability(const CrossingProblem& problem, int n, std::uint64_t paths,
                                   std::uint64_t master_seed, const McSettings& mc = {});

struct SlopeReport {
    double rate_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<MCEstimate> per_n;
};

inline constexpr std::uint64_t kMinHitsPerRung = 50;

/// Least-squares fit of log p_n + (1/2) log n = const - I n over given rungs.
SlopeReport fit_ldp_slope(std::vector<MCEstimate> per_n);

/// Fits log p_n + (1/2) log n = const - I n by least squares over the ladder.
SlopeReport ldp_slope_check(const CrossingProblem& problem, std::span<const int> n_ladder,
                            std::uint64_t paths, std::uint64_t master_seed,
                            const McSettings& mc = {});

}  // namespace cgldp
