#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cgldp/grid.hpp"
#include "cgldp/kernels.hpp"
#include "cgldp/priors.hpp"
#include "cgldp/random.hpp"

namespace cgldp {

struct PathSample {
    Path z;
    std::vector<double> y;  ///< conditioning draw(s): {y1, y2} or {y}
    int n = 1;
    StreamSeeds seeds;
};

/// Exact zero-mean Gaussian sampling on a grid through a factor F with
/// F F^T = K (LDLT with pivoting, so singular Grams are fine).
class GaussianSampler {
public:
    GaussianSampler(const Eigen::MatrixXd& gram, TimeGrid grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    /// Dense F with F F^T = K.
    Eigen::MatrixXd factor() const;

    void sample_into(Rng& rng, std::span<double> out) const;

    /// One path per column of out (rows = grid size). Consumes the same
    /// normals as out.cols() calls of sample_into, in the same order, but
    /// runs as one triangular matrix product.
    void sample_block(Rng& rng, Eigen::MatrixXd& out) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd lower_;  // L sqrt(D) of the pivoted LDLT
    Eigen::Transpositions<Eigen::Dynamic> perm_;
};

Path sample_gaussian_path(const GaussianSampler& sampler, Rng& rng);

/// Draws Z^n paths of one family at fixed n.
///
/// Random mean/variance family: z = y1 X / sqrt(n) + y2 with X centered with
/// the base covariance (the base mean is ignored). OU family:
/// dZ = (a0 + a1 Z) dt + y / sqrt(n) dW, Z_0 = x.
///
/// Brownian and OU bases use their exact Gaussian-Markov transition, so there
/// is no time-discretization bias; other bases fall back to a dense factor.
/// The conditioning value is drawn from Streams::prior before any noise is
/// drawn from Streams::noise.
class PathSimulator {
public:
    static PathSimulator rmv(const KernelModel& base, PriorModel y1, PriorModel y2,
                             const TimeGrid& grid, int n);
    static PathSimulator ou(double a0, double a1, double x, PriorModel y, const TimeGrid& grid,
                            int n);

    const TimeGrid& grid() const noexcept { return grid_; }
    int n() const noexcept { return n_; }
    std::size_t conditioning_dims() const noexcept { return is_ou_ ? 1 : 2; }

    /// Allocation-free draw; z has grid().size() entries, y has
    /// conditioning_dims() entries.
    void sample_into(Streams& streams, std::span<double> z, std::span<double> y) const;

    PathSample sample(Streams& streams) const;

private:
    PathSimulator(TimeGrid grid, int n) : grid_(grid), n_(n) {}

    TimeGrid grid_;
    int n_;
    bool is_ou_ = false;
    std::vector<PriorModel> priors_;
    // Per-cell transition X_{i+1} = decay_i X_i + drift_i + noise_i * xi_i for
    // unit conditioning amplitude and n = 1.
    std::vector<double> decay_;
    std::vector<double> drift_;
    std::vector<double> noise_;
    double start_ = 0.0;
    std::optional<GaussianSampler> dense_;
};

PathSample sample_rmv_path(int n, const PriorModel& y1, const PriorModel& y2,
                           const KernelModel& base, const TimeGrid& grid, Streams& streams);

PathSample sample_ou_path(int n, const PriorModel& prior, double a0, double a1, double x,
                          const TimeGrid& grid, Streams& streams);

}  // namespace cgldp
