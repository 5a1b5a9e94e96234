#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cgldp/grid.hpp"
#include "cgldp/kernels.hpp"

namespace cgldp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// When a discrete RKHS norm is reported as +infinity (path outside the
/// space). Membership cannot be decided from finitely many samples, so this
/// is a diagnosed divergence rather than a proof.
struct DivergencePolicy {
    double norm_ceiling = 1e6;
    /// Also compare against the same path on the grid with M / 2 intervals and
    /// flag growth by more than max_refinement_ratio. Off by default: a kernel
    /// section k(., t_i) at an odd node is resolved only on the fine grid and
    /// legitimately doubles its norm there.
    bool refinement_check = false;
    double max_refinement_ratio = 1.5;
};

/// Factorized Gram matrix evaluating h^T K^{-1} h on a grid.
///
/// The Cholesky factor of K + jitter * I (jitter = 1e-10 * trace / (M + 1) by
/// default) is used as a preconditioner for a few steps of iterative
/// refinement against K itself, so well-posed norms are not biased by the
/// jitter. Rows of K that vanish identically (deterministic nodes such as
/// t = 0) decouple and keep w_i = h_i / jitter.
///
/// Immutable after construction; solve() may be called concurrently.
class QuadFormSolver {
public:
    QuadFormSolver(Eigen::MatrixXd gram, TimeGrid grid, std::optional<double> jitter = {},
                   DivergencePolicy policy = {});

    static QuadFormSolver for_model(const KernelModel& model, const TimeGrid& grid,
                                    DivergencePolicy policy = {});

    const TimeGrid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    double jitter() const noexcept { return jitter_; }
    const DivergencePolicy& policy() const noexcept { return policy_; }

    Eigen::VectorXd solve(std::span<const double> h) const;

    /// Raw discrete value h . solve(h), without divergence diagnosis.
    double quadratic_form(std::span<const double> h) const;

    /// Solver for the even nodes; present only with policy().refinement_check.
    const QuadFormSolver* coarse() const noexcept { return coarse_.get(); }

    static constexpr int kRefinementSteps = 3;

private:
    Eigen::MatrixXd gram_;
    TimeGrid grid_;
    double jitter_;
    DivergencePolicy policy_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    std::shared_ptr<const QuadFormSolver> coarse_;
};

/// Squared RKHS norm ||h||^2, or +infinity when the discrete value diverges.
double rkhs_norm_sq(const Path& h, const QuadFormSolver& solver);

/// Lambda*(x) = ||x||^2 / 2 for a centered Gaussian family with this kernel.
double cramer_transform(const Path& x, const QuadFormSolver& solver);

/// J(z | y1, y2) = ||(z - y2) / y1||^2 / 2 in the base kernel's space.
double j_rmv(const Path& z, const VariancePath& y1, const Path& y2,
             const QuadFormSolver& base_solver);

/// Freidlin-Wentzell action (1/2) int ((f' - a0 - a1 f) / y)^2 dt with forward
/// differences for f' and midpoint values of f and y. +infinity if f(0) != x.
double j_ou_fw(const Path& f, const DiffusionPath& y, double a0, double a1, double x);

/// The same rate as ||f - m||^2 / 2 in the RKHS of k^y. The solver must be
/// built from the OU kernel with the same (a1, y).
double j_ou_rkhs(const Path& f, const DiffusionPath& y, double a0, double a1, double x,
                 const QuadFormSolver& solver);

/// n -> k^n(s, t) for an n-indexed family of covariance functions.
using CovarianceFamily = std::function<double(int n, double s, double t)>;
using SpeedFunction = std::function<double(int n)>;

/// k^n = k / n, the scaling used by the simulator.
CovarianceFamily inverse_n_family(KernelModel base);

/// max over n in n_probe and grid pairs s != t of
///   gamma(n) |k^n(t,t) + k^n(s,s) - 2 k^n(s,t)| / |t - s|^{2 alpha}.
/// A finite value that is stable under refinement is evidence (not proof) of
/// exponential tightness at speed gamma.
double hoelder_tightness_bound(const CovarianceFamily& family, const SpeedFunction& speed,
                               double alpha, const TimeGrid& grid,
                               std::span<const int> n_probe);

}  // namespace cgldp
