#pragma once

#include <memory>
#include <variant>

#include <Eigen/Dense>

#include "cgldp/grid.hpp"

namespace cgldp {

class KernelModel;

/// k(s, t) = min(s, t), zero mean.
struct BrownianMotion {
    bool operator==(const BrownianMotion&) const = default;
};

/// Solution of dZ = (a0 + a1 Z) dt + y(t) dW, Z_0 = x.
///
/// y is piecewise constant on grid cells (see PositivePath::cell_value), so
/// the covariance integral is evaluated cell by cell in closed form.
struct OrnsteinUhlenbeck {
    double a0 = 0.0;
    double a1 = 0.0;
    double x = 0.0;
    DiffusionPath y;

    bool operator==(const OrnsteinUhlenbeck&) const = default;
};

/// k^{y1}(s, t) = y1(s) y1(t) k(s, t) for a base kernel k.
struct Scaled {
    VariancePath y1;
    std::shared_ptr<const KernelModel> base;

    bool operator==(const Scaled& o) const;
};

/// Covariance function plus mean function of one of the shipped Gaussian
/// families. Immutable; copies share the nested base of a Scaled model.
class KernelModel {
public:
    using Variant = std::variant<BrownianMotion, OrnsteinUhlenbeck, Scaled>;

    KernelModel(BrownianMotion b) : v_(b) {}
    KernelModel(OrnsteinUhlenbeck ou) : v_(std::move(ou)) {}
    KernelModel(Scaled s);

    static KernelModel brownian() { return KernelModel(BrownianMotion{}); }
    static KernelModel ornstein_uhlenbeck(double a0, double a1, double x, DiffusionPath y);
    static KernelModel scaled(VariancePath y1, KernelModel base);

    double cov(double s, double t) const;
    double mean(double t) const;

    const Variant& variant() const noexcept { return v_; }

    bool operator==(const KernelModel&) const = default;

private:
    Variant v_;
};

/// Threshold below which |a1| is treated as zero in the OU closed forms.
inline constexpr double kDriftSlopeEps = 1e-12;

/// cov(s, t) of the model. For OU with constant y this is
/// y^2 e^{a1(s+t)} (1 - e^{-2 a1 min(s,t)}) / (2 a1), and y^2 min(s,t) at a1 = 0.
double eval_base_kernel(const KernelModel& model, double s, double t);

double scaled_kernel(const VariancePath& y1, const KernelModel& base, double s, double t);

/// OU mean m(t) = e^{a1 t} (x + (a0/a1)(1 - e^{-a1 t})); x + a0 t when |a1| < 1e-12.
double ou_mean(double x, double a0, double a1, double t);

/// OU covariance for a constant diffusion value y.
double ou_constant_cov(double a1, double y, double s, double t);

/// (1 - e^{-2 a d}) / (2 a), continuous through a = 0.
double ou_variance_factor(double a, double d);

/// Gram matrix K_ij = cov(t_i, t_j) on the grid, exactly symmetric.
/// Throws NonPsd if the smallest eigenvalue is below -1e-10 * trace.
Eigen::MatrixXd gram_matrix(const KernelModel& model, const TimeGrid& grid);

/// True when min eigenvalue(K) >= -rel_tol * trace(K), tested through a
/// Cholesky factorization of the shifted matrix.
bool is_psd(const Eigen::MatrixXd& gram, double rel_tol = 1e-10);

}  // namespace cgldp
