#include "cgldp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cgldp/error.hpp"

namespace cgldp {

namespace {

// Integral of e^{-2 a1 r} y^2(r) over [0, u] with y piecewise constant on the
// cells of its own grid.
double ou_cumulative(const OrnsteinUhlenbeck& ou, double u) {
    const TimeGrid& g = ou.y.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.intervals(); ++i) {
        const double lo = g.point(i);
        if (lo >= u) break;
        const double hi = std::min(g.point(i + 1), u);
        const double y = ou.y.cell_value(i);
        acc += y * y * std::exp(-2.0 * ou.a1 * lo) * ou_variance_factor(ou.a1, hi - lo);
    }
    return acc;
}

double ou_cov(const OrnsteinUhlenbeck& ou, double s, double t) {
    const double lo = std::min(s, t);
    if (ou.y.is_constant()) return ou_constant_cov(ou.a1, ou.y[0], s, t);
    return std::exp(ou.a1 * (s + t)) * ou_cumulative(ou, lo);
}

}  // namespace

bool Scaled::operator==(const Scaled& o) const {
    if (!(y1 == o.y1)) return false;
    if (base == o.base) return true;
    return base && o.base && *base == *o.base;
}

KernelModel::KernelModel(Scaled s) : v_(std::move(s)) {
    const auto& sc = std::get<Scaled>(v_);
    if (!sc.base) throw std::invalid_argument("Scaled kernel requires a base model");
}

KernelModel KernelModel::ornstein_uhlenbeck(double a0, double a1, double x, DiffusionPath y) {
    return KernelModel(OrnsteinUhlenbeck{a0, a1, x, std::move(y)});
}

KernelModel KernelModel::scaled(VariancePath y1, KernelModel base) {
    return KernelModel(Scaled{std::move(y1), std::make_shared<const KernelModel>(std::move(base))});
}

double KernelModel::cov(double s, double t) const {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BrownianMotion>) {
                return std::min(s, t);
            } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
                return ou_cov(m, s, t);
            } else {
                return scaled_kernel(m.y1, *m.base, s, t);
            }
        },
        v_);
}

double KernelModel::mean(double t) const {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BrownianMotion>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
                return ou_mean(m.x, m.a0, m.a1, t);
            } else {
                return m.y1.at(t) * m.base->mean(t);
            }
        },
        v_);
}

double eval_base_kernel(const KernelModel& model, double s, double t) { return model.cov(s, t); }

double scaled_kernel(const VariancePath& y1, const KernelModel& base, double s, double t) {
    return (y1.at(s) * y1.at(t)) * base.cov(s, t);
}

double ou_constant_cov(double a1, double y, double s, double t) {
    const double lo = std::min(s, t);
    if (std::abs(a1) < kDriftSlopeEps) return y * y * lo;
    return y * y * std::exp(a1 * (s + t)) * ou_variance_factor(a1, lo);
}

double ou_variance_factor(double a, double d) {
    if (std::abs(a) < kDriftSlopeEps) return d;
    return -std::expm1(-2.0 * a * d) / (2.0 * a);
}

double ou_mean(double x, double a0, double a1, double t) {
    if (std::abs(a1) < kDriftSlopeEps) return x + a0 * t;
    return std::exp(a1 * t) * x + a0 * std::expm1(a1 * t) / a1;
}

namespace {

Eigen::MatrixXd raw_gram(const KernelModel& model, const TimeGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd k(n, n);

    if (const auto* sc = std::get_if<Scaled>(&model.variant())) {
        k = raw_gram(*sc->base, grid);
        std::vector<double> y(grid.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = sc->y1.at(grid.point(i));
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) k(i, j) = (y[i] * y[j]) * k(i, j);
        return k;
    }

    const auto* ou = std::get_if<OrnsteinUhlenbeck>(&model.variant());
    if (ou && !ou->y.is_constant()) {
        std::vector<double> cum(grid.size());
        for (std::size_t i = 0; i < cum.size(); ++i) cum[i] = ou_cumulative(*ou, grid.point(i));
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i <= j; ++i)
                k(i, j) = k(j, i) =
                    std::exp(ou->a1 * (grid.point(i) + grid.point(j))) * cum[i];
        return k;
    }

    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            k(i, j) = k(j, i) = model.cov(grid.point(i), grid.point(j));
    return k;
}

}  // namespace

bool is_psd(const Eigen::MatrixXd& gram, double rel_tol) {
    const double trace = gram.trace();
    if (!(trace > 0.0)) return gram.isZero(0.0);
    Eigen::MatrixXd shifted = gram;
    shifted.diagonal().array() += rel_tol * trace;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    return llt.info() == Eigen::Success;
}

Eigen::MatrixXd gram_matrix(const KernelModel& model, const TimeGrid& grid) {
    Eigen::MatrixXd k = raw_gram(model, grid);
    if (!is_psd(k)) throw NonPsd("gram_matrix: kernel is not positive semidefinite on the grid");
    return k;
}

}  // namespace cgldp
