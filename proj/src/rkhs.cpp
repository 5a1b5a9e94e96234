#include "cgldp/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cgldp/error.hpp"

namespace cgldp {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> h) {
    return {h.data(), static_cast<Eigen::Index>(h.size())};
}

}  // namespace

QuadFormSolver::QuadFormSolver(Eigen::MatrixXd gram, TimeGrid grid, std::optional<double> jitter,
                               DivergencePolicy policy)
    : gram_(std::move(gram)), grid_(grid), policy_(policy) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (gram_.rows() != n || gram_.cols() != n)
        throw GridMismatch("QuadFormSolver: Gram size does not match the grid");

    jitter_ = jitter.value_or(1e-10 * gram_.trace() / static_cast<double>(n));
    if (!(jitter_ > 0.0)) jitter_ = std::numeric_limits<double>::min();

    Eigen::MatrixXd shifted = gram_;
    shifted.diagonal().array() += jitter_;
    llt_.compute(shifted);
    if (llt_.info() != Eigen::Success)
        throw NonPsd("QuadFormSolver: jittered Gram matrix is not positive definite");

    if (policy_.refinement_check && grid_.intervals() >= 4) {
        const TimeGrid cg = grid_.coarsened();
        const auto cn = static_cast<Eigen::Index>(cg.size());
        Eigen::MatrixXd coarse_gram(cn, cn);
        for (Eigen::Index j = 0; j < cn; ++j)
            for (Eigen::Index i = 0; i < cn; ++i) coarse_gram(i, j) = gram_(2 * i, 2 * j);
        DivergencePolicy cp = policy_;
        cp.refinement_check = false;
        coarse_ = std::make_shared<const QuadFormSolver>(std::move(coarse_gram), cg, std::nullopt, cp);
    }
}

QuadFormSolver QuadFormSolver::for_model(const KernelModel& model, const TimeGrid& grid,
                                         DivergencePolicy policy) {
    return QuadFormSolver(gram_matrix(model, grid), grid, std::nullopt, policy);
}

Eigen::VectorXd QuadFormSolver::solve(std::span<const double> h) const {
    if (h.size() != grid_.size()) throw GridMismatch("QuadFormSolver::solve: wrong path length");
    const auto hv = as_vector(h);
    Eigen::VectorXd w = llt_.solve(hv);
    for (int step = 0; step < kRefinementSteps; ++step) {
        const Eigen::VectorXd r = hv - gram_ * w;
        w += llt_.solve(r);
    }
    // Identically-zero rows would otherwise accumulate h_i / jitter per step.
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (gram_(i, i) == 0.0) w(i) = hv(i) / jitter_;
    return w;
}

double QuadFormSolver::quadratic_form(std::span<const double> h) const {
    return as_vector(h).dot(solve(h));
}

double rkhs_norm_sq(const Path& h, const QuadFormSolver& solver) {
    require_same_grid(h.grid(), solver.grid(), "rkhs_norm_sq");
    const DivergencePolicy& pol = solver.policy();
    const double q = std::max(0.0, solver.quadratic_form(h.values()));
    if (!(q <= pol.norm_ceiling)) return kInfinity;
    if (const QuadFormSolver* coarse = solver.coarse()) {
        const Path hc = h.restricted_to_coarse();
        const double qc = std::max(0.0, coarse->quadratic_form(hc.values()));
        if (q > pol.max_refinement_ratio * qc && q > 1e-300) return kInfinity;
    }
    return q;
}

double cramer_transform(const Path& x, const QuadFormSolver& solver) {
    return 0.5 * rkhs_norm_sq(x, solver);
}

double j_rmv(const Path& z, const VariancePath& y1, const Path& y2,
             const QuadFormSolver& base_solver) {
    require_same_grid(z.grid(), base_solver.grid(), "j_rmv(z)");
    require_same_grid(y1.grid(), base_solver.grid(), "j_rmv(y1)");
    require_same_grid(y2.grid(), base_solver.grid(), "j_rmv(y2)");
    std::vector<double> h(z.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = (z[i] - y2[i]) / y1[i];
    return cramer_transform(Path(z.grid(), std::move(h)), base_solver);
}

double j_ou_fw(const Path& f, const DiffusionPath& y, double a0, double a1, double x) {
    require_same_grid(f.grid(), y.grid(), "j_ou_fw");
    if (std::abs(f[0] - x) > 1e-12) return kInfinity;
    const TimeGrid& g = f.grid();
    const double m = static_cast<double>(g.intervals());
    const double h = g.step();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.intervals(); ++i) {
        const double slope = (f[i + 1] - f[i]) * m;
        const double mid = 0.5 * (f[i] + f[i + 1]);
        const double r = (slope - (a0 + a1 * mid)) / y.cell_value(i);
        acc += r * r;
    }
    return 0.5 * acc * h;
}

double j_ou_rkhs(const Path& f, const DiffusionPath& y, double a0, double a1, double x,
                 const QuadFormSolver& solver) {
    require_same_grid(f.grid(), solver.grid(), "j_ou_rkhs(f)");
    require_same_grid(y.grid(), solver.grid(), "j_ou_rkhs(y)");

    // The terminal variance pins (a1, y) cheaply.
    const KernelModel expected = KernelModel::ornstein_uhlenbeck(a0, a1, x, y);
    const auto last = static_cast<Eigen::Index>(solver.grid().intervals());
    const double want = expected.cov(1.0, 1.0);
    if (std::abs(solver.gram()(last, last) - want) > 1e-12 * std::max(1.0, std::abs(want)))
        throw std::invalid_argument("j_ou_rkhs: solver was not built from this OU kernel");

    const TimeGrid& g = f.grid();
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = f[i] - ou_mean(x, a0, a1, g.point(i));
    return cramer_transform(Path(g, std::move(d)), solver);
}

CovarianceFamily inverse_n_family(KernelModel base) {
    return [base = std::move(base)](int n, double s, double t) {
        return base.cov(s, t) / static_cast<double>(n);
    };
}

double hoelder_tightness_bound(const CovarianceFamily& family, const SpeedFunction& speed,
                               double alpha, const TimeGrid& grid,
                               std::span<const int> n_probe) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("hoelder_tightness_bound: alpha must lie in (0, 1]");
    const std::size_t np = grid.size();
    std::vector<double> diag(np);
    double best = 0.0;
    for (int n : n_probe) {
        const double g = speed(n);
        for (std::size_t i = 0; i < np; ++i) diag[i] = family(n, grid.point(i), grid.point(i));
        for (std::size_t j = 1; j < np; ++j) {
            const double t = grid.point(j);
            for (std::size_t i = 0; i < j; ++i) {
                const double s = grid.point(i);
                const double incr = std::abs(diag[j] + diag[i] - 2.0 * family(n, s, t));
                best = std::max(best, g * incr / std::pow(t - s, 2.0 * alpha));
            }
        }
    }
    return best;
}

}  // namespace cgldp
