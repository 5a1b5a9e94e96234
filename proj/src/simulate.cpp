#include "cgldp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgldp {

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& gram, TimeGrid grid) : grid_(grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (gram.rows() != n || gram.cols() != n)
        throw std::invalid_argument("GaussianSampler: Gram size does not match the grid");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    lower_ = Eigen::MatrixXd(ldlt.matrixL()) * d.asDiagonal();
    perm_ = ldlt.transpositionsP();
}

Eigen::MatrixXd GaussianSampler::factor() const {
    return perm_.transpose() * lower_.triangularView<Eigen::Lower>().toDenseMatrix();
}

void GaussianSampler::sample_into(Rng& rng, std::span<double> out) const {
    Eigen::VectorXd xi(lower_.cols());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = standard_normal(rng);
    xi = lower_.triangularView<Eigen::Lower>() * xi;
    Eigen::Map<Eigen::VectorXd>(out.data(), lower_.rows()) = perm_.transpose() * xi;
}

void GaussianSampler::sample_block(Rng& rng, Eigen::MatrixXd& out) const {
    if (out.rows() != lower_.rows())
        throw std::invalid_argument("GaussianSampler::sample_block: row count does not match the grid");
    Eigen::MatrixXd xi(out.rows(), out.cols());
    for (Eigen::Index j = 0; j < xi.cols(); ++j)
        for (Eigen::Index i = 0; i < xi.rows(); ++i) xi(i, j) = standard_normal(rng);
    xi = lower_.triangularView<Eigen::Lower>() * xi;
    out = perm_.transpose() * xi;
}

Path sample_gaussian_path(const GaussianSampler& sampler, Rng& rng) {
    std::vector<double> v(sampler.grid().size());
    sampler.sample_into(rng, v);
    return Path(sampler.grid(), std::move(v));
}

namespace {

// Stationary-increment coefficients of the OU transition over a cell of width h.
double ou_decay(double a1, double h) { return std::exp(a1 * h); }

double ou_unit_noise_sd(double a1, double h) {
    return std::sqrt(std::exp(2.0 * a1 * h) * ou_variance_factor(a1, h));
}

}  // namespace

PathSimulator PathSimulator::rmv(const KernelModel& base, PriorModel y1, PriorModel y2,
                                 const TimeGrid& grid, int n) {
    if (n < 1) throw std::invalid_argument("PathSimulator: n must be >= 1");
    PathSimulator sim(grid, n);
    sim.priors_ = {std::move(y1), std::move(y2)};
    const std::size_t cells = grid.intervals();
    const double h = grid.step();

    if (std::holds_alternative<BrownianMotion>(base.variant())) {
        sim.decay_.assign(cells, 1.0);
        sim.drift_.assign(cells, 0.0);
        sim.noise_.assign(cells, std::sqrt(h));
    } else if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&base.variant())) {
        const double decay = ou_decay(ou->a1, h);
        sim.decay_.assign(cells, decay);
        sim.drift_.assign(cells, 0.0);
        sim.noise_.resize(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            if (ou->y.is_constant()) {
                sim.noise_[i] = ou->y[0] * ou_unit_noise_sd(ou->a1, h);
            } else {
                const double t0 = grid.point(i), t1 = grid.point(i + 1);
                const double v = base.cov(t1, t1) - decay * decay * base.cov(t0, t0);
                sim.noise_[i] = std::sqrt(std::max(v, 0.0));
            }
        }
    } else {
        sim.dense_.emplace(gram_matrix(base, grid), grid);
    }
    return sim;
}

PathSimulator PathSimulator::ou(double a0, double a1, double x, PriorModel y, const TimeGrid& grid,
                                int n) {
    if (n < 1) throw std::invalid_argument("PathSimulator: n must be >= 1");
    PathSimulator sim(grid, n);
    sim.is_ou_ = true;
    sim.priors_ = {std::move(y)};
    const std::size_t cells = grid.intervals();
    const double h = grid.step();
    const double drift = std::abs(a1) < kDriftSlopeEps ? a0 * h : a0 * std::expm1(a1 * h) / a1;
    sim.decay_.assign(cells, ou_decay(a1, h));
    sim.drift_.assign(cells, drift);
    sim.noise_.assign(cells, ou_unit_noise_sd(a1, h));
    sim.start_ = x;
    return sim;
}

void PathSimulator::sample_into(Streams& streams, std::span<double> z, std::span<double> y) const {
    const std::size_t np = grid_.size();
    if (z.size() != np || y.size() != conditioning_dims())
        throw std::invalid_argument("PathSimulator::sample_into: buffer sizes");

    for (std::size_t k = 0; k < priors_.size(); ++k) y[k] = sample_y(priors_[k], n_, streams.prior);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_));
    if (is_ou_) {
        const double amp = y[0] * inv_sqrt_n;
        double v = start_;
        z[0] = v;
        for (std::size_t i = 0; i + 1 < np; ++i) {
            v = decay_[i] * v + drift_[i] + amp * noise_[i] * standard_normal(streams.noise);
            z[i + 1] = v;
        }
        return;
    }

    const double scale = y[0] * inv_sqrt_n;
    const double shift = y[1];
    if (dense_) {
        dense_->sample_into(streams.noise, z);
        for (double& v : z) v = scale * v + shift;
        return;
    }
    double x = 0.0;
    z[0] = shift;
    for (std::size_t i = 0; i + 1 < np; ++i) {
        x = decay_[i] * x + noise_[i] * standard_normal(streams.noise);
        z[i + 1] = scale * x + shift;
    }
}

PathSample PathSimulator::sample(Streams& streams) const {
    std::vector<double> z(grid_.size());
    std::vector<double> y(conditioning_dims());
    sample_into(streams, z, y);
    return PathSample{Path(grid_, std::move(z)), std::move(y), n_, streams.seeds};
}

PathSample sample_rmv_path(int n, const PriorModel& y1, const PriorModel& y2,
                           const KernelModel& base, const TimeGrid& grid, Streams& streams) {
    return PathSimulator::rmv(base, y1, y2, grid, n).sample(streams);
}

PathSample sample_ou_path(int n, const PriorModel& prior, double a0, double a1, double x,
                          const TimeGrid& grid, Streams& streams) {
    return PathSimulator::ou(a0, a1, x, prior, grid, n).sample(streams);
}

}  // namespace cgldp
