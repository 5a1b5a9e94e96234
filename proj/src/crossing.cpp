#include "cgldp/crossing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cgldp/error.hpp"

namespace cgldp {

CrossingProblem::CrossingProblem(Family family, Path barrier, double level)
    : family_(std::move(family)), barrier_(std::move(barrier)), level_(level) {
    if (!std::isfinite(level_)) throw std::invalid_argument("CrossingProblem: level must be finite");
    if (const auto* f = std::get_if<RandomMeanVariance>(&family_)) {
        if (f->y1.slot() != Slot::Variance || f->y2.slot() != Slot::Mean)
            throw std::invalid_argument("CrossingProblem: priors must feed the variance and mean slots");
    } else {
        const auto& ou = std::get<RandomDiffusionOU>(family_);
        if (ou.y.slot() != Slot::Diffusion)
            throw std::invalid_argument("CrossingProblem: OU prior must feed the diffusion slot");
        if (!(std::isfinite(ou.a0) && std::isfinite(ou.a1) && std::isfinite(ou.x)))
            throw std::invalid_argument("CrossingProblem: OU parameters must be finite");
    }
}

std::vector<const PriorModel*> CrossingProblem::priors() const {
    if (const auto* f = std::get_if<RandomMeanVariance>(&family_)) return {&f->y1, &f->y2};
    return {&std::get<RandomDiffusionOU>(family_).y};
}

double CrossingProblem::conditional_mean(double t, std::span<const double> y) const {
    if (const auto* ou = std::get_if<RandomDiffusionOU>(&family_)) return ou_mean(ou->x, ou->a0, ou->a1, t);
    return y[1];
}

double CrossingProblem::conditional_variance(double t, std::span<const double> y) const {
    if (const auto* ou = std::get_if<RandomDiffusionOU>(&family_))
        return ou_constant_cov(ou->a1, y[0], t, t);
    const auto& f = std::get<RandomMeanVariance>(family_);
    return y[0] * y[0] * f.base.cov(t, t);
}

double prior_rate(const CrossingProblem& problem, std::span<const double> y) {
    const auto priors = problem.priors();
    if (y.size() != priors.size()) throw std::invalid_argument("prior_rate: wrong number of coordinates");
    double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) acc += rate_I_Y(*priors[k], y[k]);
    return acc;
}

namespace {

// (c + phi(t) - mean)^2 / (2 var), with the vanishing-variance convention.
double crossing_term(double gap, double var) {
    if (!(var > 0.0)) return gap <= 0.0 ? 0.0 : kInfinity;
    return gap * gap / (2.0 * var);
}

}  // namespace

double pointwise_rate_rmv(double t, double y1, double y2, const CrossingProblem& problem) {
    const auto* f = std::get_if<RandomMeanVariance>(&problem.family());
    if (!f) throw std::invalid_argument("pointwise_rate_rmv: problem is not a random mean/variance family");
    const double iy = rate_I_Y(f->y1, y1) + rate_I_Y(f->y2, y2);
    if (!std::isfinite(iy)) return kInfinity;
    const double gap = problem.crossing_level(t) - y2;
    const double kt = f->base.cov(t, t);
    if (!(kt > 0.0)) return iy + crossing_term(gap, 0.0);
    return iy + gap * gap / (2.0 * y1 * y1 * kt);
}

double pointwise_rate_ou(double t, double y, const CrossingProblem& problem) {
    const auto* ou = std::get_if<RandomDiffusionOU>(&problem.family());
    if (!ou) throw std::invalid_argument("pointwise_rate_ou: problem is not an OU family");
    const double iy = rate_I_Y(ou->y, y);
    if (!std::isfinite(iy)) return kInfinity;
    const double gap = problem.crossing_level(t) - ou_mean(ou->x, ou->a0, ou->a1, t);
    return iy + crossing_term(gap, ou_constant_cov(ou->a1, y, t, t));
}

double pointwise_rate(const CrossingProblem& problem, double t, std::span<const double> y) {
    if (y.size() != problem.conditioning_dims())
        throw std::invalid_argument("pointwise_rate: wrong number of coordinates");
    return problem.is_ou() ? pointwise_rate_ou(t, y[0], problem)
                           : pointwise_rate_rmv(t, y[0], y[1], problem);
}

double lagrange_beta(double t, const CrossingProblem& problem, std::span<const double> y) {
    if (y.size() != problem.conditioning_dims())
        throw std::invalid_argument("lagrange_beta: wrong number of coordinates");
    const double gap = problem.crossing_level(t) - problem.conditional_mean(t, y);
    if (const auto* ou = std::get_if<RandomDiffusionOU>(&problem.family())) {
        const double kt = ou_constant_cov(ou->a1, y[0], t, t);
        if (!(kt > 0.0)) throw DegenerateTime("lagrange_beta: k^y(t,t) = 0");
        return gap / kt;
    }
    const double kt = std::get<RandomMeanVariance>(problem.family()).base.cov(t, t);
    if (!(kt > 0.0)) throw DegenerateTime("lagrange_beta: k(t,t) = 0");
    return gap / (y[0] * kt);
}

// ---------------------------------------------------------------------------
// Variational minimization

namespace {

struct Min1D {
    double x = 0.0;
    double f = kInfinity;
};

// Golden-section search on [lo, hi]; the endpoints are always candidates, so
// minima on the boundary are returned exactly.
template <class F>
Min1D golden_section(F&& f, double lo, double hi, double tol) {
    Min1D best{lo, f(lo)};
    auto consider = [&](double x, double fx) {
        if (fx < best.f) best = {x, fx};
    };
    if (hi > lo) consider(hi, f(hi));
    if (!(hi - lo > tol)) return best;

    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    consider(c, fc);
    consider(d, fd);
    return best;
}

struct Candidate {
    double f = kInfinity;
    double t = 0.0;
    std::vector<double> y;
};

using InnerFn = std::function<Min1D(std::span<const double>)>;

class NestedSearch {
public:
    NestedSearch(const CrossingProblem& problem, const SearchSettings& s) : s_(s) {
        const auto priors = problem.priors();
        for (std::size_t k = 0; k < priors.size(); ++k) {
            Bracket b = priors[k]->finite_rate_bracket();
            if (k < s.y_brackets.size() && s.y_brackets[k]) b = *s.y_brackets[k];
            if (!(b.lo <= b.hi)) throw std::invalid_argument("minimize_rate: empty y bracket");
            brackets_.push_back(b);
        }
    }

    Candidate run(const InnerFn& inner) const {
        std::vector<double> y(brackets_.size());
        return level(0, y, inner);
    }

private:
    Candidate level(std::size_t k, std::vector<double>& y, const InnerFn& inner) const {
        if (k == brackets_.size()) {
            const Min1D m = inner(y);
            return Candidate{m.f, m.x, y};
        }
        const Bracket b = brackets_[k];
        if (b.singleton()) {
            y[k] = b.lo;
            return level(k + 1, y, inner);
        }

        Candidate best;
        auto f = [&](double v) {
            y[k] = v;
            Candidate c = level(k + 1, y, inner);
            const double fv = c.f;
            if (fv < best.f) best = std::move(c);
            return fv;
        };

        const int np = std::max(s_.y_scan_points, 3);
        double scan_f = kInfinity;
        int scan_i = 0;
        std::vector<double> pts(np);
        for (int i = 0; i < np; ++i) {
            pts[i] = (i == np - 1) ? b.hi : b.lo + (b.hi - b.lo) * i / (np - 1);
            const double fv = f(pts[i]);
            if (fv < scan_f) {
                scan_f = fv;
                scan_i = i;
            }
        }
        const double tol = s_.arg_tol * std::max({1.0, std::abs(b.lo), std::abs(b.hi)});
        const Min1D gs = golden_section(f, b.lo, b.hi, tol);
        if (!(gs.f <= scan_f + s_.fallback_tol)) {
            const double lo = pts[std::max(scan_i - 1, 0)];
            const double hi = pts[std::min(scan_i + 1, np - 1)];
            golden_section(f, lo, hi, tol);
        }
        return best;
    }

    SearchSettings s_;
    std::vector<Bracket> brackets_;
};

Min1D minimize_over_t(const CrossingProblem& problem, std::span<const double> y,
                      const SearchSettings& s) {
    const std::size_t cells = problem.grid().intervals() << std::max(s.t_grid_refine, 0);
    const double h = 1.0 / static_cast<double>(cells);
    auto f = [&](double t) { return pointwise_rate(problem, t, y); };

    Min1D best;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= cells; ++i) {
        const double t = static_cast<double>(i) * h;
        const double fv = f(t);
        if (fv < best.f) {
            best = {t, fv};
            best_i = i;
        }
    }
    if (!std::isfinite(best.f)) return best;
    const double lo = best_i == 0 ? 0.0 : static_cast<double>(best_i - 1) * h;
    const double hi = best_i == cells ? 1.0 : static_cast<double>(best_i + 1) * h;
    const Min1D gs = golden_section(f, lo, hi, s.arg_tol);
    return gs.f < best.f ? gs : best;
}

}  // namespace

RateResult minimize_rate(const CrossingProblem& problem, const SearchSettings& search) {
    const NestedSearch nested(problem, search);

    const Candidate best = nested.run(
        [&](std::span<const double> y) { return minimize_over_t(problem, y, search); });
    if (!std::isfinite(best.f))
        throw NoFiniteRate("minimize_rate: every probed (t, y) has an infinite rate");

    RateResult out;
    out.t_star = best.t;
    out.y_star = best.y;
    out.rate = pointwise_rate(problem, out.t_star, out.y_star);

    if (search.with_profile) {
        const TimeGrid& g = problem.grid();
        out.profile_t = g.points();
        out.profile_rate.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = g.point(i);
            out.profile_rate[i] =
                nested.run([&](std::span<const double> y) { return Min1D{t, pointwise_rate(problem, t, y)}; })
                    .f;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

KernelModel conditional_kernel_unit(const CrossingProblem& problem, const TimeGrid& grid) {
    if (const auto* ou = std::get_if<RandomDiffusionOU>(&problem.family()))
        return KernelModel::ornstein_uhlenbeck(ou->a0, ou->a1, ou->x,
                                               DiffusionPath::constant(grid, 1.0, 1.0));
    return std::get<RandomMeanVariance>(problem.family()).base;
}

}  // namespace

BruteForceOracle::BruteForceOracle(const CrossingProblem& problem, std::size_t t_intervals)
    : problem_(problem), grid_(t_intervals) {
    if (t_intervals > 64) throw std::invalid_argument("BruteForceOracle: at most 64 intervals");
    const Eigen::MatrixXd k = gram_matrix(conditional_kernel_unit(problem_, grid_), grid_);

    position_.assign(grid_.size(), -1);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (k(i, i) > 0.0) {
            position_[i] = static_cast<long>(active_.size());
            active_.push_back(i);
        }
    }
    const auto na = static_cast<Eigen::Index>(active_.size());
    Eigen::MatrixXd ka(na, na);
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index b = 0; b < na; ++b) ka(a, b) = k(active_[a], active_[b]);
    precision_ = ka.fullPivLu().inverse();
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();

    mean_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double t = grid_.point(i);
        if (const auto* ou = std::get_if<RandomDiffusionOU>(&problem_.family()))
            mean_[i] = ou_mean(ou->x, ou->a0, ou->a1, t);
        else
            mean_[i] = 0.0;
    }
}

double BruteForceOracle::constrained_min(const Eigen::MatrixXd& precision, std::size_t j_active,
                                         double b) const {
    const Eigen::Index n = precision.rows();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
    kkt.topLeftCorner(n, n) = precision;
    kkt(static_cast<Eigen::Index>(j_active), n) = 1.0;
    kkt(n, static_cast<Eigen::Index>(j_active)) = 1.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = b;
    const Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
    const Eigen::VectorXd h = sol.head(n);
    return 0.5 * h.dot(precision * h);
}

double BruteForceOracle::value(std::size_t j, std::span<const double> y) const {
    const double iy = prior_rate(problem_, y);
    if (!std::isfinite(iy)) return kInfinity;
    const double t = grid_.point(j);
    const double level = problem_.level() + problem_.barrier().at(t);

    double b = 0.0;
    Eigen::MatrixXd precision;
    if (problem_.is_ou()) {
        b = level - mean_[j];
        precision = precision_ / (y[0] * y[0]);
    } else {
        b = (level - y[1]) / y[0];
        precision = precision_;
    }
    if (position_[j] < 0) return b <= 0.0 ? iy : kInfinity;
    return iy + constrained_min(precision, static_cast<std::size_t>(position_[j]), b);
}

BruteForceResult brute_force_rate(const CrossingProblem& problem, const BruteForceSettings& settings) {
    if (settings.y_points < 1 || settings.y_points > 64)
        throw std::invalid_argument("brute_force_rate: y_points must be in [1, 64]");
    const BruteForceOracle oracle(problem, settings.t_intervals);

    std::vector<std::vector<double>> axes;
    for (const PriorModel* p : problem.priors()) {
        const Bracket b = p->finite_rate_bracket();
        std::vector<double> ax;
        if (b.singleton() || settings.y_points == 1) {
            ax.push_back(b.singleton() ? b.lo : 0.5 * (b.lo + b.hi));
        } else {
            for (int i = 0; i < settings.y_points; ++i)
                ax.push_back(i == settings.y_points - 1
                                 ? b.hi
                                 : b.lo + (b.hi - b.lo) * i / (settings.y_points - 1));
        }
        axes.push_back(std::move(ax));
    }

    BruteForceResult best;
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> y(axes.size());
    while (true) {
        for (std::size_t k = 0; k < axes.size(); ++k) y[k] = axes[k][idx[k]];
        for (std::size_t j = 0; j < oracle.grid().size(); ++j) {
            const double v = oracle.value(j, y);
            if (v < best.rate) best = {v, oracle.grid().point(j), y};
        }
        std::size_t k = 0;
        while (k < axes.size() && ++idx[k] == axes[k].size()) idx[k++] = 0;
        if (k == axes.size()) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t paths) {
    if (paths == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(paths);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

namespace {

PathSimulator make_simulator(const CrossingProblem& problem, int n) {
    if (const auto* ou = std::get_if<RandomDiffusionOU>(&problem.family()))
        return PathSimulator::ou(ou->a0, ou->a1, ou->x, ou->y, problem.grid(), n);
    const auto& f = std::get<RandomMeanVariance>(problem.family());
    return PathSimulator::rmv(f.base, f.y1, f.y2, problem.grid(), n);
}

}  // namespace

MCEstimate mc_crossing_probability(const CrossingProblem& problem, int n, std::uint64_t paths,
                                   std::uint64_t master_seed, const McSettings& mc) {
    if (paths < 1) throw std::invalid_argument("mc_crossing_probability: paths must be >= 1");
    if (mc.batch_size < 1) throw std::invalid_argument("mc_crossing_probability: batch_size must be >= 1");

    const PathSimulator sim = make_simulator(problem, n);
    const std::uint64_t batches = (paths + mc.batch_size - 1) / mc.batch_size;
    std::vector<std::uint64_t> batch_hits(batches, 0);
    const std::span<const double> phi = problem.barrier().values();
    const double level = problem.level();

    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        std::vector<double> z(sim.grid().size());
        std::vector<double> y(sim.conditioning_dims());
        for (std::uint64_t b; (b = next.fetch_add(1)) < batches;) {
            Streams streams = Streams::derive(master_seed, static_cast<std::uint64_t>(n), b);
            const std::uint64_t count = std::min(mc.batch_size, paths - b * mc.batch_size);
            std::uint64_t hits = 0;
            for (std::uint64_t p = 0; p < count; ++p) {
                sim.sample_into(streams, z, y);
                for (std::size_t i = 0; i < z.size(); ++i) {
                    if (z[i] - phi[i] > level) {
                        ++hits;
                        break;
                    }
                }
            }
            batch_hits[b] = hits;
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(mc.threads, static_cast<unsigned>(batches)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    MCEstimate est;
    est.n = n;
    est.paths = paths;
    est.seed = master_seed;
    for (std::uint64_t h : batch_hits) est.hits += h;
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(paths);
    std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.hits, paths);
    return est;
}

SlopeReport ldp_slope_check(const CrossingProblem& problem, std::span<const int> n_ladder,
                            std::uint64_t paths, std::uint64_t master_seed, const McSettings& mc) {
    if (n_ladder.empty()) throw std::invalid_argument("ldp_slope_check: empty n-ladder");
    for (std::size_t k = 0; k < n_ladder.size(); ++k) {
        if (n_ladder[k] < 1) throw std::invalid_argument("ldp_slope_check: n must be >= 1");
        if (k > 0 && n_ladder[k] <= n_ladder[k - 1])
            throw std::invalid_argument("ldp_slope_check: n-ladder must be strictly increasing");
    }

    SlopeReport rep;
    for (int n : n_ladder) {
        MCEstimate est = mc_crossing_probability(problem, n, paths, master_seed, mc);
        rep.per_n.push_back(est);
        if (est.hits < kMinHitsPerRung) {
            std::ostringstream os;
            os << "ldp_slope_check: rung n = " << n << " has " << est.hits << " hits out of "
               << est.paths << " paths (need >= " << kMinHitsPerRung << ")";
            throw InsufficientHits(os.str());
        }
    }

    // Checked after the rungs so that a ladder reaching too deep reports the
    // missing hits first.
    if (n_ladder.size() < 2)
        throw std::invalid_argument("ldp_slope_check: the n-ladder needs at least two rungs");

    return fit_ldp_slope(std::move(rep.per_n));
}

SlopeReport fit_ldp_slope(std::vector<MCEstimate> per_n) {
    if (per_n.size() < 2) throw std::invalid_argument("fit_ldp_slope: needs at least two rungs");
    SlopeReport rep;
    rep.per_n = std::move(per_n);

    // Least squares of log p + log(n)/2 against n.
    const auto m = static_cast<double>(rep.per_n.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys;
    for (const auto& e : rep.per_n) {
        const double x = e.n;
        const double yv = std::log(e.p_hat) + 0.5 * std::log(static_cast<double>(e.n));
        xs.push_back(x);
        ys.push_back(yv);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.intercept = (sy - slope * sx) / m;
    rep.rate_hat = -slope;

    const double ybar = sy / m;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (rep.intercept + slope * xs[k]);
        ss_res += r * r;
        ss_tot += (ys[k] - ybar) * (ys[k] - ybar);
    }
    rep.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return rep;
}

}  // namespace cgldp
