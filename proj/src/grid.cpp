#include "cgldp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cgldp/error.hpp"

namespace cgldp {

namespace {

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

}  // namespace

TimeGrid::TimeGrid(std::size_t intervals) : m_(intervals) {
    if (m_ < 2 || !is_power_of_two(m_))
        throw std::invalid_argument("TimeGrid: M must be a power of two >= 2, got " +
                                    std::to_string(m_));
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> p(size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = point(i);
    return p;
}

std::size_t TimeGrid::cell(double t) const noexcept {
    if (!(t > 0.0)) return 0;
    if (t >= 1.0) return m_ - 1;
    auto i = static_cast<std::size_t>(t * static_cast<double>(m_));
    return std::min(i, m_ - 1);
}

TimeGrid TimeGrid::coarsened() const {
    if (m_ < 4) throw std::invalid_argument("TimeGrid: cannot coarsen below M = 2");
    return TimeGrid(m_ / 2);
}

Path::Path(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("Path: expected " + std::to_string(grid_.size()) +
                                    " samples, got " + std::to_string(values_.size()));
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("Path: non-finite sample");
}

Path Path::constant(TimeGrid grid, double value) {
    return Path(grid, std::vector<double>(grid.size(), value));
}

double Path::at(double t) const noexcept {
    const std::size_t i = grid_.cell(t);
    const double h = grid_.step();
    const double u = std::clamp((t - grid_.point(i)) / h, 0.0, 1.0);
    if (u == 0.0) return values_[i];
    if (u == 1.0) return values_[i + 1];
    return values_[i] + u * (values_[i + 1] - values_[i]);
}

Path Path::restricted_to_coarse() const {
    const TimeGrid coarse = grid_.coarsened();
    std::vector<double> v(coarse.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[2 * i];
    return Path(coarse, std::move(v));
}

PositivePath::PositivePath(Path path, double alpha)
    : path_(std::move(path)), alpha_(alpha), constant_(true) {
    if (!(alpha_ > 0.0)) throw std::invalid_argument("PositivePath: alpha must be > 0");
    const auto v = path_.values();
    for (double x : v) {
        if (x < alpha_)
            throw std::invalid_argument("PositivePath: value " + std::to_string(x) +
                                        " below floor alpha = " + std::to_string(alpha_));
        if (x != v.front()) constant_ = false;
    }
}

PositivePath PositivePath::constant(TimeGrid grid, double value, double alpha) {
    return PositivePath(Path::constant(grid, value), alpha);
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
    if (!(a == b))
        throw GridMismatch(std::string(what) + ": grid M = " + std::to_string(a.intervals()) +
                           " does not match M = " + std::to_string(b.intervals()));
}

}  // namespace cgldp
