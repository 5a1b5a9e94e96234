#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cgldp {

/// Uniform dyadic discretization t_i = i / M of [0, 1].
///
/// M must be a power of two and at least 2, so every grid can be halved
/// exactly; refinement studies compare a grid with its coarsened() parent.
class TimeGrid {
public:
    explicit TimeGrid(std::size_t intervals);

    std::size_t intervals() const noexcept { return m_; }
    std::size_t size() const noexcept { return m_ + 1; }
    double step() const noexcept { return 1.0 / static_cast<double>(m_); }
    double point(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(m_);
    }
    std::vector<double> points() const;

    /// Index i of the cell [t_i, t_{i+1}] containing t (t clamped to [0, 1]).
    std::size_t cell(double t) const noexcept;

    /// Grid with M / 2 intervals; requires M >= 4.
    TimeGrid coarsened() const;

    bool operator==(const TimeGrid&) const = default;

private:
    std::size_t m_;
};

/// Grid samples of a continuous path; piecewise linear between nodes.
class Path {
public:
    Path(TimeGrid grid, std::vector<double> values);

    static Path zero(TimeGrid grid) { return constant(grid, 0.0); }
    static Path constant(TimeGrid grid, double value);

    template <class F>
    static Path sample(TimeGrid grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
        return Path(grid, std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Linear interpolation at arbitrary t in [0, 1].
    double at(double t) const noexcept;

    /// Samples at the even nodes, i.e. the same path on grid().coarsened().
    Path restricted_to_coarse() const;

    bool operator==(const Path&) const = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// A path bounded below by alpha > 0. Used for the variance slot y1 of the
/// random mean/variance family and the diffusion coefficient y of the OU
/// family.
class PositivePath {
public:
    PositivePath(Path path, double alpha);

    static PositivePath constant(TimeGrid grid, double value, double alpha);

    const Path& path() const noexcept { return path_; }
    const TimeGrid& grid() const noexcept { return path_.grid(); }
    double alpha() const noexcept { return alpha_; }
    bool is_constant() const noexcept { return constant_; }
    double operator[](std::size_t i) const noexcept { return path_[i]; }
    double at(double t) const noexcept { return path_.at(t); }

    /// Value used on the cell [t_i, t_{i+1}] where the path is treated as
    /// piecewise constant: the midpoint average (y_i + y_{i+1}) / 2.
    double cell_value(std::size_t i) const noexcept {
        return 0.5 * (path_[i] + path_[i + 1]);
    }

    bool operator==(const PositivePath&) const = default;

private:
    Path path_;
    double alpha_;
    bool constant_;
};

using VariancePath = PositivePath;
using DiffusionPath = PositivePath;

/// Throws GridMismatch unless a and b are the same grid.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

}  // namespace cgldp
