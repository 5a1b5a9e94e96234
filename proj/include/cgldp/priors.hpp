#pragma once

#include <variant>

#include "cgldp/random.hpp"

namespace cgldp {

/// Which conditioning value a prior feeds.
enum class Slot { Variance, Mean, Diffusion };

struct Degenerate {
    double value = 0.0;
    bool operator==(const Degenerate&) const = default;
};

/// Uniform on [a, b] for every n; rate 0 on the support.
struct UniformSupport {
    double a = 0.0;
    double b = 1.0;
    bool operator==(const UniformSupport&) const = default;
};

/// center + sqrt(variance / n) Z; LDP at speed n with rate (y - center)^2 / (2 variance).
struct GaussianPerturbation {
    double center = 0.0;
    double variance = 1.0;
    bool operator==(const GaussianPerturbation&) const = default;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    bool singleton() const noexcept { return lo == hi; }
};

inline constexpr double kDefaultAlpha = 1e-2;

/// Law of the scalar conditioning value Y^n (promoted to a constant path).
///
/// Variance and diffusion slots must respect the floor alpha > 0: supports
/// start at or above alpha and Gaussian perturbations may put at most 1e-3 of
/// their n = 1 mass below it (samples are clamped there).
class PriorModel {
public:
    using Law = std::variant<Degenerate, UniformSupport, GaussianPerturbation>;

    PriorModel(Law law, Slot slot, double alpha = kDefaultAlpha);

    const Law& law() const noexcept { return law_; }
    Slot slot() const noexcept { return slot_; }
    double alpha() const noexcept { return alpha_; }
    bool positive() const noexcept { return slot_ != Slot::Mean; }

    /// Interval carrying every value of practical interest: the support for
    /// Degenerate/UniformSupport, center +- 8 sqrt(variance) (floored at
    /// alpha) for GaussianPerturbation.
    Bracket finite_rate_bracket() const;

    /// P(sample < alpha) at n = 1 before clamping.
    double clamp_probability() const;

    bool operator==(const PriorModel&) const = default;

private:
    Law law_;
    Slot slot_;
    double alpha_;
};

double sample_y(const PriorModel& prior, int n, Rng& rng);

double rate_I_Y(const PriorModel& prior, double y);

}  // namespace cgldp
