#include "cgldp/priors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cgldp/error.hpp"
#include "cgldp/rkhs.hpp"

namespace cgldp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

[[noreturn]] void invalid(const std::string& msg) { throw InvalidConfig("prior: " + msg); }

}  // namespace

PriorModel::PriorModel(Law law, Slot slot, double alpha)
    : law_(std::move(law)), slot_(slot), alpha_(alpha) {
    const bool pos = positive();
    if (pos && !(alpha_ > 0.0)) invalid("alpha must be > 0 for a variance or diffusion slot");

    std::visit(overloaded{
                   [&](const Degenerate& d) {
                       if (!std::isfinite(d.value)) invalid("degenerate value must be finite");
                       if (pos && d.value < alpha_) invalid("degenerate value below alpha");
                   },
                   [&](const UniformSupport& u) {
                       if (!(std::isfinite(u.a) && std::isfinite(u.b) && u.a < u.b))
                           invalid("uniform support needs finite a < b");
                       if (pos && u.a < alpha_) invalid("uniform support starts below alpha");
                   },
                   [&](const GaussianPerturbation& g) {
                       if (!std::isfinite(g.center)) invalid("gaussian center must be finite");
                       if (!(g.variance > 0.0 && std::isfinite(g.variance)))
                           invalid("gaussian variance must be > 0");
                       if (pos && g.center < alpha_) invalid("gaussian center below alpha");
                   },
               },
               law_);

    if (pos && clamp_probability() > 1e-3) {
        std::ostringstream os;
        os << "probability mass below alpha at n = 1 is " << clamp_probability()
           << " (> 1e-3)";
        invalid(os.str());
    }
}

Bracket PriorModel::finite_rate_bracket() const {
    return std::visit(overloaded{
                          [](const Degenerate& d) { return Bracket{d.value, d.value}; },
                          [](const UniformSupport& u) { return Bracket{u.a, u.b}; },
                          [&](const GaussianPerturbation& g) {
                              const double w = 8.0 * std::sqrt(g.variance);
                              double lo = g.center - w;
                              if (positive()) lo = std::max(lo, alpha_);
                              return Bracket{lo, g.center + w};
                          },
                      },
                      law_);
}

double PriorModel::clamp_probability() const {
    if (!positive()) return 0.0;
    if (const auto* g = std::get_if<GaussianPerturbation>(&law_))
        return normal_cdf((alpha_ - g->center) / std::sqrt(g->variance));
    return 0.0;
}

double sample_y(const PriorModel& prior, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_y: n must be >= 1");
    return std::visit(overloaded{
                          [](const Degenerate& d) { return d.value; },
                          [&](const UniformSupport& u) { return u.a + (u.b - u.a) * uniform01(rng); },
                          [&](const GaussianPerturbation& g) {
                              const double y = g.center + std::sqrt(g.variance / n) * standard_normal(rng);
                              return prior.positive() ? std::max(y, prior.alpha()) : y;
                          },
                      },
                      prior.law());
}

double rate_I_Y(const PriorModel& prior, double y) {
    if (std::isnan(y)) return kInfinity;
    if (prior.positive() && y < prior.alpha()) return kInfinity;
    return std::visit(overloaded{
                          [&](const Degenerate& d) { return y == d.value ? 0.0 : kInfinity; },
                          [&](const UniformSupport& u) {
                              return (y >= u.a && y <= u.b) ? 0.0 : kInfinity;
                          },
                          [&](const GaussianPerturbation& g) {
                              const double d = y - g.center;
                              return d * d / (2.0 * g.variance);
                          },
                      },
                      prior.law());
}

}  // namespace cgldp
