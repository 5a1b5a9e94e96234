#include <doctest.h>

#include <cmath>

#include "cgldp/error.hpp"
#include "cgldp/rkhs.hpp"
#include "oracles.hpp"

using namespace cgldp;
using oracle::kPi;

namespace {

DiffusionPath const_y(const TimeGrid& g, double v) { return DiffusionPath::constant(g, v, 0.01); }

QuadFormSolver brownian_solver(std::size_t m) {
    return QuadFormSolver::for_model(KernelModel::brownian(), TimeGrid(m));
}

Path column(const QuadFormSolver& s, std::size_t i) {
    const auto& k = s.gram();
    std::vector<double> v(k.rows());
    for (Eigen::Index r = 0; r < k.rows(); ++r) v[r] = k(r, static_cast<Eigen::Index>(i));
    return Path(s.grid(), std::move(v));
}

// Random trigonometric polynomial with f(0) = x.
struct TrigPath {
    double x;
    std::vector<double> a, b;
    double operator()(double t) const {
        double v = x;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double w = (k + 1) * kPi;
            v += a[k] * std::sin(w * t) + b[k] * (1 - std::cos(w * t));
        }
        return v;
    }
};

TrigPath random_trig(oracle::Gen& gen, double x) {
    TrigPath p{x, {}, {}};
    const int terms = gen.integer(1, 4);
    for (int k = 0; k < terms; ++k) {
        p.a.push_back(gen.uniform(-1, 1));
        p.b.push_back(gen.uniform(-0.5, 0.5));
    }
    return p;
}

}  // namespace

TEST_CASE("rkhs norm examples") {
    const auto s = brownian_solver(256);
    const TimeGrid& g = s.grid();
    CHECK(rkhs_norm_sq(Path::zero(g), s) == 0.0);
    CHECK(rkhs_norm_sq(Path::sample(g, [](double u) { return u; }), s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.jitter() == doctest::Approx(1e-10 * s.gram().trace() / 257.0).epsilon(1e-15));
}

TEST_CASE("rkhs norm of sin converges to the cameron-martin value") {
    const double want = oracle::cameron_martin([](double u) { return kPi * std::cos(kPi * u); });
    CHECK(want == doctest::Approx(kPi * kPi / 2).epsilon(1e-12));
    double prev = kInfinity;
    for (std::size_t m : {64u, 256u, 1024u}) {
        const auto s = brownian_solver(m);
        const double q = rkhs_norm_sq(Path::sample(s.grid(), [](double u) { return std::sin(kPi * u); }), s);
        const double err = std::abs(q - want);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("cramer transform examples") {
    const auto s = brownian_solver(1024);
    const TimeGrid& g = s.grid();
    CHECK(cramer_transform(Path::zero(g), s) == 0.0);
    CHECK(cramer_transform(Path::sample(g, [](double u) { return u; }), s) == doctest::Approx(0.5).epsilon(1e-12));
    const double want = 0.5 * oracle::cameron_martin([](double u) { return kPi * std::cos(kPi * u); });
    CHECK(std::abs(cramer_transform(Path::sample(g, [](double u) { return std::sin(kPi * u); }), s) - want) < 1e-5);
}

TEST_CASE("j_rmv examples") {
    const auto s = brownian_solver(1024);
    const TimeGrid& g = s.grid();
    const Path y2 = Path::sample(g, [](double u) { return 0.3 * u * u; });
    CHECK(j_rmv(y2, VariancePath::constant(g, 1.7, 0.01), y2, s) == 0.0);
    CHECK(j_rmv(Path::sample(g, [](double u) { return u; }), VariancePath::constant(g, 2.0, 0.01), Path::zero(g), s) ==
          doctest::Approx(0.125).epsilon(1e-12));

    const VariancePath y1(Path::sample(g, [](double u) { return 1 + u; }), 0.01);
    const Path z = Path::sample(g, [](double u) { return u + (1 + u) * std::sin(kPi * u); });
    const double want = 0.5 * oracle::cameron_martin([](double u) { return kPi * std::cos(kPi * u); });
    CHECK(std::abs(j_rmv(z, y1, Path::sample(g, [](double u) { return u; }), s) - want) < 1e-5);
}

TEST_CASE("j_ou_fw examples") {
    const TimeGrid g(4096);
    // a1 = 0: the mean is affine and the stencil annihilates it exactly.
    const Path lin = Path::sample(g, [](double u) { return 0.5 + 2 * u; });
    CHECK(j_ou_fw(lin, const_y(g, 1.3), 2.0, 0.0, 0.5) == 0.0);
    // a1 != 0: second order in the step.
    const Path m = Path::sample(g, [](double u) { return ou_mean(1.0, 0.5, 1.0, u); });
    CHECK(j_ou_fw(m, const_y(g, 1.0), 0.5, 1.0, 1.0) < 1e-9);

    CHECK(j_ou_fw(Path::sample(g, [](double u) { return u; }), const_y(g, 1.0), 0, 0, 0) ==
          doctest::Approx(0.5).epsilon(1e-12));

    const double want = oracle::simpson([](double t) { return (1 - t) * (1 - t) / 8; }, 0, 1, 1000);
    CHECK(want == doctest::Approx(1.0 / 24).epsilon(1e-14));
    double prev = kInfinity;
    for (std::size_t mm : {16u, 64u, 256u, 4096u}) {
        const TimeGrid gg(mm);
        const double v = j_ou_fw(Path::sample(gg, [](double u) { return u; }), const_y(gg, 2.0), 0, 1, 0);
        CHECK(std::abs(v - want) < prev);
        prev = std::abs(v - want);
    }
    CHECK(prev < 1e-7);
}

TEST_CASE("j_ou_fw rejects paths that miss the initial value") {
    const TimeGrid g(16);
    CHECK(j_ou_fw(Path::constant(g, 0.1), const_y(g, 1), 0, 0, 0) == kInfinity);
    CHECK(j_ou_fw(Path::constant(g, 1e-13), const_y(g, 1), 0, 0, 0) == 0.0);
}

TEST_CASE("j_ou_rkhs examples") {
    {
        const TimeGrid g(256);
        const auto y = const_y(g, 1.0);
        const auto s = QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(0.3, -1.0, 0.7, y), g);
        CHECK(j_ou_rkhs(Path::sample(g, [](double u) { return ou_mean(0.7, 0.3, -1.0, u); }), y, 0.3, -1.0, 0.7, s) ==
              0.0);
        const auto bs = QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(0, 0, 0, y), g);
        CHECK(j_ou_rkhs(Path::sample(g, [](double u) { return u; }), y, 0, 0, 0, bs) ==
              doctest::Approx(0.5).epsilon(1e-10));
        // wrong solver
        CHECK_THROWS_AS(j_ou_rkhs(Path::zero(g), y, 0, 1.0, 0, bs), std::invalid_argument);
    }
    const TimeGrid g(4096);
    const auto y = const_y(g, 2.0);
    const auto s = QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(0, 1, 0, y), g);
    const double v = j_ou_rkhs(Path::sample(g, [](double u) { return u; }), y, 0, 1, 0, s);
    CHECK(std::abs(v - 1.0 / 24) < 1e-3);
    CHECK(std::abs(v - j_ou_fw(Path::sample(g, [](double u) { return u; }), y, 0, 1, 0)) < 1e-3);
}

TEST_CASE("grid mismatch is reported") {
    const auto s = brownian_solver(16);
    CHECK_THROWS_AS(rkhs_norm_sq(Path::zero(TimeGrid(32)), s), GridMismatch);
    CHECK_THROWS_AS(j_rmv(Path::zero(TimeGrid(16)), VariancePath::constant(TimeGrid(8), 1, 0.1),
                          Path::zero(TimeGrid(16)), s),
                    GridMismatch);
    CHECK_THROWS_AS(j_ou_fw(Path::zero(TimeGrid(16)), const_y(TimeGrid(8), 1), 0, 0, 0), GridMismatch);
    CHECK_THROWS_AS(QuadFormSolver(Eigen::MatrixXd::Identity(3, 3), TimeGrid(4)), GridMismatch);
}

TEST_CASE("property: reproducing property on every column") {
    const TimeGrid g(256);
    std::vector<double> yv(g.size());
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = 1.0 + 0.5 * std::sin(7.0 * g.point(i));
    const KernelModel models[] = {
        KernelModel::brownian(),
        KernelModel::ornstein_uhlenbeck(0, 1, 0, const_y(g, 1.0)),
        KernelModel::ornstein_uhlenbeck(0, -2, 0, const_y(g, 0.5)),
        KernelModel::ornstein_uhlenbeck(0, 0.7, 0, DiffusionPath(Path(g, yv), 0.1)),
        KernelModel::scaled(VariancePath(Path(g, yv), 0.1), KernelModel::brownian()),
    };
    for (const auto& model : models) {
        const auto s = QuadFormSolver::for_model(model, g);
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double want = s.gram()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            const double got = rkhs_norm_sq(column(s, i), s);
            REQUIRE(std::abs(got - want) <= 1e-8 * want);
        }
        // Column 0 is identically zero for a deterministic start.
        CHECK(rkhs_norm_sq(column(s, 0), s) == 0.0);
    }
}

TEST_CASE("property: quadratic homogeneity") {
    oracle::Gen gen(21);
    const auto s = brownian_solver(512);
    const TimeGrid& g = s.grid();
    for (int rep = 0; rep < 30; ++rep) {
        const TrigPath p = random_trig(gen, 0.0);
        const VariancePath y1 = VariancePath::constant(g, gen.uniform(0.3, 3), 0.01);
        const Path z = Path::sample(g, p);
        const double c = gen.uniform(-4, 4);
        const Path cz = Path::sample(g, [&](double t) { return c * p(t); });
        const double base = j_rmv(z, y1, Path::zero(g), s);
        CHECK(j_rmv(cz, y1, Path::zero(g), s) == doctest::Approx(c * c * base).epsilon(1e-10));
    }
}

TEST_CASE("property: lower semicontinuity along convergent sequences") {
    const TimeGrid g(1024);
    const auto f = [](double t) { return std::sin(2 * t) + t; };
    const auto y = const_y(g, 1.2);
    const double j = j_ou_fw(Path::sample(g, f), y, 0.1, -0.5, 0.0);
    // f_k = f + sin(k pi t) / k oscillates (J jumps up), y_k = y + 1/k.
    for (int k : {8, 32, 128, 256}) {
        const Path fk = Path::sample(g, [&](double t) { return f(t) + std::sin(k * kPi * t) / k; });
        const double jk = j_ou_fw(fk, const_y(g, 1.2 + 1.0 / k), 0.1, -0.5, 0.0);
        CHECK(jk >= j - 1e-6);
    }
    // f_k = f + t^2 / k converges smoothly; the tail approaches J from either side.
    double tail = kInfinity;
    for (double k : {1e4, 1e6, 1e8}) {
        const Path fk = Path::sample(g, [&](double t) { return f(t) + t * t / k; });
        tail = j_ou_fw(fk, const_y(g, 1.2 + 1.0 / k), 0.1, -0.5, 0.0);
    }
    CHECK(tail >= j - 1e-6);

    // The same for the RKHS form of the random mean/variance family.
    const auto s = brownian_solver(256);
    const Path z = Path::sample(s.grid(), [](double t) { return std::sin(3 * t); });
    const double jr = j_rmv(z, VariancePath::constant(s.grid(), 1.5, 0.01), Path::zero(s.grid()), s);
    for (int k : {4, 16, 64}) {
        const Path zk = Path::sample(s.grid(), [&](double t) { return std::sin(3 * t) + std::sin(k * kPi * t) / k; });
        CHECK(j_rmv(zk, VariancePath::constant(s.grid(), 1.5 + 1.0 / k, 0.01), Path::zero(s.grid()), s) >= jr - 1e-6);
    }
}

TEST_CASE("property: larger diffusion never increases the action") {
    oracle::Gen gen(22);
    const TimeGrid g(256);
    for (int rep = 0; rep < 50; ++rep) {
        const double x = gen.uniform(-1, 1);
        const Path f = Path::sample(g, random_trig(gen, x));
        std::vector<double> lo(g.size()), hi(g.size());
        for (std::size_t i = 0; i < lo.size(); ++i) {
            lo[i] = gen.uniform(0.2, 2);
            hi[i] = lo[i] + gen.uniform(0, 1);
        }
        const double a0 = gen.uniform(-1, 1), a1 = gen.uniform(-2, 2);
        CHECK(j_ou_fw(f, DiffusionPath(Path(g, hi), 0.1), a0, a1, x) <=
              j_ou_fw(f, DiffusionPath(Path(g, lo), 0.1), a0, a1, x));
    }
}

TEST_CASE("property: freidlin-wentzell and rkhs forms agree and converge") {
    oracle::Gen gen(23);
    std::vector<TrigPath> paths;
    std::vector<double> a0s, a1s, ys;
    for (int i = 0; i < 6; ++i) {
        paths.push_back(random_trig(gen, gen.uniform(-1, 1)));
        a0s.push_back(gen.uniform(-1, 1));
        a1s.push_back(gen.uniform(-1.5, 1.5));
        ys.push_back(gen.uniform(0.5, 2));
    }
    std::vector<double> prev(paths.size(), kInfinity);
    for (std::size_t m : {256u, 1024u}) {
        const TimeGrid g(m);
        for (std::size_t k = 0; k < paths.size(); ++k) {
            const auto y = const_y(g, ys[k]);
            const auto s = QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(a0s[k], a1s[k], paths[k].x, y), g);
            const Path f = Path::sample(g, paths[k]);
            const double fw = j_ou_fw(f, y, a0s[k], a1s[k], paths[k].x);
            const double rk = j_ou_rkhs(f, y, a0s[k], a1s[k], paths[k].x, s);
            const double d = std::abs(fw - rk) / (1 + fw);
            CHECK(d < prev[k]);
            prev[k] = d;
        }
    }
    for (double d : prev) CHECK(d < 1e-2);
}

TEST_CASE("divergence is reported as infinity") {
    const auto s = brownian_solver(256);
    const TimeGrid& g = s.grid();
    // A path that does not start at 0 is not in the Brownian space.
    CHECK(rkhs_norm_sq(Path::constant(g, 1.0), s) == kInfinity);
    // A large jump blows through the ceiling.
    const Path jump = Path::sample(g, [](double t) { return t < 0.5 ? 0.0 : 100.0; });
    CHECK(rkhs_norm_sq(jump, s) == kInfinity);

    DivergencePolicy pol;
    pol.refinement_check = true;
    const auto sr = QuadFormSolver::for_model(KernelModel::brownian(), g, pol);
    REQUIRE(sr.coarse() != nullptr);
    const Path unit_jump = Path::sample(g, [](double t) { return t < 0.5 ? 0.0 : 1.0; });
    CHECK(rkhs_norm_sq(unit_jump, s) == doctest::Approx(256.0).epsilon(1e-9));
    CHECK(rkhs_norm_sq(unit_jump, sr) == kInfinity);
    // Smooth paths pass the refinement check.
    const Path smooth = Path::sample(g, [](double t) { return std::sin(kPi * t); });
    CHECK(rkhs_norm_sq(smooth, sr) == doctest::Approx(kPi * kPi / 2).epsilon(1e-3));
}

TEST_CASE("hoelder tightness diagnostic") {
    const auto speed = [](int n) { return static_cast<double>(n); };
    const int ns[] = {1, 4, 16, 64};
    const TimeGrid g(128);
    CHECK(hoelder_tightness_bound(inverse_n_family(KernelModel::brownian()), speed, 0.5, g, ns) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hoelder_tightness_bound(
              inverse_n_family(KernelModel::scaled(VariancePath::constant(g, 2, 0.1), KernelModel::brownian())), speed,
              0.5, g, ns) == doctest::Approx(4.0).epsilon(1e-12));

    // OU: brute force over all pairs with the closed form recomputed here.
    const TimeGrid g10(1024);
    auto k = [](double s, double t) {
        const double lo = std::min(s, t);
        return std::exp(s + t) * (1 - std::exp(-2 * lo)) / 2;
    };
    double want = 0.0;
    for (std::size_t j = 1; j < g10.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            const double s = g10.point(i), t = g10.point(j);
            want = std::max(want, std::abs(k(t, t) + k(s, s) - 2 * k(s, t)) / (t - s));
        }
    const double got = hoelder_tightness_bound(
        inverse_n_family(KernelModel::ornstein_uhlenbeck(0, 1, 0, const_y(g10, 1.0))), speed, 0.5, g10, ns);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    const double e = std::exp(1.0);
    CHECK(got <= e * e * (e - 1));
    CHECK_THROWS_AS(hoelder_tightness_bound(inverse_n_family(KernelModel::brownian()), speed, 0.0, g, ns),
                    std::invalid_argument);
}
