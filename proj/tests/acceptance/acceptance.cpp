// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance          all criteria
//   acceptance 1 4 9    a subset

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "cgldp/config.hpp"
#include "cgldp/experiment.hpp"
#include "oracles.hpp"

using namespace cgldp;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds
    std::function<std::string()> run;  // empty on success
};

// Collects failure reasons; the first one is reported.
class Verdict {
public:
    void near(const char* what, double got, double want, double tol) {
        if (std::abs(got - want) <= tol) return;
        std::ostringstream os;
        os << std::setprecision(12) << what << ": got " << got << ", want " << want << " +- " << tol;
        fail(os.str());
    }
    void require(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
    void fail(const std::string& why) {
        if (why_.empty()) why_ = why;
    }
    const std::string& why() const { return why_; }

private:
    std::string why_;
};

CrossingProblem rmv(PriorModel::Law y1, PriorModel::Law y2, std::size_t m = 256) {
    const TimeGrid g(m);
    return CrossingProblem(RandomMeanVariance{KernelModel::brownian(), PriorModel(y1, Slot::Variance),
                                              PriorModel(y2, Slot::Mean)},
                           Path::zero(g), 1.0);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CGLDP_CLI + "\" " + args + " > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// pHat column of an mc.csv, skipping provenance and header lines
std::vector<std::string> phat_column(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
        std::istringstream row(line);
        std::string cell;
        for (int i = 0; i < 4; ++i) std::getline(row, cell, ',');
        out.push_back(cell);
    }
    return out;
}

std::string brownian_ruin() {
    Verdict v;
    const auto p = rmv(Degenerate{1.0}, Degenerate{0.0});
    const auto r = minimize_rate(p);
    v.near("I", r.rate, 0.5, 1e-9);
    v.near("t*", r.t_star, 1.0, 1e-6);
    v.near("brute force I", brute_force_rate(p).rate, 0.5, 1e-6);
    return v.why();
}

std::string random_variance() {
    Verdict v;
    const auto r = minimize_rate(rmv(UniformSupport{1.0, 2.0}, Degenerate{0.0}));
    v.near("I", r.rate, 0.125, 1e-8);
    v.near("y1*", r.y_star[0], 2.0, 1e-6);
    // At fixed y1 the rate is 1 / (2 y1^2): strictly decreasing across the support.
    double prev = kInfinity;
    for (double y1 = 1.0; y1 <= 2.0; y1 += 0.125) {
        const double cur = minimize_rate(rmv(Degenerate{y1}, Degenerate{0.0})).rate;
        v.near("fixed y1 rate", cur, 0.5 / (y1 * y1), 1e-9);
        v.require(cur < prev, "rate not decreasing in y1");
        prev = cur;
    }
    return v.why();
}

std::string random_mean() {
    Verdict v;
    double arg = 0.0;
    const double want =
        oracle::golden_min([](double y2) { return y2 * y2 / 2 + (1 - y2) * (1 - y2) / 2; }, -8, 8, &arg);
    const auto r = minimize_rate(rmv(Degenerate{1.0}, GaussianPerturbation{0.0, 1.0}));
    v.near("I", r.rate, want, 1e-8);
    v.near("y2*", r.y_star[1], arg, 1e-5);
    return v.why();
}

std::string ou_rate() {
    Verdict v;
    const TimeGrid g(256);
    const CrossingProblem p(RandomDiffusionOU{0.0, 1.0, 0.0, PriorModel(Degenerate{1.0}, Slot::Diffusion)},
                            Path::zero(g), 1.0);
    // I(t) = 1 / (2 k(t,t)) with the kernel diagonal integrated numerically.
    const double want = 1.0 / (2.0 * oracle::ou_variance_quadrature(1.0, 1.0, 1.0));
    const auto r = minimize_rate(p);
    v.near("I", r.rate, want, 1e-8);
    v.near("I closed form", r.rate, 1.0 / std::expm1(2.0), 1e-8);
    v.near("t*", r.t_star, 1.0, 1e-6);
    return v.why();
}

std::string slope_reproduction() {
    Verdict v;
    ExperimentConfig c = load_config(fs::path(CGLDP_CONFIG_DIR) / "brownian-validate.json");
    v.require(c.grid_M == 2048, "config grid is not 2^11");
    v.require(c.mc && c.mc->paths == 10000000, "config does not use 10^7 paths");
    v.require(c.mc && c.mc->n_ladder == std::vector<int>{4, 8, 16}, "config ladder is not {4, 8, 16}");
    c.runtime.threads = std::max(1u, std::thread::hardware_concurrency());
    const fs::path out = fs::temp_directory_path() / "cgldp_acceptance_slope";
    fs::remove_all(out);
    const ValidateRun run = run_validate(c, out);
    for (const auto& e : run.slope.per_n) {
        const double exact = oracle::reflection(1.0, e.n);
        const double ratio = e.p_hat / exact;
        std::cout << "    n = " << e.n << "  pHat = " << e.p_hat << "  reflection = " << exact
                  << "  ratio = " << ratio << "\n";
        if (ratio < 0.9 || ratio > 1.02) {
            std::ostringstream os;
            os << "pHat/reflection = " << ratio << " at n = " << e.n << " outside [0.9, 1.02]";
            v.fail(os.str());
        }
    }
    std::cout << "    IHat = " << run.slope.rate_hat << "  r2 = " << run.slope.r2 << "\n";
    const double gap = std::abs(run.slope.rate_hat - 0.5) / 0.5;
    if (gap > 0.15) {
        std::ostringstream os;
        os << "IHat = " << run.slope.rate_hat << ", relative gap " << gap << " > 0.15";
        v.fail(os.str());
    }
    return v.why();
}

std::string fw_rkhs() {
    Verdict v;
    oracle::Gen gen(2024);
    struct Case {
        double a0, x, a1, y;
        std::vector<double> a, b;
        double operator()(double t) const {
            double f = x;
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double w = double(k + 1) * oracle::kPi;
                f += a[k] * std::sin(w * t) + b[k] * (1 - std::cos(w * t));
            }
            return f;
        }
    };
    // Five kernels with ten random smooth paths each.
    const double a1s[] = {1.0, -1.0, 0.3, 2.0, -0.5};
    const double ys[] = {1.0, 0.5, 1.5, 2.0, 0.8};
    std::vector<Case> cases;
    for (int k = 0; k < 5; ++k)
        for (int i = 0; i < 10; ++i) {
            Case c{gen.uniform(-1, 1), gen.uniform(-1, 1), a1s[k], ys[k], {}, {}};
            for (int j = gen.integer(1, 4); j > 0; --j) {
                c.a.push_back(gen.uniform(-1, 1));
                c.b.push_back(gen.uniform(-0.5, 0.5));
            }
            cases.push_back(std::move(c));
        }
    std::vector<double> prev(cases.size(), kInfinity);
    double worst = 0.0;
    for (std::size_t m : {256u, 1024u, 4096u}) {
        const TimeGrid g(m);
        worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const auto y = DiffusionPath::constant(g, ys[k], 0.01);
            const auto solver = QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(0, a1s[k], 0, y), g);
            for (int i = 0; i < 10; ++i) {
                const Case& c = cases[std::size_t(10 * k + i)];
                const Path f = Path::sample(g, c);
                const double fw = j_ou_fw(f, y, c.a0, c.a1, c.x);
                const double rk = j_ou_rkhs(f, y, c.a0, c.a1, c.x, solver);
                const double d = std::abs(fw - rk) / fw;
                auto& p = prev[std::size_t(10 * k + i)];
                if (!(d < p)) {
                    std::ostringstream os;
                    os << "discrepancy not decreasing at M = " << m << " for path " << 10 * k + i;
                    v.fail(os.str());
                }
                p = d;
                worst = std::max(worst, d);
            }
        }
    }
    std::cout << "    worst relative discrepancy at M = 4096: " << worst << "\n";
    if (worst > 1e-3) v.fail("relative discrepancy above 1e-3 at M = 4096");
    return v.why();
}

std::string reproducing() {
    Verdict v;
    const TimeGrid g(256);
    std::vector<double> yv(g.size());
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = 1.0 + 0.5 * std::sin(7.0 * g.point(i));
    const KernelModel ou = KernelModel::ornstein_uhlenbeck(0, 1, 0, DiffusionPath::constant(g, 1.0, 0.01));
    const KernelModel models[] = {
        KernelModel::brownian(),
        ou,
        KernelModel::ornstein_uhlenbeck(0, -0.7, 0, DiffusionPath(Path(g, yv), 0.1)),
        KernelModel::scaled(VariancePath(Path(g, yv), 0.1), KernelModel::brownian()),
        KernelModel::scaled(VariancePath::constant(g, 2.0, 0.1), ou),
    };
    double worst = 0.0;
    for (const auto& model : models) {
        const auto s = QuadFormSolver::for_model(model, g);
        const auto& k = s.gram();
        for (Eigen::Index i = 1; i < k.cols(); ++i) {
            std::vector<double> col(k.col(i).data(), k.col(i).data() + k.rows());
            const double got = rkhs_norm_sq(Path(g, std::move(col)), s);
            worst = std::max(worst, std::abs(got - k(i, i)) / k(i, i));
        }
    }
    std::cout << "    worst relative error: " << worst << "\n";
    if (worst > 1e-8) v.fail("reproducing property off by more than 1e-8");
    return v.why();
}

std::string hoelder() {
    Verdict v;
    const auto speed = [](int n) { return double(n); };
    const int ns[] = {1, 2, 4, 8, 16, 64};
    const TimeGrid g8(256), g10(1024);
    v.near("brownian", hoelder_tightness_bound(inverse_n_family(KernelModel::brownian()), speed, 0.5, g10, ns),
           1.0, 1e-12);
    const auto ou = [](const TimeGrid& g) {
        return inverse_n_family(KernelModel::ornstein_uhlenbeck(0, 1, 0, DiffusionPath::constant(g, 1.0, 0.01)));
    };
    const double h8 = hoelder_tightness_bound(ou(g8), speed, 0.5, g8, ns);
    const double h10 = hoelder_tightness_bound(ou(g10), speed, 0.5, g10, ns);
    std::cout << "    ou: " << h8 << " (M = 256), " << h10 << " (M = 1024)\n";
    v.require(std::isfinite(h8) && std::isfinite(h10), "ou value not finite");
    v.require(std::abs(h10 - h8) <= 0.02 * h10, "ou value moves more than 2% under refinement");
    return v.why();
}

std::string determinism() {
    Verdict v;
    const fs::path d = fs::temp_directory_path() / "cgldp_acceptance_det";
    fs::remove_all(d);
    const std::string cfg = (fs::path(CGLDP_CONFIG_DIR) / "brownian-validate-quick.json").string();
    v.require(cli("validate " + cfg + " --seed 11 --out " + (d / "a").string()) == 0, "first run failed");
    v.require(cli("validate " + cfg + " --seed 11 --out " + (d / "b").string()) == 0, "second run failed");
    v.require(cli("validate " + cfg + " --seed 11 --threads 1 --out " + (d / "t1").string()) == 0,
              "--threads 1 failed");
    v.require(cli("validate " + cfg + " --seed 11 --threads 8 --out " + (d / "t8").string()) == 0,
              "--threads 8 failed");
    for (const char* f : {"mc.csv", "slope.txt", "series.csv"}) {
        const std::string a = slurp(d / "a" / f);
        v.require(!a.empty() && a == slurp(d / "b" / f), std::string(f) + " differs between equal-seed runs");
    }
    const auto p1 = phat_column(slurp(d / "t1" / "mc.csv"));
    v.require(p1.size() == 3, "unexpected mc.csv layout");
    v.require(p1 == phat_column(slurp(d / "t8" / "mc.csv")), "pHat differs between 1 and 8 threads");
    return v.why();
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    const std::vector<Criterion> criteria = {
        {1, "brownian ruin rate", 1, brownian_ruin},
        {2, "random variance reduction", 1, random_variance},
        {3, "random mean gaussian prior", 1, random_mean},
        {4, "ou rate", 1, ou_rate},
        {5, "ldp slope reproduction", 600, slope_reproduction},
        {6, "freidlin-wentzell / rkhs equivalence", 60, fw_rkhs},
        {7, "reproducing property suite", 10, reproducing},
        {8, "hoelder tightness diagnostic", 10, hoelder},
        {9, "determinism", kInfinity, determinism},
    };

    int failures = 0;
    std::cout << std::setprecision(8);
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string why;
        try {
            why = c.run();
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (why.empty() && secs > c.time_limit) {
            std::ostringstream os;
            os << "took " << secs << " s, limit " << c.time_limit << " s";
            why = os.str();
        }
        std::cout << (why.empty() ? "PASS " : "FAIL ") << c.id << " " << c.name << " (" << std::fixed
                  << std::setprecision(2) << secs << " s)" << std::defaultfloat << std::setprecision(8);
        if (!why.empty()) std::cout << ": " << why;
        std::cout << std::endl;
        failures += !why.empty();
    }
    std::cout << (failures == 0 ? "acceptance: all criteria passed" : "acceptance: failures present") << std::endl;
    return failures == 0 ? 0 : 1;
}
