#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "cgldp/experiment.hpp"

namespace cgldp {

namespace {

struct Check {
    const char* name;
    std::function<std::string()> run;  // empty string on success, else the reason
};

std::string near(double got, double want, double tol) {
    if (std::abs(got - want) <= tol) return {};
    std::ostringstream os;
    os << std::setprecision(12) << "got " << got << ", want " << want << " +- " << tol;
    return os.str();
}

CrossingProblem rmv_problem(PriorModel::Law y1, PriorModel::Law y2, std::size_t m = 64) {
    const TimeGrid g(m);
    return CrossingProblem(RandomMeanVariance{KernelModel::brownian(), PriorModel(y1, Slot::Variance),
                                              PriorModel(y2, Slot::Mean)},
                           Path::zero(g), 1.0);
}

CrossingProblem ou_problem(std::size_t m = 64) {
    const TimeGrid g(m);
    return CrossingProblem(RandomDiffusionOU{0.0, 1.0, 0.0, PriorModel(Degenerate{1.0}, Slot::Diffusion)},
                           Path::zero(g), 1.0);
}

std::vector<Check> checks() {
    std::vector<Check> out;

    out.push_back({"brownian ruin rate", [] {
                       const auto r = minimize_rate(rmv_problem(Degenerate{1.0}, Degenerate{0.0}));
                       if (auto e = near(r.rate, 0.5, 1e-9); !e.empty()) return e;
                       return near(r.t_star, 1.0, 1e-6);
                   }});
    out.push_back({"uniform variance prior", [] {
                       const auto r = minimize_rate(rmv_problem(UniformSupport{1.0, 2.0}, Degenerate{0.0}));
                       if (auto e = near(r.rate, 0.125, 1e-8); !e.empty()) return e;
                       return near(r.y_star[0], 2.0, 1e-6);
                   }});
    out.push_back({"gaussian mean prior", [] {
                       const auto r =
                           minimize_rate(rmv_problem(Degenerate{1.0}, GaussianPerturbation{0.0, 1.0}));
                       if (auto e = near(r.rate, 0.25, 1e-8); !e.empty()) return e;
                       return near(r.y_star[1], 0.5, 1e-5);
                   }});
    out.push_back({"ou ruin rate", [] {
                       const auto r = minimize_rate(ou_problem());
                       return near(r.rate, 1.0 / std::expm1(2.0), 1e-8);
                   }});
    out.push_back({"brute force oracle", [] {
                       const auto b = brute_force_rate(rmv_problem(Degenerate{1.0}, Degenerate{0.0}));
                       if (auto e = near(b.rate, 0.5, 1e-6); !e.empty()) return e;
                       return near(brute_force_rate(ou_problem()).rate, 1.0 / std::expm1(2.0), 1e-6);
                   }});
    out.push_back({"kernel symmetry", [] {
                       const TimeGrid g(16);
                       const KernelModel models[] = {
                           KernelModel::brownian(),
                           KernelModel::ornstein_uhlenbeck(0.5, -0.7, 0.2, DiffusionPath::constant(g, 1.3, 0.01)),
                           KernelModel::scaled(VariancePath::constant(g, 2.0, 0.01), KernelModel::brownian()),
                       };
                       std::mt19937_64 gen(7);
                       std::uniform_real_distribution<double> u(0.0, 1.0);
                       for (const auto& m : models)
                           for (int i = 0; i < 1000; ++i) {
                               const double s = u(gen), t = u(gen);
                               if (m.cov(s, t) != m.cov(t, s)) return std::string("cov(s,t) != cov(t,s)");
                           }
                       return std::string();
                   }});
    out.push_back({"reproducing property", [] {
                       const TimeGrid g(64);
                       const KernelModel models[] = {
                           KernelModel::brownian(),
                           KernelModel::ornstein_uhlenbeck(0.0, 1.0, 0.0, DiffusionPath::constant(g, 1.0, 0.01)),
                       };
                       for (const auto& m : models) {
                           const QuadFormSolver solver = QuadFormSolver::for_model(m, g);
                           const auto& k = solver.gram();
                           for (std::size_t i = 1; i < g.size(); ++i) {
                               std::vector<double> col(k.col(static_cast<Eigen::Index>(i)).data(),
                                                       k.col(static_cast<Eigen::Index>(i)).data() + g.size());
                               const double q = rkhs_norm_sq(Path(g, col), solver);
                               const double want = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
                               if (std::abs(q - want) > 1e-8 * want) return near(q, want, 1e-8 * want);
                           }
                       }
                       return std::string();
                   }});
    out.push_back({"freidlin-wentzell vs rkhs", [] {
                       const TimeGrid g(1024);
                       const auto y = DiffusionPath::constant(g, 2.0, 0.01);
                       const Path f = Path::sample(g, [](double t) { return t; });
                       const QuadFormSolver solver =
                           QuadFormSolver::for_model(KernelModel::ornstein_uhlenbeck(0.0, 1.0, 0.0, y), g);
                       const double fw = j_ou_fw(f, y, 0.0, 1.0, 0.0);
                       const double rk = j_ou_rkhs(f, y, 0.0, 1.0, 0.0, solver);
                       return near(rk, fw, 1e-3 * (1.0 + fw));
                   }});
    out.push_back({"hoelder bound", [] {
                       const TimeGrid g(64);
                       const int ns[] = {1, 2, 8};
                       const double v =
                           hoelder_tightness_bound(inverse_n_family(KernelModel::brownian()),
                                                   [](int n) { return static_cast<double>(n); }, 0.5, g, ns);
                       return near(v, 1.0, 1e-12);
                   }});
    out.push_back({"monte carlo partition invariance", [] {
                       const auto p = rmv_problem(Degenerate{1.0}, Degenerate{0.0});
                       const McSettings one{1000, 1}, many{1000, 3};
                       const auto a = mc_crossing_probability(p, 4, 20000, 99, one);
                       const auto b = mc_crossing_probability(p, 4, 20000, 99, many);
                       if (!(a == b)) return std::string("threads changed the estimate");
                       if (!(a.ci_lo <= a.p_hat && a.p_hat <= a.ci_hi)) return std::string("CI misses pHat");
                       return std::string();
                   }});
    out.push_back({"config round trip", [] {
                       ExperimentConfig c;
                       c.family = ExperimentConfig::Family::OrnsteinUhlenbeck;
                       c.a1 = 1.0;
                       c.y.law = GaussianPerturbation{1.0, 0.04};
                       c.barrier.kind = BarrierSpec::Kind::Table;
                       c.barrier.values = {0.0, 0.1, 0.3};
                       c.mc = McSpec{{4, 8}, 1000, 5, 256};
                       const ExperimentConfig back = parse_config(to_canonical_json(c));
                       if (!(back == c)) return std::string("parse(serialize(c)) != c");
                       return std::string();
                   }});
    return out;
}

}  // namespace

int run_selftest(std::ostream& out) {
    int failures = 0;
    for (const auto& c : checks()) {
        std::string why;
        try {
            why = c.run();
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        if (why.empty()) {
            out << "PASS " << c.name << "\n";
        } else {
            ++failures;
            out << "FAIL " << c.name << " (" << why << ")\n";
        }
    }
    out << (failures == 0 ? "selftest: all checks passed\n" : "selftest: failures present\n");
    return failures;
}

}  // namespace cgldp
