// cgldp: crossing rates and Monte Carlo validation from a JSON config.
//
//   cgldp rate <config> [--grid M] [--out DIR]
//   cgldp validate <config> [--seed S] [--grid M] [--out DIR] [--threads K]
//   cgldp selftest
//
// Exit codes: 0 success, 2 config error, 3 no finite rate, 4 insufficient
// Monte Carlo hits, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cgldp/error.hpp"
#include "cgldp/experiment.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

cgldp::ExperimentConfig prepare(const std::string& file, const Overrides& o) {
    cgldp::ExperimentConfig c = cgldp::load_config(file);
    if (o.grid) c.grid_M = *o.grid;
    if (o.seed) {
        if (!c.mc) throw cgldp::ConfigError("--seed: config has no mc section");
        c.mc->master_seed = *o.seed;
    }
    if (o.out) c.runtime.out_dir = *o.out;
    if (o.threads) c.runtime.threads = *o.threads;
    cgldp::validate(c);
    return c;
}

int run(int argc, char** argv) {
    CLI::App app{"Large-deviation crossing rates for conditionally Gaussian processes", "cgldp"};
    app.set_version_flag("--version", cgldp::library_version());
    app.require_subcommand(1);

    Overrides o;
    std::string config;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "Experiment config (JSON)")->required();
        sub->add_option("--grid", o.grid, "Override grid.M (power of two)");
        sub->add_option("--out", o.out, "Output directory (default: runtime.out_dir)");
    };

    CLI::App* rate = app.add_subcommand("rate", "Minimize the crossing rate, write rate.txt and profile.csv");
    add_common(rate);

    CLI::App* validate = app.add_subcommand(
        "validate", "Monte Carlo ladder and slope fit, write mc.csv, slope.txt and series.csv");
    add_common(validate);
    validate->add_option("--seed", o.seed, "Override mc.master_seed");
    validate->add_option("--threads", o.threads, "Worker threads (does not change results)")
        ->check(CLI::Range(1u, 1024u));

    CLI::App* selftest = app.add_subcommand("selftest", "Run invariant checks on built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*selftest) return cgldp::run_selftest(std::cout) == 0 ? 0 : 1;

    const cgldp::ExperimentConfig c = prepare(config, o);
    if (*rate) {
        const auto r = cgldp::run_rate(c, c.runtime.out_dir);
        std::cout << std::setprecision(17) << "I = " << r.result.rate << "\nt_star = " << r.result.t_star
                  << "\nwritten to " << c.runtime.out_dir << "\n";
        return 0;
    }
    const auto v = cgldp::run_validate(c, c.runtime.out_dir);
    std::cout << std::setprecision(17) << "I_hat = " << v.slope.rate_hat << "\nI_theory = " << v.theory_rate
              << "\nrelative_gap = " << v.relative_gap << "\nwritten to " << c.runtime.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cgldp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cgldp::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cgldp::NoFiniteRate& e) {
        std::cerr << "no finite rate: " << e.what() << "\n";
        return 3;
    } catch (const cgldp::InsufficientHits& e) {
        std::cerr << "insufficient hits: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
