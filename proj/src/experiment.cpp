#include "cgldp/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cgldp/error.hpp"

#ifndef CGLDP_VERSION
#define CGLDP_VERSION "unknown"
#endif

namespace cgldp {

std::string library_version() { return CGLDP_VERSION; }

namespace {

std::ostringstream record_stream() {
    std::ostringstream os;
    os << std::setprecision(17);
    return os;
}

void write_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
    if (!out) throw Error("write failed for " + file.string());
}

// Each line is prefixed by `lead`; CSV files carry the same record as
// '#' comments above the header row.
void provenance(std::ostream& os, const ExperimentConfig& c, const std::string& digest,
                const char* lead = "") {
    os << lead << "version = " << library_version() << "\n";
    os << lead << "config_digest = " << digest << "\n";
    if (c.mc)
        os << lead << "master_seed = " << c.mc->master_seed << "\n";
    else
        os << lead << "master_seed = none\n";
    os << lead << "grid_M = " << c.grid_M << "\n";
}

}  // namespace

RateRun run_rate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const CrossingProblem problem = build_problem(config);
    RateRun run;
    run.digest = config_digest(config);
    run.result = minimize_rate(problem, build_search(config));
    const RateResult& r = run.result;

    auto rec = record_stream();
    provenance(rec, config, run.digest);
    rec << "I = " << r.rate << "\n";
    rec << "t_star = " << r.t_star << "\n";
    if (problem.is_ou()) {
        rec << "y_star = " << r.y_star[0] << "\n";
    } else {
        rec << "y1_star = " << r.y_star[0] << "\n";
        rec << "y2_star = " << r.y_star[1] << "\n";
    }

    auto prof = record_stream();
    provenance(prof, config, run.digest, "# ");
    prof << "t,rate\n";
    for (std::size_t i = 0; i < r.profile_t.size(); ++i) prof << r.profile_t[i] << "," << r.profile_rate[i] << "\n";

    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "rate.txt", rec.str());
    write_file(out_dir / "profile.csv", prof.str());
    return run;
}

ValidateRun run_validate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    if (!config.mc) throw ConfigError("mc: section is required for validate");
    const McSpec& mc = *config.mc;
    const CrossingProblem problem = build_problem(config);

    ValidateRun run;
    run.digest = config_digest(config);
    SearchSettings search = build_search(config);
    search.with_profile = false;
    run.theory_rate = minimize_rate(problem, search).rate;

    McSettings settings;
    settings.batch_size = mc.batch_size;
    settings.threads = config.runtime.threads;
    std::filesystem::create_directories(out_dir);

    auto table = record_stream();
    provenance(table, config, run.digest, "# ");
    table << "n,hits,paths,pHat,ciLo,ciHi\n";
    auto write_table = [&](const std::vector<MCEstimate>& rows) {
        for (const auto& e : rows)
            table << e.n << "," << e.hits << "," << e.paths << "," << e.p_hat << "," << e.ci_lo << ","
                  << e.ci_hi << "\n";
        write_file(out_dir / "mc.csv", table.str());
    };

    std::vector<MCEstimate> rungs;
    for (int n : mc.n_ladder) {
        rungs.push_back(mc_crossing_probability(problem, n, mc.paths, mc.master_seed, settings));
        const MCEstimate& e = rungs.back();
        if (e.hits < kMinHitsPerRung) {
            // Keep the ladder so far so the failing rung is inspectable.
            write_table(rungs);
            std::ostringstream os;
            os << "rung n = " << n << " has " << e.hits << " hits out of " << e.paths
               << " paths (need >= " << kMinHitsPerRung << ")";
            throw InsufficientHits(os.str());
        }
    }
    run.slope = fit_ldp_slope(std::move(rungs));
    const SlopeReport& s = run.slope;
    run.relative_gap = run.theory_rate > 0.0 ? std::abs(s.rate_hat - run.theory_rate) / run.theory_rate
                                             : std::abs(s.rate_hat);
    write_table(s.per_n);

    auto rec = record_stream();
    provenance(rec, config, run.digest);
    rec << "paths = " << mc.paths << "\n";
    rec << "batch_size = " << mc.batch_size << "\n";
    rec << "n_ladder =";
    for (int n : mc.n_ladder) rec << " " << n;
    rec << "\n";
    rec << "I_hat = " << s.rate_hat << "\n";
    rec << "I_theory = " << run.theory_rate << "\n";
    rec << "relative_gap = " << run.relative_gap << "\n";
    rec << "r2 = " << s.r2 << "\n";
    rec << "intercept = " << s.intercept << "\n";
    write_file(out_dir / "slope.txt", rec.str());

    auto series = record_stream();
    provenance(series, config, run.digest, "# ");
    series << "n,log_pHat\n";
    for (const auto& e : s.per_n) series << e.n << "," << std::log(e.p_hat) << "\n";
    write_file(out_dir / "series.csv", series.str());
    return run;
}

}  // namespace cgldp
