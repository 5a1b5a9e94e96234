#include "cgldp/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "cgldp/error.hpp"

namespace cgldp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

// Reads one JSON object and remembers which keys were consumed so leftovers
// can be reported as unknown fields.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key, std::optional<double> def = {}) {
        if (!has(key)) {
            if (def) return *def;
            fail(field(key), "is required");
        }
        const json& v = raw(key);
        if (!v.is_number()) fail(field(key), "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(field(key), "must be finite");
        return d;
    }

    std::uint64_t unsigned_int(const std::string& key, std::optional<std::uint64_t> def = {}) {
        if (!has(key)) {
            if (def) return *def;
            fail(field(key), "is required");
        }
        return as_unsigned(raw(key), field(key));
    }

    std::string string(const std::string& key, std::optional<std::string> def = {}) {
        if (!has(key)) {
            if (def) return *def;
            fail(field(key), "is required");
        }
        const json& v = raw(key);
        if (!v.is_string()) fail(field(key), "must be a string");
        return v.get<std::string>();
    }

    ObjectReader child(const std::string& key) {
        if (!has(key)) fail(field(key), "is required");
        return ObjectReader(raw(key), field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(field(it.key()), "unknown field");
    }

    static std::uint64_t as_unsigned(const json& v, const std::string& where) {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) {
            if (v.get<std::int64_t>() < 0) fail(where, "must be a non-negative integer");
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        if (v.is_number_float()) {
            // Accept 1e7 and friends as long as they are exact integers.
            const double d = v.get<double>();
            if (d >= 0.0 && d < 0x1p64 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
        }
        fail(where, "must be a non-negative integer");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

PriorSpec read_prior(ObjectReader r) {
    const std::string type = r.string("type");
    PriorSpec p;
    if (type == "degenerate") {
        p.law = Degenerate{r.number("value")};
    } else if (type == "uniform") {
        p.law = UniformSupport{r.number("a"), r.number("b")};
    } else if (type == "gaussian") {
        p.law = GaussianPerturbation{r.number("center"), r.number("variance")};
    } else {
        fail(r.field("type"), "must be one of degenerate, uniform, gaussian (got \"" + type + "\")");
    }
    r.finish();
    return p;
}

json write_prior(const PriorSpec& p) {
    if (const auto* d = std::get_if<Degenerate>(&p.law)) return {{"type", "degenerate"}, {"value", d->value}};
    if (const auto* u = std::get_if<UniformSupport>(&p.law))
        return {{"type", "uniform"}, {"a", u->a}, {"b", u->b}};
    const auto& g = std::get<GaussianPerturbation>(p.law);
    return {{"type", "gaussian"}, {"center", g.center}, {"variance", g.variance}};
}

void check_prior(const PriorSpec& p, Slot slot, double alpha, const std::string& path) {
    if (slot != Slot::Mean) {
        const std::string floor = " must be >= alpha (" + std::to_string(alpha) + ")";
        if (const auto* d = std::get_if<Degenerate>(&p.law); d && d->value < alpha)
            fail(path + ".value", floor);
        if (const auto* u = std::get_if<UniformSupport>(&p.law); u && u->a < alpha)
            fail(path + ".a", floor);
        if (const auto* g = std::get_if<GaussianPerturbation>(&p.law); g && g->center < alpha)
            fail(path + ".center", floor);
    }
    if (const auto* u = std::get_if<UniformSupport>(&p.law); u && !(u->a < u->b))
        fail(path + ".b", "must be greater than a");
    if (const auto* g = std::get_if<GaussianPerturbation>(&p.law); g && !(g->variance > 0.0))
        fail(path + ".variance", "must be > 0");
    try {
        PriorModel(p.law, slot, alpha);
    } catch (const InvalidConfig& e) {
        fail(path, e.what());
    }
}

bool is_power_of_two(std::size_t m) { return m >= 2 && (m & (m - 1)) == 0; }

json to_json(const ExperimentConfig& c) {
    json j;
    j["family"] = c.family == ExperimentConfig::Family::OrnsteinUhlenbeck ? "ou" : "rmv";
    j["grid"] = {{"M", c.grid_M}};
    j["level"] = c.level;
    j["alpha"] = c.alpha;

    switch (c.barrier.kind) {
        case BarrierSpec::Kind::Zero: j["barrier"] = {{"type", "zero"}}; break;
        case BarrierSpec::Kind::Linear: j["barrier"] = {{"type", "linear"}, {"slope", c.barrier.slope}}; break;
        case BarrierSpec::Kind::Table: j["barrier"] = {{"type", "table"}, {"values", c.barrier.values}}; break;
    }

    if (c.family == ExperimentConfig::Family::RandomMeanVariance) {
        if (c.kernel.kind == KernelSpec::Kind::Brownian)
            j["kernel"] = {{"type", "brownian"}};
        else
            j["kernel"] = {{"type", "ou"}, {"a1", c.kernel.a1}, {"y", c.kernel.y}};
        j["priors"] = {{"y1", write_prior(c.y1)}, {"y2", write_prior(c.y2)}};
    } else {
        j["ou"] = {{"a0", c.a0}, {"a1", c.a1}, {"x", c.x}};
        j["priors"] = {{"y", write_prior(c.y)}};
    }

    j["search"] = {{"t_grid_refine", c.search.t_grid_refine},
                   {"y_scan_points", c.search.y_scan_points},
                   {"tol", c.search.tol}};
    if (c.mc) {
        j["mc"] = {{"n_ladder", c.mc->n_ladder},
                   {"paths", c.mc->paths},
                   {"master_seed", c.mc->master_seed},
                   {"batch_size", c.mc->batch_size}};
    }
    j["runtime"] = {{"threads", c.runtime.threads}, {"out_dir", c.runtime.out_dir}};
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
    }

    ExperimentConfig c;
    ObjectReader r(root, "");

    const std::string family = r.string("family");
    if (family == "rmv")
        c.family = ExperimentConfig::Family::RandomMeanVariance;
    else if (family == "ou")
        c.family = ExperimentConfig::Family::OrnsteinUhlenbeck;
    else
        fail("family", "must be \"rmv\" or \"ou\" (got \"" + family + "\")");

    {
        ObjectReader g = r.child("grid");
        c.grid_M = g.unsigned_int("M");
        g.finish();
    }
    c.level = r.number("level", 1.0);
    c.alpha = r.number("alpha", kDefaultAlpha);

    if (r.has("barrier")) {
        ObjectReader b = r.child("barrier");
        const std::string type = b.string("type");
        if (type == "zero") {
            c.barrier.kind = BarrierSpec::Kind::Zero;
        } else if (type == "linear") {
            c.barrier.kind = BarrierSpec::Kind::Linear;
            c.barrier.slope = b.number("slope");
        } else if (type == "table") {
            c.barrier.kind = BarrierSpec::Kind::Table;
            const json& v = b.raw("values");
            if (!v.is_array()) fail(b.field("values"), "must be an array of numbers");
            for (const auto& e : v) {
                if (!e.is_number()) fail(b.field("values"), "must be an array of numbers");
                c.barrier.values.push_back(e.get<double>());
            }
        } else {
            fail(b.field("type"), "must be one of zero, linear, table (got \"" + type + "\")");
        }
        b.finish();
    }

    ObjectReader priors = r.child("priors");
    if (c.family == ExperimentConfig::Family::RandomMeanVariance) {
        if (r.has("kernel")) {
            ObjectReader k = r.child("kernel");
            const std::string type = k.string("type");
            if (type == "brownian") {
                c.kernel.kind = KernelSpec::Kind::Brownian;
            } else if (type == "ou") {
                c.kernel.kind = KernelSpec::Kind::OrnsteinUhlenbeck;
                c.kernel.a1 = k.number("a1");
                c.kernel.y = k.number("y", 1.0);
            } else {
                fail(k.field("type"), "must be \"brownian\" or \"ou\" (got \"" + type + "\")");
            }
            k.finish();
        }
        c.y1 = read_prior(priors.child("y1"));
        c.y2 = read_prior(priors.child("y2"));
    } else {
        ObjectReader o = r.child("ou");
        c.a0 = o.number("a0", 0.0);
        c.a1 = o.number("a1", 0.0);
        c.x = o.number("x", 0.0);
        o.finish();
        c.y = read_prior(priors.child("y"));
    }
    priors.finish();

    if (r.has("search")) {
        ObjectReader s = r.child("search");
        c.search.t_grid_refine = static_cast<int>(s.unsigned_int("t_grid_refine", 0));
        c.search.y_scan_points = static_cast<int>(s.unsigned_int("y_scan_points", 64));
        c.search.tol = s.number("tol", 1e-9);
        s.finish();
    }

    if (r.has("mc")) {
        ObjectReader m = r.child("mc");
        McSpec mc;
        const json& ladder = m.raw("n_ladder");
        if (!ladder.is_array()) fail(m.field("n_ladder"), "must be an array of integers");
        for (const auto& e : ladder) {
            const auto n = ObjectReader::as_unsigned(e, m.field("n_ladder"));
            if (n > 1'000'000'000u) fail(m.field("n_ladder"), "entries must be <= 1e9");
            mc.n_ladder.push_back(static_cast<int>(n));
        }
        mc.paths = m.unsigned_int("paths");
        mc.master_seed = m.unsigned_int("master_seed");
        mc.batch_size = m.unsigned_int("batch_size", 1u << 14);
        m.finish();
        c.mc = std::move(mc);
    }

    if (r.has("runtime")) {
        ObjectReader rt = r.child("runtime");
        c.runtime.threads = static_cast<unsigned>(rt.unsigned_int("threads", 1));
        c.runtime.out_dir = rt.string("out_dir", "out");
        rt.finish();
    }
    r.finish();

    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    if (!is_power_of_two(c.grid_M)) fail("grid.M", "must be a power of two >= 2");
    if (c.grid_M > (1u << 16)) fail("grid.M", "must be <= 65536");
    if (!std::isfinite(c.level)) fail("level", "must be finite");
    if (!(c.alpha > 0.0 && std::isfinite(c.alpha))) fail("alpha", "must be > 0");

    if (c.barrier.kind == BarrierSpec::Kind::Table) {
        if (c.barrier.values.size() < 2) fail("barrier.values", "needs at least 2 samples");
        for (double v : c.barrier.values)
            if (!std::isfinite(v)) fail("barrier.values", "must be finite");
    }
    if (!std::isfinite(c.barrier.slope)) fail("barrier.slope", "must be finite");

    if (c.family == ExperimentConfig::Family::RandomMeanVariance) {
        if (c.kernel.kind == KernelSpec::Kind::OrnsteinUhlenbeck) {
            if (std::abs(c.kernel.a1) > 50.0) fail("kernel.a1", "must satisfy |a1| <= 50");
            if (!(c.kernel.y >= c.alpha)) fail("kernel.y", "must be >= alpha");
        }
        check_prior(c.y1, Slot::Variance, c.alpha, "priors.y1");
        check_prior(c.y2, Slot::Mean, c.alpha, "priors.y2");
    } else {
        if (std::abs(c.a1) > 50.0) fail("ou.a1", "must satisfy |a1| <= 50");
        if (!std::isfinite(c.a0)) fail("ou.a0", "must be finite");
        if (!std::isfinite(c.x)) fail("ou.x", "must be finite");
        check_prior(c.y, Slot::Diffusion, c.alpha, "priors.y");
    }

    if (c.search.t_grid_refine < 0 || c.search.t_grid_refine > 6)
        fail("search.t_grid_refine", "must be in [0, 6]");
    if (c.search.y_scan_points < 3 || c.search.y_scan_points > 4096)
        fail("search.y_scan_points", "must be in [3, 4096]");
    if (!(c.search.tol > 0.0 && c.search.tol < 1.0)) fail("search.tol", "must be in (0, 1)");

    if (c.mc) {
        if (c.mc->n_ladder.empty()) fail("mc.n_ladder", "must not be empty");
        for (std::size_t i = 0; i < c.mc->n_ladder.size(); ++i) {
            if (c.mc->n_ladder[i] < 1) fail("mc.n_ladder", "entries must be >= 1");
            if (i > 0 && c.mc->n_ladder[i] <= c.mc->n_ladder[i - 1])
                fail("mc.n_ladder", "must be strictly increasing");
        }
        if (c.mc->paths < 1) fail("mc.paths", "must be >= 1");
        if (c.mc->batch_size < 1) fail("mc.batch_size", "must be >= 1");
    }
    if (c.runtime.threads < 1 || c.runtime.threads > 1024)
        fail("runtime.threads", "must be in [1, 1024]");
}

std::string to_canonical_json(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_digest(const ExperimentConfig& config) {
    json j = to_json(config);
    j.erase("runtime");
    const std::string text = j.dump();

    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("config_digest: SHA-256 failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

Path build_barrier(const ExperimentConfig& c) {
    const TimeGrid grid(c.grid_M);
    switch (c.barrier.kind) {
        case BarrierSpec::Kind::Zero:
            return Path::zero(grid);
        case BarrierSpec::Kind::Linear:
            return Path::sample(grid, [s = c.barrier.slope](double t) { return s * t; });
        case BarrierSpec::Kind::Table: {
            const auto& v = c.barrier.values;
            const double cells = static_cast<double>(v.size() - 1);
            return Path::sample(grid, [&](double t) {
                const double u = t * cells;
                const auto k = std::min(static_cast<std::size_t>(u), v.size() - 2);
                const double w = u - static_cast<double>(k);
                return (1.0 - w) * v[k] + w * v[k + 1];
            });
        }
    }
    throw std::logic_error("build_barrier: unknown barrier kind");
}

CrossingProblem build_problem(const ExperimentConfig& c) {
    const TimeGrid grid(c.grid_M);
    Path barrier = build_barrier(c);
    if (c.family == ExperimentConfig::Family::OrnsteinUhlenbeck) {
        RandomDiffusionOU ou{c.a0, c.a1, c.x, PriorModel(c.y.law, Slot::Diffusion, c.alpha)};
        return CrossingProblem(std::move(ou), std::move(barrier), c.level);
    }
    KernelModel base = c.kernel.kind == KernelSpec::Kind::Brownian
                           ? KernelModel::brownian()
                           : KernelModel::ornstein_uhlenbeck(
                                 0.0, c.kernel.a1, 0.0, PositivePath::constant(grid, c.kernel.y, c.alpha));
    RandomMeanVariance rmv{std::move(base), PriorModel(c.y1.law, Slot::Variance, c.alpha),
                           PriorModel(c.y2.law, Slot::Mean, c.alpha)};
    return CrossingProblem(std::move(rmv), std::move(barrier), c.level);
}

SearchSettings build_search(const ExperimentConfig& c) {
    SearchSettings s;
    s.t_grid_refine = c.search.t_grid_refine;
    s.y_scan_points = c.search.y_scan_points;
    s.value_tol = c.search.tol;
    return s;
}

}  // namespace cgldp
