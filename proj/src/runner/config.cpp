#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "clockinterf/errors.hpp"
#include "clockinterf/runner.hpp"

namespace clockinterf::runner {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so that leftovers
// can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
    }

    [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = object_.find(key);
        return it == object_.end() ? nullptr : &*it;
    }

    [[nodiscard]] bool has(const std::string& key) const { return object_.contains(key); }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) throw ConfigError(key_path(key), "must be finite");
        return x;
    }

    // Lifetimes: number > 0, or null / "inf" for an infinite lifetime.
    double lifetime(const std::string& key) {
        const json* v = find(key);
        if (!v || v->is_null()) return kInfiniteLifetime;
        if (v->is_string() && (v->get<std::string>() == "inf" || v->get<std::string>() == "infinity")) {
            return kInfiniteLifetime;
        }
        if (!v->is_number()) throw ConfigError(key_path(key), "expected a positive number, null or \"inf\"");
        const double x = v->get<double>();
        if (!(x > 0.0)) throw ConfigError(key_path(key), "lifetimes must be > 0");
        return x;
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
        if (v->is_number_float()) {
            const double x = v->get<double>();
            if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
        }
        throw ConfigError(key_path(key), "expected a non-negative integer");
    }

    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
        return v->get<std::string>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
        return v->get<bool>();
    }

    void reject_unknown() const {
        for (const auto& [key, value] : object_.items()) {
            if (!seen_.contains(key)) throw ConfigError(key_path(key), "unknown key");
        }
    }

private:
    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

json lifetime_json(double tau) { return std::isinf(tau) ? json("inf") : json(tau); }

Units units_from(const std::string& s, const std::string& path) {
    if (s == "physical") return Units::physical;
    if (s == "scaled") return Units::scaled;
    throw ConfigError(path, "expected \"physical\" or \"scaled\"");
}

Preparation prep_from(const std::string& s, const std::string& path) {
    if (s == "tripod") return Preparation::tripod;
    if (s == "double_pi_half") return Preparation::double_pi_half;
    throw ConfigError(path, "expected \"tripod\" or \"double_pi_half\"");
}

OutputFormat format_from(const std::string& s, const std::string& path) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError(path, "expected \"csv\" or \"json\"");
}

void validate(const RunConfig& c) {
    if (!(c.f1 > 0.0)) throw ConfigError("f1", "clock 1 frequency must be > 0");
    if (!(c.f2 > c.f1)) {
        throw ConfigError("f2", "clock 2 must have a larger transition frequency than clock 1 (need f2 > f1)");
    }
    if (c.interrogation_s < 0.0) throw ConfigError("interrogation_s", "must be >= 0");
    if (c.n_phases < kMinPhases) throw ConfigError("n_phases", "must be >= 8 for a well-posed fringe fit");
    if (c.t_grid.count < 1) throw ConfigError("t_grid.count", "must be >= 1");
    if (c.t_grid.start < 0.0) throw ConfigError("t_grid.start", "must be >= 0");
    if (c.t_grid.count > 1 && !(c.t_grid.stop > c.t_grid.start)) throw ConfigError("t_grid.stop", "must exceed start");
    if (c.threads < 1) throw ConfigError("threads", "must be >= 1");

    if (c.redshift) {
        if (!(c.redshift->g > 0.0)) throw ConfigError("redshift.g", "must be > 0");
    }
    if (c.has_shift()) {
        const double eps = std::abs(c.shift().to_double());
        const std::string key = c.eps ? "eps" : "redshift.delta_h";
        if (c.units == Units::physical && !(eps < max_abs_shift(ShiftRegime::physical))) {
            throw ConfigError(key, "physical units require |eps| < 1e-3 (lowest-order redshift); use units "
                                   "\"scaled\" for exaggerated shifts");
        }
        if (c.units == Units::scaled && !(eps < max_abs_shift(ShiftRegime::scaled))) {
            throw ConfigError(key, "scaled units require |eps| < 0.1");
        }
    }
    if ((c.mode == Mode::redshift_compare || c.mode == Mode::stack) && !c.has_shift()) {
        throw ConfigError("eps", "mode " + to_string(c.mode) + " needs \"eps\" or a \"redshift\" block");
    }
    if (c.mode == Mode::visibility || c.mode == Mode::redshift_compare) {
        if (c.t_grid.count < 8) throw ConfigError("t_grid.count", "visibility curves need at least 8 points");
    }
    if (c.stack.n_periods < 1) throw ConfigError("stack.n_periods", "must be >= 1");
    if (c.stack.points_per_period < 8) throw ConfigError("stack.points_per_period", "must be >= 8");
    if (c.stack.n_phases < kMinPhases) throw ConfigError("stack.n_phases", "must be >= 8");
    if (!(c.stack.tau_s > 0.0)) throw ConfigError("stack.tau_s", "must be > 0");
    if (c.montecarlo.replicates < 2) throw ConfigError("montecarlo.replicates", "must be >= 2");
    if (c.montecarlo.atoms.empty()) throw ConfigError("montecarlo.atoms", "must list at least one atom number");
    for (std::size_t i = 0; i < c.montecarlo.atoms.size(); ++i) {
        if (c.montecarlo.atoms[i] < 1) {
            throw ConfigError("montecarlo.atoms[" + std::to_string(i) + "]", "atom numbers must be >= 1");
        }
    }
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::fringe: return "fringe";
        case Mode::visibility: return "visibility";
        case Mode::redshift_compare: return "redshift-compare";
        case Mode::stack: return "stack";
        case Mode::montecarlo: return "montecarlo";
    }
    return "?";
}

std::optional<Mode> mode_from_string(const std::string& name) {
    for (Mode m : {Mode::fringe, Mode::visibility, Mode::redshift_compare, Mode::stack, Mode::montecarlo}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

DoubleWord RunConfig::shift() const {
    if (eps) return DoubleWord{*eps};
    if (redshift) return redshift_factor(*redshift);
    return DoubleWord{0.0};
}

json RunConfig::to_json() const {
    json j;
    j["mode"] = to_string(mode);
    j["units"] = units == Units::physical ? "physical" : "scaled";
    j["f1"] = f1;
    j["f2"] = f2;
    j["prep"] = prep == Preparation::tripod ? "tripod" : "double_pi_half";
    j["interrogation_s"] = interrogation_s;
    j["n_phases"] = n_phases;
    j["t_grid"] = {{"start", t_grid.start}, {"stop", t_grid.stop}, {"count", t_grid.count}};
    if (redshift) j["redshift"] = {{"g", redshift->g}, {"delta_h", redshift->delta_h}};
    if (eps) j["eps"] = *eps;
    if (noise) {
        json n = {{"tau_coherence_s", lifetime_json(noise->tau_coherence_s)},
                  {"tau_clock_s", lifetime_json(noise->tau_clock_s)},
                  {"tau_trap_s", lifetime_json(noise->tau_trap_s)}};
        if (sample) n["atoms_per_point"] = noise->atoms_per_point;
        j["noise"] = n;
    }
    j["fit_decay"] = fit_decay;
    j["stack"] = {{"n_periods", stack.n_periods},
                  {"points_per_period", stack.points_per_period},
                  {"n_phases", stack.n_phases},
                  {"tau_s", stack.tau_s}};
    j["montecarlo"] = {{"replicates", montecarlo.replicates}, {"atoms", montecarlo.atoms}, {"t_s", montecarlo.t_s}};
    j["out"] = output_dir.generic_string();
    j["seed"] = seed;
    j["threads"] = threads;
    j["format"] = format == OutputFormat::csv ? "csv" : "json";
    return j;
}

RunConfig parse_config(const json& doc) {
    ObjectReader root(doc, "");
    RunConfig c;

    const std::string mode = root.string("mode", "");
    if (mode.empty()) throw ConfigError("mode", "missing (one of fringe, visibility, redshift-compare, stack, montecarlo)");
    if (const auto m = mode_from_string(mode)) {
        c.mode = *m;
    } else {
        throw ConfigError("mode", "unknown mode \"" + mode + "\"");
    }
    c.units = units_from(root.string("units", "physical"), "units");
    if (!root.has("f1")) throw ConfigError("f1", "missing");
    if (!root.has("f2")) throw ConfigError("f2", "missing");
    c.f1 = root.number("f1", c.f1);
    c.f2 = root.number("f2", c.f2);
    c.prep = prep_from(root.string("prep", "tripod"), "prep");
    c.interrogation_s = root.number("interrogation_s", 0.0);
    {
        const std::uint64_t n = root.unsigned_int("n_phases", kDefaultPhases);
        if (n > 1'000'000) throw ConfigError("n_phases", "too large");
        c.n_phases = static_cast<int>(n);
    }

    if (const json* grid = root.find("t_grid")) {
        ObjectReader r(*grid, "t_grid");
        c.t_grid.start = r.number("start", c.t_grid.start);
        c.t_grid.stop = r.number("stop", c.t_grid.stop);
        c.t_grid.count = r.unsigned_int("count", c.t_grid.count);
        r.reject_unknown();
    }
    if (const json* rs = root.find("redshift")) {
        ObjectReader r(*rs, "redshift");
        RedshiftContext ctx;
        ctx.g = r.number("g", 9.8);
        if (!r.has("delta_h")) throw ConfigError("redshift.delta_h", "missing");
        ctx.delta_h = r.number("delta_h", 0.0);
        r.reject_unknown();
        c.redshift = ctx;
    }
    if (root.has("eps")) {
        if (c.redshift) throw ConfigError("eps", "give either \"eps\" or a \"redshift\" block, not both");
        c.eps = root.number("eps", 0.0);
    }
    if (const json* nz = root.find("noise")) {
        ObjectReader r(*nz, "noise");
        NoiseConfig n;
        if (r.has("atoms_per_point")) {
            n.atoms_per_point = r.unsigned_int("atoms_per_point", n.atoms_per_point);
            if (n.atoms_per_point < 1) throw ConfigError("noise.atoms_per_point", "must be >= 1");
            c.sample = true;
        }
        n.tau_coherence_s = r.lifetime("tau_coherence_s");
        n.tau_clock_s = r.lifetime("tau_clock_s");
        n.tau_trap_s = r.lifetime("tau_trap_s");
        r.reject_unknown();
        c.noise = n;
    }
    c.fit_decay = root.boolean("fit_decay", false);
    if (const json* st = root.find("stack")) {
        ObjectReader r(*st, "stack");
        c.stack.n_periods = r.unsigned_int("n_periods", c.stack.n_periods);
        c.stack.points_per_period = static_cast<int>(r.unsigned_int("points_per_period", 16));
        c.stack.n_phases = static_cast<int>(r.unsigned_int("n_phases", 32));
        c.stack.tau_s = r.number("tau_s", c.stack.tau_s);
        r.reject_unknown();
    }
    if (const json* mc = root.find("montecarlo")) {
        ObjectReader r(*mc, "montecarlo");
        c.montecarlo.replicates = r.unsigned_int("replicates", c.montecarlo.replicates);
        if (const json* atoms = r.find("atoms")) {
            if (!atoms->is_array()) throw ConfigError("montecarlo.atoms", "expected an array of integers");
            c.montecarlo.atoms.clear();
            for (std::size_t i = 0; i < atoms->size(); ++i) {
                const json& a = (*atoms)[i];
                if (!a.is_number_integer() || a.get<std::int64_t>() < 1) {
                    throw ConfigError("montecarlo.atoms[" + std::to_string(i) + "]", "expected an integer >= 1");
                }
                c.montecarlo.atoms.push_back(a.get<std::uint64_t>());
            }
        }
        c.montecarlo.t_s = r.number("t_s", c.montecarlo.t_s);
        r.reject_unknown();
    }
    c.output_dir = root.string("out", "out");
    c.seed = root.unsigned_int("seed", 0);
    {
        const std::uint64_t threads = root.unsigned_int("threads", 1);
        if (threads < 1 || threads > 1024) throw ConfigError("threads", "must be between 1 and 1024");
        c.threads = static_cast<unsigned>(threads);
    }
    c.format = format_from(root.string("format", "csv"), "format");
    root.reject_unknown();

    validate(c);
    return c;
}

RunConfig parse_config(const std::filesystem::path& path, std::optional<Mode> mode_hint) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("manifest_version") && doc.contains("config")) {
        doc = json(doc.at("config"));
    }
    if (mode_hint && doc.is_object() && !doc.contains("mode")) doc["mode"] = to_string(*mode_hint);
    return parse_config(doc);
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.mode) {
        if (*o.mode != config.mode) {
            throw ConfigError("mode", "config file declares mode \"" + to_string(config.mode) +
                                          "\" but the command line asks for \"" + to_string(*o.mode) + "\"");
        }
    }
    if (o.output_dir) config.output_dir = *o.output_dir;
    if (o.seed) config.seed = *o.seed;
    if (o.threads) {
        if (*o.threads < 1) throw ConfigError("threads", "must be >= 1");
        config.threads = *o.threads;
    }
    if (o.format) config.format = *o.format;
}

}  // namespace clockinterf::runner
