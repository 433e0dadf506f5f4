#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "clockinterf/errors.hpp"
#include "clockinterf/runner.hpp"

using namespace clockinterf;
using namespace clockinterf::runner;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::path(CLOCKINTERF_TEST_TMP) / "runner";

fs::path fresh_dir(const std::string& name) {
    const auto dir = kTmp / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
    const auto path = dir / "config.json";
    std::ofstream(path) << doc.dump(2);
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CLOCKINTERF_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error_key(const json& doc) {
    try {
        (void)parse_config(doc);
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
    const auto c = parse_config(json{{"mode", "visibility"}, {"f1", 1.0}, {"f2", 1.25}});
    CHECK(c.mode == Mode::visibility);
    CHECK(c.n_phases == 64);
    CHECK(c.seed == 0);
    CHECK(c.threads == 1);
    CHECK(c.units == Units::physical);
    CHECK_FALSE(c.has_shift());
    CHECK(c.shift().to_double() == 0.0);
}

TEST_CASE("config round trip") {
    const json doc{{"mode", "stack"},       {"units", "scaled"}, {"f1", 4.0},          {"f2", 5.0},
                   {"eps", 4e-4},           {"seed", 77},        {"threads", 3},       {"format", "json"},
                   {"noise", {{"atoms_per_point", 500}, {"tau_coherence_s", 2.0}, {"tau_trap_s", "inf"}}},
                   {"stack", {{"n_periods", 10}}}};
    const auto c = parse_config(doc);
    const auto again = parse_config(c.to_json());
    CHECK(again.to_json() == c.to_json());
    CHECK(again.sample);
    CHECK(std::isinf(again.noise->tau_trap_s));
    CHECK(again.noise->tau_coherence_s == 2.0);
}

TEST_CASE("config errors name the key") {
    const json base{{"mode", "visibility"}, {"f1", 1.0}, {"f2", 1.25}};
    auto with = [&](const std::string& key, const json& value) {
        json d = base;
        d[key] = value;
        return d;
    };
    CHECK(config_error_key(with("f2", 1.0)) == "f2");
    CHECK(config_error_key(with("f2", 0.5)) == "f2");
    try {
        (void)parse_config(with("f2", 0.5));
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("larger transition frequency") != std::string::npos);
    }
    CHECK(config_error_key(with("bogus", 1)) == "bogus");
    CHECK(config_error_key(with("n_phases", 4)) == "n_phases");
    CHECK(config_error_key(with("t_grid", json{{"count", 10}, {"extra", 1}})) == "t_grid.extra");
    CHECK(config_error_key(with("noise", json{{"tau_clock_s", -1.0}})) == "noise.tau_clock_s");
    CHECK(config_error_key(with("mode", "dance")) == "mode");
    CHECK(config_error_key(with("f1", "one")) == "f1");
    CHECK(config_error_key(json{{"mode", "visibility"}, {"f1", 1.0}}) == "f2");

    // Physical units: a height giving eps >= 1e-3 is outside the lowest-order regime.
    CHECK(config_error_key(with("redshift", json{{"g", 9.8}, {"delta_h", 1e13}})) == "redshift.delta_h");
    CHECK(config_error_key(with("eps", 4e-3)) == "eps");
    json scaled = with("eps", 4e-3);
    scaled["units"] = "scaled";
    CHECK(config_error_key(scaled).empty());
    scaled["eps"] = 0.2;
    CHECK(config_error_key(scaled) == "eps");

    json both = with("eps", 1e-5);
    both["redshift"] = {{"delta_h", 1.0}};
    CHECK(config_error_key(both) == "eps");

    json stack = base;
    stack["mode"] = "stack";
    CHECK(config_error_key(stack) == "eps");
}

TEST_CASE("config files") {
    const auto dir = fresh_dir("files");
    CHECK_THROWS_AS((void)parse_config(dir / "missing.json"), ConfigError);
    std::ofstream(dir / "bad.json") << "{ \"mode\": ";
    CHECK_THROWS_AS((void)parse_config(dir / "bad.json"), ConfigError);

    // Mode taken from the command line when the file has none.
    const auto path = write_config(dir, json{{"f1", 1.0}, {"f2", 1.25}});
    CHECK(parse_config(path, Mode::fringe).mode == Mode::fringe);

    RunConfig c = parse_config(path, Mode::fringe);
    CHECK_THROWS_AS(apply_overrides(c, Overrides{Mode::visibility}), ConfigError);
    Overrides o;
    o.seed = 9;
    o.threads = 4;
    apply_overrides(c, o);
    CHECK(c.seed == 9);
    CHECK(c.threads == 4);
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 0.5}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("fringe run at t = 0") {
    const auto dir = fresh_dir("fringe");
    RunConfig c = parse_config(json{{"mode", "fringe"}, {"f1", 1.0}, {"f2", 1.25}, {"n_phases", 16}});
    c.output_dir = dir / "out";
    const auto result = run(c);
    REQUIRE(result.files.size() == 3);
    CHECK(result.files[0].name == "fringe.csv");

    std::ifstream in(c.output_dir / "fringe.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "phase_rad,p_g,p_c1,p_c2");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        CHECK(std::abs(std::stod(b) - 0.5 * (1.0 + std::cos(std::stod(a)))) < 1e-12);
        ++rows;
    }
    CHECK(rows == 16);
    CHECK(slurp(c.output_dir / "fringe.csv").find('\r') == std::string::npos);
    CHECK(std::abs(result.summary["visibility_amp"].get<double>() - 1.0) < 1e-9);
}

TEST_CASE("visibility run finds the nulls") {
    const auto dir = fresh_dir("visibility");
    RunConfig c = parse_config(json{{"mode", "visibility"},
                                    {"f1", 1.0},
                                    {"f2", 2.0},
                                    {"n_phases", 16},
                                    {"t_grid", {{"start", 0.0}, {"stop", 3.0}, {"count", 301}}}});
    c.output_dir = dir / "out";
    const auto result = run(c);
    const auto nulls = result.summary["nulls_s"].get<std::vector<double>>();
    REQUIRE(nulls.size() == 3);
    CHECK(std::abs(nulls[0] - 0.5) < 1e-9);
    CHECK(std::abs(nulls[1] - 1.5) < 1e-9);
    CHECK(std::abs(nulls[2] - 2.5) < 1e-9);
    CHECK(result.summary["max_deviation_from_clock_overlap"].get<double>() < 1e-9);
    CHECK(std::abs(result.summary["beat"]["delta_f_hz"].get<double>() - 1.0) < 1e-9);
}

TEST_CASE("redshift-compare reports the beat ratio") {
    const auto dir = fresh_dir("compare");
    RunConfig c = parse_config(json{{"mode", "redshift-compare"},
                                    {"units", "scaled"},
                                    {"f1", 4.0},
                                    {"f2", 5.0},
                                    {"eps", 4e-4},
                                    {"n_phases", 16},
                                    {"t_grid", {{"start", 0.0}, {"stop", 3.0}, {"count", 241}}}});
    c.output_dir = dir / "out";
    const auto result = run(c);
    CHECK(std::abs(result.summary["beat_ratio"].get<double>() - 1.0004) < 1.0004e-6);
    CHECK(std::abs(result.summary["beat_ratio_exact"]["value"].get<double>() - 1.0004) < 1e-15);
}

TEST_CASE("stack run in physical units") {
    const auto dir = fresh_dir("stack");
    RunConfig c = parse_config(json{{"mode", "stack"},
                                    {"f1", 429228004229873.0},
                                    {"f2", 429228004229873.0 + 1e9},
                                    {"redshift", {{"g", 9.8}, {"delta_h", 1.0}}},
                                    {"stack", {{"n_periods", 1000000000}, {"tau_s", 1.0}}}});
    c.output_dir = dir / "out";
    const auto result = run(c);
    CHECK_FALSE(result.summary.contains("simulation"));
    const double eps = result.summary["extended"]["eps_recovered"]["value"].get<double>();
    CHECK(std::abs(eps / 1.1e-16 - 1.0) < 0.01);
    CHECK(result.summary["stacking_gain"].get<double>() == 1e9);
}

TEST_CASE("montecarlo run") {
    const auto dir = fresh_dir("mc");
    RunConfig c = parse_config(json{{"mode", "montecarlo"},
                                    {"f1", 1.0},
                                    {"f2", 2.0},
                                    {"n_phases", 16},
                                    {"seed", 5},
                                    {"montecarlo", {{"replicates", 20}, {"atoms", {100, 10000}}}}});
    c.output_dir = dir / "out";
    const auto result = run(c);
    CHECK(result.summary["per_atom_number"].size() == 2);
    CHECK(std::abs(result.summary["visibility_exact"].get<double>() - std::cos(M_PI / 6)) < 1e-9);
}

TEST_CASE("sampled runs are byte-identical across thread counts") {
    const auto dir = fresh_dir("determinism");
    const json doc{{"mode", "visibility"},
                   {"f1", 1.0},
                   {"f2", 2.0},
                   {"n_phases", 16},
                   {"seed", 1234},
                   {"noise", {{"atoms_per_point", 1000}, {"tau_coherence_s", 5.0}}},
                   {"t_grid", {{"start", 0.0}, {"stop", 3.0}, {"count", 61}}}};
    RunConfig a = parse_config(doc);
    a.output_dir = dir / "t1";
    a.threads = 1;
    RunConfig b = a;
    b.output_dir = dir / "t8";
    b.threads = 8;
    const auto result = run(a);
    (void)run(b);
    CHECK_FALSE(result.summary.contains("nulls_error"));
    CHECK(result.summary["nulls_s"].size() == 3);
    CHECK(slurp(a.output_dir / "visibility.csv") == slurp(b.output_dir / "visibility.csv"));

    RunConfig other = a;
    other.seed = 1235;
    other.output_dir = dir / "seed";
    (void)run(other);
    CHECK(slurp(a.output_dir / "visibility.csv") != slurp(other.output_dir / "visibility.csv"));
}

TEST_CASE("manifest lists digests and detects edits") {
    const auto dir = fresh_dir("manifest");
    RunConfig c = parse_config(json{{"mode", "fringe"}, {"f1", 1.0}, {"f2", 1.25}, {"n_phases", 8}});
    c.output_dir = dir / "out";
    (void)run(c);
    const auto manifest_path = c.output_dir / "manifest.json";
    const json manifest = json::parse(slurp(manifest_path));
    CHECK(manifest["outputs"].size() == 2);
    for (const auto& entry : manifest["outputs"]) {
        CHECK(entry["sha256"].get<std::string>() == sha256_hex(c.output_dir / entry["file"].get<std::string>()));
    }
    CHECK(verify_manifest(manifest_path).empty());

    // A manifest doubles as a config for re-running.
    const auto rerun = parse_config(manifest_path);
    CHECK(rerun.to_json() == c.to_json());

    std::ofstream(c.output_dir / "fringe.csv", std::ios::app) << "0,0,0,0\n";
    const auto bad = verify_manifest(manifest_path);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0] == "fringe.csv");
}

TEST_CASE("sha256 of a known string") {
    const auto dir = fresh_dir("sha");
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_hex(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("CLI exit codes") {
    const auto dir = fresh_dir("cli");
    const auto good = write_config(dir, json{{"f1", 1.0}, {"f2", 1.25}, {"n_phases", 8}});
    const auto out = (dir / "out").string();
    CHECK(cli("fringe --config " + good.string() + " --out " + out) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(cli("verify --manifest " + (dir / "out" / "manifest.json").string()) == 0);

    CHECK(cli("fringe --config " + (dir / "nope.json").string()) == 2);
    CHECK(cli("fringe") == 2);
    CHECK(cli("teleport --config " + good.string()) == 2);

    std::ofstream(dir / "bad.json") << json{{"mode", "fringe"}, {"f1", 2.0}, {"f2", 1.0}}.dump();
    CHECK(cli("fringe --config " + (dir / "bad.json").string()) == 2);
    // Mode in the file disagrees with the subcommand.
    CHECK(cli("visibility --config " + (dir / "bad.json").string()) == 2);

    // Every atom is lost from the trap before readout.
    std::ofstream(dir / "lost.json") << json{{"f1", 1.0},
                                             {"f2", 1.25},
                                             {"interrogation_s", 10.0},
                                             {"noise", {{"atoms_per_point", 1}, {"tau_trap_s", 0.01}}}}
                                            .dump();
    CHECK(cli("fringe --config " + (dir / "lost.json").string() + " --out " + (dir / "lost").string()) == 3);

    // Output directory that cannot be created.
    std::ofstream(dir / "blocker") << "x";
    CHECK(cli("fringe --config " + good.string() + " --out " + (dir / "blocker" / "sub").string()) == 4);

    // Tampered output.
    std::ofstream(dir / "out" / "summary.json", std::ios::app) << " ";
    CHECK(cli("verify --manifest " + (dir / "out" / "manifest.json").string()) == 4);
}
