#pragma once

// Command-line experiment runner: JSON configuration in, CSV/JSON data,
// a JSON summary and a reproducibility manifest out.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clockinterf/noise.hpp"
#include "clockinterf/redshift.hpp"
#include "clockinterf/sequence.hpp"

namespace clockinterf::runner {

enum class Mode { fringe, visibility, redshift_compare, stack, montecarlo };
enum class Units { physical, scaled };
enum class OutputFormat { csv, json };

[[nodiscard]] std::string to_string(Mode mode);
[[nodiscard]] std::optional<Mode> mode_from_string(const std::string& name);

struct TimeGrid {
    double start = 0.0;
    double stop = 3.0;
    std::size_t count = 301;

    [[nodiscard]] std::vector<double> points() const { return linear_grid(start, stop, count); }
};

struct StackSettings {
    std::uint64_t n_periods = 1000;
    int points_per_period = 16;
    int n_phases = 32;
    double tau_s = 1.0;  // coherence time for the double-word analytic comparison
};

struct MonteCarloSettings {
    std::uint64_t replicates = 100;
    std::vector<std::uint64_t> atoms{100, 10'000, 1'000'000};
    double t_s = -1.0;  // < 0: a sixth of a modulation period
};

struct RunConfig {
    Mode mode = Mode::visibility;
    Units units = Units::physical;
    double f1 = 1.0;
    double f2 = 1.25;
    Preparation prep = Preparation::tripod;
    double interrogation_s = 0.0;
    int n_phases = kDefaultPhases;
    TimeGrid t_grid;
    std::optional<RedshiftContext> redshift;
    std::optional<double> eps;  // given directly instead of through `redshift`
    std::optional<NoiseConfig> noise;
    bool sample = false;  // finite-atom sampling; set when noise.atoms_per_point is given
    bool fit_decay = false;
    StackSettings stack;
    MonteCarloSettings montecarlo;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    OutputFormat format = OutputFormat::csv;

    /// Fractional shift implied by `eps` or `redshift` (zero when neither).
    [[nodiscard]] DoubleWord shift() const;
    [[nodiscard]] bool has_shift() const { return eps.has_value() || redshift.has_value(); }
    [[nodiscard]] ClockFrequencies frequencies() const { return {f1, f2}; }
    /// Resolved configuration; feeding it back to parse_config reproduces
    /// this object.
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Validates and applies defaults. Unknown keys are rejected. Throws
/// ConfigError naming the key path.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);

/// Reads a JSON config file. A run manifest is accepted as well, in which
/// case its configuration echo is used. `mode_hint` fills in a missing
/// "mode" key.
[[nodiscard]] RunConfig parse_config(const std::filesystem::path& path, std::optional<Mode> mode_hint = std::nullopt);

/// Command-line overrides applied after the file is parsed.
struct Overrides {
    std::optional<Mode> mode;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<OutputFormat> format;
};
void apply_overrides(RunConfig& config, const Overrides& overrides);

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string schema;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunResult {
    nlohmann::json summary;
    std::vector<OutputFile> files;  // data files, summary and manifest last
};

/// Executes the configured pipeline and writes everything under
/// config.output_dir. Throws NumericalError / IoError / ConfigError.
RunResult run(const RunConfig& config);

/// Recomputes the digests listed in a manifest. Returns the names of files
/// that are missing or modified.
[[nodiscard]] std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

[[nodiscard]] std::string sha256_hex(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double value);

}  // namespace clockinterf::runner
