#pragma once

// Ramsey experiments on the three-level clock interferometer: preparation,
// free evolution, phase-scanned closing pulses, population readout.

#include <optional>
#include <span>
#include <vector>

#include "clockinterf/noise.hpp"
#include "clockinterf/qutrit.hpp"

namespace clockinterf {

enum class Preparation {
    tripod,          // (0.5, 0.25, 0.25)
    double_pi_half,  // two sequential pi/2 pulses, (0.25, 0.5, 0.25)
};

/// One Ramsey shot. The closing pulses are the exact inverses of the
/// preparation pulses, both shifted by the common `closing_phase`.
struct RamseySequence {
    Preparation prep = Preparation::tripod;
    DoubleWord interrogation_s{0.0};
    double closing_phase = 0.0;
    ClockFrequencies freqs;

    void validate() const;
    [[nodiscard]] RamseySequence with_time(const DoubleWord& t_s) const;
    [[nodiscard]] RamseySequence with_phase(double phase) const;
};

[[nodiscard]] std::array<PulseSpec, 2> preparation_pulses(Preparation prep);

/// Noiseless populations after the full sequence (pure-state path).
[[nodiscard]] Populations run_sequence(const RamseySequence& seq);

/// Density-matrix path with dephasing and clock-state decay acting during
/// the interrogation. Trap loss does not enter the populations.
[[nodiscard]] Populations run_sequence(const RamseySequence& seq, const NoiseConfig& noise);

struct FringePoint {
    double phase_rad = 0.0;
    Populations probs;
};

struct FringeDataset {
    double interrogation_s = 0.0;
    std::vector<FringePoint> points;
    /// Present when sampled with a finite number of atoms; `points` then hold
    /// the observed fractions.
    std::optional<std::vector<ShotCounts>> shot_counts;

    [[nodiscard]] std::vector<double> phases() const;
    [[nodiscard]] std::vector<double> channel(Level level) const;
};

inline constexpr int kMinPhases = 8;
inline constexpr int kDefaultPhases = 64;

/// Equally spaced closing phases 2*pi*k/n, k = 0..n-1.
[[nodiscard]] std::vector<double> phase_grid(int n_phases);

/// Noiseless scan over `n_phases` (>= 8) closing phases.
[[nodiscard]] FringeDataset phase_scan(const RamseySequence& seq, int n_phases);

/// Where the sampled counts of a scan come from. Point k of the scan uses
/// the stream (noise.seed, first_point + k, replicate).
struct SamplingSpec {
    NoiseConfig noise;
    std::uint64_t first_point = 0;
    std::uint64_t replicate = 0;
    bool sample = true;  // false: decoherence only, exact probabilities
};

[[nodiscard]] FringeDataset phase_scan(const RamseySequence& seq, int n_phases, const SamplingSpec& sampling);

struct VisibilityEntry {
    double t_s = 0.0;
    double visibility = 0.0;
    double fit_residual = 0.0;
};

struct VisibilityCurve {
    std::vector<VisibilityEntry> entries;

    void validate() const;
    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] std::vector<double> values() const;
};

struct CurveOptions {
    int n_phases = kDefaultPhases;
    std::optional<NoiseConfig> noise;
    bool sample = true;  // with `noise`: draw finite-atom counts
    std::uint64_t replicate = 0;
    unsigned threads = 1;
};

/// Ground-channel amplitude of the noiseless t = 0 fringe; the denominator
/// of the amplitude-normalized visibility (0.5 for tripod preparation).
[[nodiscard]] double reference_amplitude(Preparation prep, int n_phases = kDefaultPhases);

/// For every t in `t_grid` (non-empty, strictly increasing): phase scan, fit
/// the ground fringe, record amplitude / reference_amplitude. Grid points are
/// evaluated in parallel when `threads > 1`; results do not depend on it.
[[nodiscard]] VisibilityCurve visibility_curve(const RamseySequence& seq_template, std::span<const double> t_grid,
                                               const CurveOptions& options = {});

/// `count` points from `start` to `stop` inclusive.
[[nodiscard]] std::vector<double> linear_grid(double start, double stop, std::size_t count);

}  // namespace clockinterf
