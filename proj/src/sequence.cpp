#include "clockinterf/sequence.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "clockinterf/errors.hpp"
#include "clockinterf/fringe.hpp"
#include "parallel.hpp"

namespace clockinterf {

namespace {

constexpr double kPi = std::numbers::pi;

// Inverse of `pulse` with an extra drive phase: U(theta, phi + pi + extra).
PulseSpec closing_pulse(const PulseSpec& pulse, double extra_phase) {
    return {pulse.transition(), pulse.angle(), pulse.phase() + kPi + extra_phase};
}

template <typename State>
State close_interferometer(State state, const std::array<PulseSpec, 2>& prep, double phase) {
    state = two_level_pulse(state, closing_pulse(prep[1], phase));
    return two_level_pulse(state, closing_pulse(prep[0], phase));
}

}  // namespace

void RamseySequence::validate() const {
    if (!interrogation_s.is_finite() || interrogation_s.hi < 0.0) {
        throw std::invalid_argument("interrogation time must be finite and >= 0");
    }
    if (!std::isfinite(closing_phase)) throw std::invalid_argument("closing phase must be finite");
}

RamseySequence RamseySequence::with_time(const DoubleWord& t_s) const {
    RamseySequence copy = *this;
    copy.interrogation_s = t_s;
    return copy;
}

RamseySequence RamseySequence::with_phase(double phase) const {
    RamseySequence copy = *this;
    copy.closing_phase = phase;
    return copy;
}

std::array<PulseSpec, 2> preparation_pulses(Preparation prep) {
    return prep == Preparation::tripod ? tripod_pulses() : double_pi_half_pulses();
}

Populations run_sequence(const RamseySequence& seq) {
    seq.validate();
    const auto prep = preparation_pulses(seq.prep);
    QutritState state = QutritState::ground();
    for (const auto& pulse : prep) state = two_level_pulse(state, pulse);
    state = free_evolve(state, seq.interrogation_s, seq.freqs);
    return populations(close_interferometer(state, prep, seq.closing_phase));
}

Populations run_sequence(const RamseySequence& seq, const NoiseConfig& noise) {
    seq.validate();
    noise.validate();
    const auto prep = preparation_pulses(seq.prep);
    DensityMatrix3 rho = DensityMatrix3::from_pure(QutritState::ground());
    for (const auto& pulse : prep) rho = two_level_pulse(rho, pulse);
    rho = free_evolve(rho, seq.interrogation_s, seq.freqs);
    rho = apply_decoherence(rho, seq.interrogation_s.to_double(), noise);
    return populations(close_interferometer(rho, prep, seq.closing_phase));
}

// ---------------------------------------------------------------------------

std::vector<double> FringeDataset::phases() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.phase_rad);
    return out;
}

std::vector<double> FringeDataset::channel(Level level) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.probs[level]);
    return out;
}

std::vector<double> phase_grid(int n_phases) {
    if (n_phases < kMinPhases) {
        throw std::invalid_argument("phase scans need at least " + std::to_string(kMinPhases) + " phases");
    }
    std::vector<double> grid(static_cast<std::size_t>(n_phases));
    for (int k = 0; k < n_phases; ++k) grid[static_cast<std::size_t>(k)] = 2.0 * kPi * k / n_phases;
    return grid;
}

FringeDataset phase_scan(const RamseySequence& seq, int n_phases) {
    const auto grid = phase_grid(n_phases);
    FringeDataset data;
    data.interrogation_s = seq.interrogation_s.to_double();
    data.points.reserve(grid.size());
    for (const double phase : grid) data.points.push_back({phase, run_sequence(seq.with_phase(phase))});
    return data;
}

FringeDataset phase_scan(const RamseySequence& seq, int n_phases, const SamplingSpec& sampling) {
    const auto grid = phase_grid(n_phases);
    const NoiseConfig& noise = sampling.noise;
    noise.validate();
    const double t = seq.interrogation_s.to_double();
    const double survival = trap_survival(t, noise);

    FringeDataset data;
    data.interrogation_s = t;
    data.points.reserve(grid.size());
    if (sampling.sample) data.shot_counts.emplace().reserve(grid.size());

    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double phase = grid[k];
        const RamseySequence shot = seq.with_phase(phase);
        const Populations exact = noise.has_decoherence() ? run_sequence(shot, noise) : run_sequence(shot);
        if (!sampling.sample) {
            data.points.push_back({phase, exact});
            continue;
        }

        const StreamKey key{noise.seed, sampling.first_point + k, sampling.replicate};
        std::uint64_t detected = noise.atoms_per_point;
        if (survival < 1.0) {
            Philox4x32 loss = key.engine(1);
            detected = std::binomial_distribution<std::uint64_t>(noise.atoms_per_point, survival)(loss);
        }
        if (detected == 0) {
            throw NumericalError("no atoms survived the trap at t = " + std::to_string(t) + " s, phase index " +
                                 std::to_string(k));
        }
        const ShotCounts counts = sample_shots(exact, detected, key);
        const double n = static_cast<double>(detected);
        data.points.push_back({phase, {counts.ground / n, counts.clock1 / n, counts.clock2 / n}});
        data.shot_counts->push_back(counts);
    }
    return data;
}

// ---------------------------------------------------------------------------

void VisibilityCurve::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!std::isfinite(e.t_s) || !std::isfinite(e.visibility)) {
            throw std::invalid_argument("visibility curve has non-finite entries");
        }
        if (i > 0 && !(e.t_s > entries[i - 1].t_s)) {
            throw std::invalid_argument("visibility curve times must be strictly increasing");
        }
    }
}

std::vector<double> VisibilityCurve::times() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.t_s);
    return out;
}

std::vector<double> VisibilityCurve::values() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.visibility);
    return out;
}

double reference_amplitude(Preparation prep, int n_phases) {
    // Frequencies are irrelevant at t = 0.
    const RamseySequence seq{prep, DoubleWord{0.0}, 0.0, ClockFrequencies{1.0, 2.0}};
    return fit_fringe(phase_scan(seq, n_phases)).amplitude;
}

VisibilityCurve visibility_curve(const RamseySequence& seq_template, std::span<const double> t_grid,
                                 const CurveOptions& options) {
    if (t_grid.empty()) throw std::invalid_argument("visibility_curve needs a non-empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0) {
            throw std::invalid_argument("visibility_curve times must be finite and >= 0");
        }
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
            throw std::invalid_argument("visibility_curve times must be strictly increasing");
        }
    }
    seq_template.validate();
    if (options.noise) options.noise->validate();

    const double reference = reference_amplitude(seq_template.prep, options.n_phases);
    const auto n_phases = static_cast<std::uint64_t>(options.n_phases);

    VisibilityCurve curve;
    curve.entries.resize(t_grid.size());
    detail::parallel_for(t_grid.size(), options.threads, [&](std::size_t i) {
        const double t = t_grid[i];
        const RamseySequence seq = seq_template.with_time(t);
        try {
            const FringeDataset data =
                options.noise ? phase_scan(seq, options.n_phases,
                                           SamplingSpec{*options.noise, i * n_phases, options.replicate, options.sample})
                              : phase_scan(seq, options.n_phases);
            const FringeFit fit = fit_fringe(data);
            curve.entries[i] = {t, visibility_amp(fit, reference), fit.rms_residual};
        } catch (const NumericalError& e) {
            throw NumericalError("fringe fit failed at t = " + std::to_string(t) + " s: " + e.what());
        }
    });
    return curve;
}

std::vector<double> linear_grid(double start, double stop, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {start};
    std::vector<double> grid(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = start + step * static_cast<double>(i);
    grid.back() = stop;
    return grid;
}

}  // namespace clockinterf
