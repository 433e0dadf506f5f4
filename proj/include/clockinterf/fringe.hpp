#pragma once

// Fringe fitting, visibility metrics, null location and beat estimation.

#include <limits>
#include <span>
#include <vector>

#include "clockinterf/sequence.hpp"

namespace clockinterf {

struct FringeFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase0 = 0.0;
    double rms_residual = 0.0;

    /// offset + amplitude * cos(phase - phase0)
    [[nodiscard]] double evaluate(double phase) const;
};

/// Linear least squares of y = a + b cos(phase) + c sin(phase); amplitude =
/// hypot(b, c), phase0 = atan2(c, b) so that y = a + A cos(phase - phase0).
/// Requires >= 8 points; throws NumericalError on a rank-deficient design.
[[nodiscard]] FringeFit fit_fringe(std::span<const double> phases, std::span<const double> values);
[[nodiscard]] FringeFit fit_fringe(const FringeDataset& data, Level channel = Level::ground);

/// amplitude / reference_amplitude, clamped to [0, 1 + 1e-6].
[[nodiscard]] double visibility_amp(const FringeFit& fit, double reference_amplitude);

/// (Pmax - Pmin) / (Pmax + Pmin) of the fitted fringe.
[[nodiscard]] double visibility_minmax(const FringeFit& fit);
[[nodiscard]] double visibility_minmax(const FringeDataset& data, Level channel = Level::ground);

/// Two-path closed form: P = (1 + cos(pi df t) cos(phase)) / 2, where the
/// phase stands for the optical carrier term.
struct AnalyticBeatModel {
    double delta_f_hz = 1.0;
    double carrier_hz = 0.0;  // mean clock frequency

    static AnalyticBeatModel from(const ClockFrequencies& freqs);
};

[[nodiscard]] double analytic_population(double t_s, const AnalyticBeatModel& model, double phase);

/// Refined times of the first `max_count` visibility nulls, in order. Each
/// sampled minimum is refined by fitting A^2 sin^2(pi df (t - t_null)) over a
/// window of +-20% of a modulation period. The result holds fewer entries if
/// the curve does not contain `max_count` nulls; a curve without minima
/// yields an empty list.
[[nodiscard]] std::vector<double> find_nulls(const VisibilityCurve& curve, std::size_t max_count);

struct BeatFitOptions {
    bool fit_decay = false;  // fit 1/tau; otherwise tau is fixed
    double tau_s = std::numeric_limits<double>::infinity();
    int max_iterations = 200;
};

struct BeatEstimate {
    double delta_f_hz = 0.0;
    double stderr_hz = 0.0;
    double tau_s = std::numeric_limits<double>::infinity();
    double rms_residual = 0.0;
    int iterations = 0;
};

/// Nonlinear least squares of V(t) = |cos(pi df t)| exp(-t / tau). The
/// standard error is the heteroscedasticity-consistent (sandwich) estimate
/// built from the fit residuals. Requires >= 2 modulation periods.
[[nodiscard]] BeatEstimate estimate_beat(const VisibilityCurve& curve, const BeatFitOptions& options = {});

}  // namespace clockinterf
