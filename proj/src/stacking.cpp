#include "clockinterf/stacking.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "clockinterf/fringe.hpp"
#include "clockinterf/sequence.hpp"
#include "parallel.hpp"

namespace clockinterf {

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || !(value > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

}  // namespace

DoubleWord stacking_gain(double tau_s, double delta_f_hz) {
    require_positive(tau_s, "tau_s");
    require_positive(delta_f_hz, "delta_f_hz");
    return exact_product(tau_s, delta_f_hz);
}

DoubleWord total_signal(double tau_s, const RedshiftContext& ctx) {
    require_positive(tau_s, "tau_s");
    return redshift_factor(ctx) * tau_s;
}

StackingReport stacked_null_shift(std::uint64_t n, const DoubleWord& eps, double delta_f_hz,
                                  const std::optional<RedshiftContext>& ctx) {
    if (n < 1) throw std::invalid_argument("stacked_null_shift needs n >= 1");
    require_positive(delta_f_hz, "delta_f_hz");
    const auto periods = static_cast<double>(n);
    StackingReport report;
    report.n_periods = n;
    report.eps = eps.to_double();
    report.per_period_shift_s = (eps / DoubleWord{delta_f_hz}).to_double();
    report.cumulative_shift_periods = (eps * periods).to_double();
    if (ctx) report.total_signal = total_signal(periods / delta_f_hz, *ctx).to_double();
    return report;
}

StackingVerification verify_stacking_by_simulation(double eps, double delta_f_hz, std::uint64_t n,
                                                   const StackingSimulationOptions& options) {
    require_positive(delta_f_hz, "delta_f_hz");
    if (n < 1) throw std::invalid_argument("verify_stacking_by_simulation needs n >= 1");
    if (options.points_per_period < 8) throw std::invalid_argument("need at least 8 points per modulation period");

    const ClockFrequencies reference{4.0 * delta_f_hz, 5.0 * delta_f_hz};
    const ClockFrequencies shifted = shift_frequencies(reference, DoubleWord{eps}, ShiftRegime::scaled);

    // Cover null n of both curves plus a refinement window past it.
    const double periods = static_cast<double>(n) * (1.0 + std::abs(eps) / (1.0 - std::abs(eps))) + 1.0;
    const auto count = static_cast<std::size_t>(std::ceil(periods * options.points_per_period)) + 1;
    const auto grid = linear_grid(0.0, periods / delta_f_hz, count);

    const std::array<ClockFrequencies, 2> freqs{reference, shifted};
    std::array<double, 2> null_n{};
    CurveOptions curve_options;
    curve_options.n_phases = options.n_phases;
    curve_options.threads = std::max(1u, options.threads / 2);
    detail::parallel_for(2, options.threads > 1 ? 2u : 1u, [&](std::size_t which) {
        const RamseySequence seq{Preparation::tripod, DoubleWord{0.0}, 0.0, freqs[which]};
        const auto curve = visibility_curve(seq, grid, curve_options);
        const auto nulls = find_nulls(curve, static_cast<std::size_t>(n));
        if (nulls.size() < n) {
            throw std::invalid_argument("insufficient curve span: found " + std::to_string(nulls.size()) +
                                        " nulls, need " + std::to_string(n));
        }
        null_n[which] = nulls.back();
    });

    StackingVerification out;
    out.predicted_periods = static_cast<double>(n) * eps;
    out.reference_null_s = null_n[0];
    out.shifted_null_s = null_n[1];
    out.simulated_periods = (null_n[0] - null_n[1]) * delta_f_hz;
    out.discrepancy = std::abs(out.simulated_periods - out.predicted_periods);
    return out;
}

ExtendedRecovery recover_shift_extended(const ClockFrequencies& freqs, const DoubleWord& eps, double tau_s) {
    require_positive(tau_s, "tau_s");
    if (eps.hi == 0.0) throw std::invalid_argument("recover_shift_extended needs a non-zero shift");
    const ClockFrequencies shifted = shift_frequencies(freqs, eps, ShiftRegime::physical);

    const DoubleWord gain = freqs.beat() * tau_s;
    const double n = std::floor(gain.hi) + (gain.hi == std::floor(gain.hi) ? std::floor(gain.lo) : 0.0);
    if (n < 1.0) throw std::invalid_argument("coherence time shorter than one modulation period");

    const DoubleWord order = DoubleWord{n} - DoubleWord{0.5};
    ExtendedRecovery out;
    out.null_index = static_cast<std::uint64_t>(n);
    out.reference_null_s = order / freqs.beat();
    out.shifted_null_s = order / shifted.beat();
    out.time_shift_s = out.reference_null_s - out.shifted_null_s;
    out.eps_recovered = out.reference_null_s / out.shifted_null_s - DoubleWord{1.0};
    out.relative_error = std::abs((out.eps_recovered / eps - DoubleWord{1.0}).to_double());

    // Independent check through the arm phases of the shifted clocks.
    const ArmPhases arms = free_evolution_phases(out.shifted_null_s, shifted);
    double relative = arms.clock2 - arms.clock1;
    relative = std::remainder(relative, 2.0 * std::numbers::pi);
    out.null_phase_error_rad = std::abs(std::abs(relative) - std::numbers::pi);
    return out;
}

}  // namespace clockinterf
