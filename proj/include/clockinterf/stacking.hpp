#pragma once

// Detectability of the redshift in the visibility modulation: each
// modulation period shifts the null by eps / df, and the shift accumulates
// over the tau * df periods that fit inside the coherence time.

#include <cstdint>
#include <optional>

#include "clockinterf/double_word.hpp"
#include "clockinterf/qutrit.hpp"
#include "clockinterf/redshift.hpp"

namespace clockinterf {

/// tau * df: number of modulation periods inside the coherence time.
[[nodiscard]] DoubleWord stacking_gain(double tau_s, double delta_f_hz);

/// tau * g * dh / c^2: accumulated null-time shift (s) at the coherence limit.
[[nodiscard]] DoubleWord total_signal(double tau_s, const RedshiftContext& ctx);

struct StackingReport {
    std::uint64_t n_periods = 0;
    double eps = 0.0;
    double per_period_shift_s = 0.0;
    double cumulative_shift_periods = 0.0;
    /// Present when eps came from a redshift context; evaluated for a
    /// coherence time of n_periods / df.
    std::optional<double> total_signal;
};

[[nodiscard]] StackingReport stacked_null_shift(std::uint64_t n, const DoubleWord& eps, double delta_f_hz,
                                                const std::optional<RedshiftContext>& ctx = std::nullopt);

struct StackingSimulationOptions {
    int points_per_period = 16;
    int n_phases = 32;
    unsigned threads = 1;
};

struct StackingVerification {
    double predicted_periods = 0.0;  // n * eps
    double simulated_periods = 0.0;  // measured shift of null n, in unshifted periods
    double discrepancy = 0.0;        // |simulated - predicted|
    double reference_null_s = 0.0;
    double shifted_null_s = 0.0;
};

/// Simulates noiseless visibility curves for beat df (scaled units, clock
/// frequencies 4 df and 5 df) with and without the shift, tracks null n by
/// counting from t = 0 and compares its displacement with n * eps.
[[nodiscard]] StackingVerification verify_stacking_by_simulation(double eps, double delta_f_hz, std::uint64_t n,
                                                                 const StackingSimulationOptions& options = {});

struct ExtendedRecovery {
    std::uint64_t null_index = 0;   // last null inside tau
    DoubleWord reference_null_s;    // (n - 1/2) / df
    DoubleWord shifted_null_s;      // (n - 1/2) / df'
    DoubleWord time_shift_s;        // reference - shifted
    DoubleWord eps_recovered;       // reference / shifted - 1
    double relative_error = 0.0;    // |eps_recovered / eps - 1|
    double null_phase_error_rad = 0.0;  // beat phase at the shifted null vs pi
};

/// Physical-scale comparison of an unshifted and a shifted run carried out
/// entirely in double-word arithmetic, resolving fractional shifts far
/// below double precision.
[[nodiscard]] ExtendedRecovery recover_shift_extended(const ClockFrequencies& freqs, const DoubleWord& eps,
                                                      double tau_s);

}  // namespace clockinterf
