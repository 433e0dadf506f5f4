#pragma once

// Lowest-order gravitational redshift between two heights.

#include "clockinterf/double_word.hpp"
#include "clockinterf/qutrit.hpp"

namespace clockinterf {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

struct RedshiftContext {
    double g = 9.8;        // m/s^2, > 0
    double delta_h = 0.0;  // m, sign allowed

    void validate() const;
};

/// eps = g * delta_h / c^2 in double-word arithmetic.
[[nodiscard]] DoubleWord redshift_factor(const RedshiftContext& ctx);

/// Same expression with c^2 rounded to 9e16, the value commonly quoted
/// in back-of-envelope estimates.
[[nodiscard]] double redshift_factor_rounded_c2(const RedshiftContext& ctx);

enum class ShiftRegime {
    physical,  // |eps| < 1e-3: the lowest-order formula is meaningful
    scaled,    // dimensionless frequencies with exaggerated shifts, |eps| < 1e-1
};

[[nodiscard]] double max_abs_shift(ShiftRegime regime);

/// f_k -> f_k (1 + eps) for both clocks. The beat scales by exactly the same
/// double-word factor, so (f2' - f1') / (f2 - f1) = 1 + eps to ~1e-31.
[[nodiscard]] ClockFrequencies shift_frequencies(const ClockFrequencies& freqs, const DoubleWord& eps,
                                                 ShiftRegime regime = ShiftRegime::physical);

}  // namespace clockinterf
