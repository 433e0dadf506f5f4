#include "clockinterf/redshift.hpp"

#include <cmath>
#include <stdexcept>

namespace clockinterf {

void RedshiftContext::validate() const {
    if (!std::isfinite(g) || !(g > 0.0)) throw std::invalid_argument("gravitational acceleration g must be > 0");
    if (!std::isfinite(delta_h)) throw std::invalid_argument("height difference must be finite");
}

DoubleWord redshift_factor(const RedshiftContext& ctx) {
    ctx.validate();
    const DoubleWord c_squared = exact_product(kSpeedOfLight, kSpeedOfLight);
    return exact_product(ctx.g, ctx.delta_h) / c_squared;
}

double redshift_factor_rounded_c2(const RedshiftContext& ctx) {
    ctx.validate();
    return ctx.g * ctx.delta_h / 9e16;
}

double max_abs_shift(ShiftRegime regime) { return regime == ShiftRegime::physical ? 1e-3 : 1e-1; }

ClockFrequencies shift_frequencies(const ClockFrequencies& freqs, const DoubleWord& eps, ShiftRegime regime) {
    if (!eps.is_finite() || !(std::abs(eps.hi) < max_abs_shift(regime))) {
        throw std::invalid_argument(regime == ShiftRegime::physical
                                        ? "fractional shift |eps| >= 1e-3 is outside the lowest-order regime; "
                                          "use scaled units for exaggerated shifts"
                                        : "fractional shift |eps| must be < 0.1 in scaled units");
    }
    const DoubleWord scale = DoubleWord{1.0} + eps;
    return ClockFrequencies::from_beat(freqs.f1() * scale, freqs.beat() * scale);
}

}  // namespace clockinterf
