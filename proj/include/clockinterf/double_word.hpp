#pragma once

// Double-word ("double-double") arithmetic.
//
// A value is represented as the unevaluated sum hi + lo of two doubles with
// |lo| <= ulp(hi)/2, giving roughly 106 bits of significand. The addition and
// multiplication kernels follow the accurate algorithms of Joldes, Muller and
// Popescu (ACM TOMS 2017); relative error is bounded by a few u^2 with
// u = 2^-53, i.e. below 1e-31.

#include <cmath>
#include <compare>
#include <numbers>

namespace clockinterf {

struct DoubleWord {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleWord() = default;
    constexpr DoubleWord(double value) : hi(value), lo(0.0) {}  // NOLINT: implicit by intent
    constexpr DoubleWord(double high, double low) : hi(high), lo(low) {}

    [[nodiscard]] constexpr double to_double() const { return hi + lo; }
    [[nodiscard]] bool is_finite() const { return std::isfinite(hi) && std::isfinite(lo); }
};

namespace dw_detail {

// |a| >= |b| required.
inline DoubleWord fast_two_sum(double a, double b) {
    const double s = a + b;
    const double e = b - (s - a);
    return {s, e};
}

inline DoubleWord two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

inline DoubleWord two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

}  // namespace dw_detail

/// Exact sum and product of two doubles as a double word.
inline DoubleWord exact_sum(double a, double b) { return dw_detail::two_sum(a, b); }
inline DoubleWord exact_product(double a, double b) { return dw_detail::two_prod(a, b); }

inline DoubleWord operator-(const DoubleWord& x) { return {-x.hi, -x.lo}; }

inline DoubleWord operator+(const DoubleWord& x, const DoubleWord& y) {
    using namespace dw_detail;
    const DoubleWord s = two_sum(x.hi, y.hi);
    const DoubleWord t = two_sum(x.lo, y.lo);
    const double c = s.lo + t.hi;
    const DoubleWord v = fast_two_sum(s.hi, c);
    const double w = t.lo + v.lo;
    return fast_two_sum(v.hi, w);
}

inline DoubleWord operator-(const DoubleWord& x, const DoubleWord& y) { return x + (-y); }

inline DoubleWord operator*(const DoubleWord& x, double y) {
    using namespace dw_detail;
    const DoubleWord c = two_prod(x.hi, y);
    const double cl3 = std::fma(x.lo, y, c.lo);
    return fast_two_sum(c.hi, cl3);
}

inline DoubleWord operator*(double x, const DoubleWord& y) { return y * x; }

inline DoubleWord operator*(const DoubleWord& x, const DoubleWord& y) {
    using namespace dw_detail;
    const DoubleWord c = two_prod(x.hi, y.hi);
    const double tl0 = x.lo * y.lo;
    const double tl1 = std::fma(x.hi, y.lo, tl0);
    const double cl2 = std::fma(x.lo, y.hi, tl1);
    const double cl3 = c.lo + cl2;
    return fast_two_sum(c.hi, cl3);
}

// Long division with two correction steps.
inline DoubleWord operator/(const DoubleWord& x, const DoubleWord& y) {
    const double q1 = x.hi / y.hi;
    DoubleWord r = x - y * q1;
    const double q2 = r.hi / y.hi;
    r = r - y * q2;
    const double q3 = r.hi / y.hi;
    return (DoubleWord{q1} + DoubleWord{q2}) + DoubleWord{q3};
}

inline DoubleWord& operator+=(DoubleWord& x, const DoubleWord& y) { return x = x + y; }
inline DoubleWord& operator-=(DoubleWord& x, const DoubleWord& y) { return x = x - y; }
inline DoubleWord& operator*=(DoubleWord& x, const DoubleWord& y) { return x = x * y; }

inline std::partial_ordering operator<=>(const DoubleWord& x, const DoubleWord& y) {
    if (const auto c = x.hi <=> y.hi; c != 0) return c;
    return x.lo <=> y.lo;
}
inline bool operator==(const DoubleWord& x, const DoubleWord& y) { return x.hi == y.hi && x.lo == y.lo; }

inline DoubleWord abs(const DoubleWord& x) { return x.hi < 0.0 ? -x : x; }

inline DoubleWord floor(const DoubleWord& x) {
    const double fh = std::floor(x.hi);
    if (fh != x.hi) return {fh, 0.0};
    return dw_detail::fast_two_sum(fh, std::floor(x.lo));
}

/// Fractional part, with to_double() in [0, 1). A value within rounding of
/// 1 wraps to 0.
inline DoubleWord frac(const DoubleWord& x) {
    DoubleWord f = x - floor(x);
    if (f.to_double() < 0.0) f += DoubleWord{1.0};
    if (f.to_double() >= 1.0) f -= DoubleWord{1.0};
    if (f.to_double() < 0.0) return DoubleWord{0.0};
    return f;
}

namespace dw {
inline const DoubleWord pi{3.141592653589793, 1.2246467991473532e-16};
inline const DoubleWord two_pi{6.283185307179586, 2.4492935982947064e-16};
}  // namespace dw

/// Accumulated phase in radians held as a double word, so that a phase of
/// 1e16 rad keeps sub-femtoradian resolution.
class ExtendedPhase {
public:
    ExtendedPhase() = default;
    explicit ExtendedPhase(DoubleWord radians) : rad_(radians) {}

    static ExtendedPhase from_cycles(const DoubleWord& cycles) { return ExtendedPhase{cycles * dw::two_pi}; }

    [[nodiscard]] const DoubleWord& radians() const { return rad_; }
    [[nodiscard]] DoubleWord cycles() const { return rad_ / dw::two_pi; }

    /// Phase reduced into [0, 2pi), rounded to double only at the end.
    [[nodiscard]] double reduced() const {
        const double r = (frac(cycles()) * dw::two_pi).to_double();
        return r >= 2.0 * std::numbers::pi ? 0.0 : r;
    }

    ExtendedPhase& operator+=(const ExtendedPhase& other) {
        rad_ += other.rad_;
        return *this;
    }
    friend ExtendedPhase operator+(ExtendedPhase a, const ExtendedPhase& b) { return a += b; }
    friend ExtendedPhase operator-(const ExtendedPhase& a, const ExtendedPhase& b) {
        return ExtendedPhase{a.rad_ - b.rad_};
    }

private:
    DoubleWord rad_{};
};

}  // namespace clockinterf
