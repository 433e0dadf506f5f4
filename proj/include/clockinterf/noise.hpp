#pragma once

// Quantum projection noise and coherence-time limits.

#include <array>
#include <cstdint>
#include <limits>

#include "clockinterf/qutrit.hpp"

namespace clockinterf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key and a 96-bit counter prefix; the
/// low counter word advances as blocks are consumed. Satisfies
/// UniformRandomBitGenerator so it can drive std:: distributions.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(Key key, std::array<std::uint32_t, 3> stream) : key_(key), stream_(stream) {}

    static Block bijection(Block counter, Key key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

private:
    Key key_;
    std::array<std::uint32_t, 3> stream_;
    std::uint32_t block_index_ = 0;
    Block buffer_{};
    int used_ = 4;
};

/// Identifies one independent random stream: (run seed, scan-point index,
/// replicate index). Results never depend on evaluation order.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t point = 0;
    std::uint64_t replicate = 0;

    /// `family` separates independent draws made for the same point
    /// (0: shot sampling, 1: trap loss).
    [[nodiscard]] Philox4x32 engine(std::uint32_t family = 0) const;
};

inline constexpr double kInfiniteLifetime = std::numeric_limits<double>::infinity();

struct NoiseConfig {
    std::uint64_t atoms_per_point = 1000;
    std::uint64_t seed = 0;
    double tau_coherence_s = kInfiniteLifetime;
    double tau_clock_s = kInfiniteLifetime;
    double tau_trap_s = kInfiniteLifetime;

    void validate() const;
    [[nodiscard]] bool has_decoherence() const;
};

struct ShotCounts {
    std::uint64_t ground = 0;
    std::uint64_t clock1 = 0;
    std::uint64_t clock2 = 0;

    [[nodiscard]] std::uint64_t total() const { return ground + clock1 + clock2; }
    friend bool operator==(const ShotCounts&, const ShotCounts&) = default;
};

/// Multinomial draw of n atoms over the three levels. Probabilities must sum
/// to 1 within 1e-9; entries below -1e-12 are rejected.
[[nodiscard]] ShotCounts sample_shots(const Populations& probs, std::uint64_t n, const StreamKey& key);

/// Dephasing of the ground-clock coherences (tau_coherence_s) followed by
/// trace-preserving clock -> ground amplitude damping (tau_clock_s). Trap
/// loss does not act on the state; see trap_survival.
[[nodiscard]] DensityMatrix3 apply_decoherence(const DensityMatrix3& rho, double t_s, const NoiseConfig& cfg);

/// Fraction of atoms still trapped after t_s.
[[nodiscard]] double trap_survival(double t_s, const NoiseConfig& cfg);

}  // namespace clockinterf
