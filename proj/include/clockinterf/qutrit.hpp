#pragma once

// Three-level system: one ground state |g> shared by two optical clock
// transitions |g> <-> |c1> (clock 1) and |g> <-> |c2> (clock 2).

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "clockinterf/double_word.hpp"

namespace clockinterf {

using cplx = std::complex<double>;

enum class Level : int { ground = 0, clock1 = 1, clock2 = 2 };

enum class Transition { ground_clock1, ground_clock2 };

struct Populations {
    double ground = 0.0;
    double clock1 = 0.0;
    double clock2 = 0.0;

    [[nodiscard]] double sum() const { return ground + clock1 + clock2; }
    [[nodiscard]] double operator[](Level level) const;
};

/// Pure state amplitudes over {|g>, |c1>, |c2>}.
class QutritState {
public:
    QutritState(cplx amp_g, cplx amp_c1, cplx amp_c2) : amp_(amp_g, amp_c1, amp_c2) {}
    explicit QutritState(const Eigen::Vector3cd& amplitudes) : amp_(amplitudes) {}

    static QutritState ground() { return {1.0, 0.0, 0.0}; }

    [[nodiscard]] cplx amp_g() const { return amp_(0); }
    [[nodiscard]] cplx amp_c1() const { return amp_(1); }
    [[nodiscard]] cplx amp_c2() const { return amp_(2); }
    [[nodiscard]] cplx operator[](Level level) const { return amp_(static_cast<int>(level)); }

    [[nodiscard]] const Eigen::Vector3cd& vector() const { return amp_; }
    [[nodiscard]] double norm_squared() const { return amp_.squaredNorm(); }

private:
    Eigen::Vector3cd amp_;
};

/// 3x3 density matrix, used when decoherence channels are active.
class DensityMatrix3 {
public:
    explicit DensityMatrix3(const Eigen::Matrix3cd& rho) : rho_(rho) {}

    static DensityMatrix3 from_pure(const QutritState& state);
    static DensityMatrix3 maximally_mixed();

    [[nodiscard]] const Eigen::Matrix3cd& matrix() const { return rho_; }
    [[nodiscard]] cplx operator()(Level row, Level col) const {
        return rho_(static_cast<int>(row), static_cast<int>(col));
    }

    [[nodiscard]] double trace() const { return rho_.trace().real(); }
    [[nodiscard]] double hermiticity_defect() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
    [[nodiscard]] double min_eigenvalue() const;

    /// Throws std::invalid_argument unless Hermitian and unit trace within
    /// 1e-12 with eigenvalues >= -1e-10.
    void validate() const;

private:
    Eigen::Matrix3cd rho_;
};

/// Transition frequencies of the two clocks. Stored as clock-1 frequency
/// plus beat so that the beat (and its fractional shift) is carried at full
/// double-word precision even for optical carriers.
class ClockFrequencies {
public:
    /// Requires f2_hz > f1_hz > 0.
    ClockFrequencies(double f1_hz, double f2_hz);

    static ClockFrequencies from_beat(const DoubleWord& f1_hz, const DoubleWord& beat_hz);

    [[nodiscard]] const DoubleWord& f1() const { return f1_; }
    [[nodiscard]] DoubleWord f2() const { return f1_ + beat_; }
    [[nodiscard]] const DoubleWord& beat() const { return beat_; }
    [[nodiscard]] DoubleWord mean() const { return f1_ + beat_ * 0.5; }

    [[nodiscard]] double f1_hz() const { return f1_.to_double(); }
    [[nodiscard]] double f2_hz() const { return f2().to_double(); }
    [[nodiscard]] double beat_hz() const { return beat_.to_double(); }

private:
    ClockFrequencies(DoubleWord f1, DoubleWord beat);

    DoubleWord f1_;
    DoubleWord beat_;
};

/// Instantaneous drive pulse on one ground-clock transition. The phase is
/// wrapped into [0, 2pi) on construction; the angle must lie in [0, 2pi].
class PulseSpec {
public:
    PulseSpec(Transition transition, double angle, double phase = 0.0);

    [[nodiscard]] Transition transition() const { return transition_; }
    [[nodiscard]] double angle() const { return angle_; }
    [[nodiscard]] double phase() const { return phase_; }

private:
    Transition transition_;
    double angle_;
    double phase_;
};

/// Unitary of a pulse in the full 3-level space. Convention:
/// |g> -> cos(angle/2)|g> - i e^{i phase} sin(angle/2)|k>.
[[nodiscard]] Eigen::Matrix3cd pulse_unitary(const PulseSpec& pulse);

/// Rejects inputs whose norm differs from 1 by more than 1e-9.
[[nodiscard]] QutritState two_level_pulse(const QutritState& state, const PulseSpec& pulse);
[[nodiscard]] DensityMatrix3 two_level_pulse(const DensityMatrix3& rho, const PulseSpec& pulse);

/// Pulses bringing |g> to populations (0.5, 0.25, 0.25).
[[nodiscard]] std::array<PulseSpec, 2> tripod_pulses();
/// Two sequential pi/2 pulses, populations (0.25, 0.5, 0.25).
[[nodiscard]] std::array<PulseSpec, 2> double_pi_half_pulses();

/// Requires pure ground input (up to a global phase).
[[nodiscard]] QutritState tripod_split(const QutritState& state);

/// Arm phases 2*pi*f_k*t reduced into [0, 2pi) through ExtendedPhase.
struct ArmPhases {
    double clock1 = 0.0;
    double clock2 = 0.0;
};
[[nodiscard]] ArmPhases free_evolution_phases(const DoubleWord& duration_s, const ClockFrequencies& freqs);

/// amp_ck *= exp(-i 2pi f_k t); duration must be >= 0.
[[nodiscard]] QutritState free_evolve(const QutritState& state, const DoubleWord& duration_s,
                                      const ClockFrequencies& freqs);
[[nodiscard]] DensityMatrix3 free_evolve(const DensityMatrix3& rho, const DoubleWord& duration_s,
                                         const ClockFrequencies& freqs);

/// |cos(pi * beat * t)|: overlap of the two clock-arm states.
[[nodiscard]] double clock_overlap(const ClockFrequencies& freqs, const DoubleWord& t_s);

[[nodiscard]] Populations populations(const QutritState& state);
[[nodiscard]] Populations populations(const DensityMatrix3& rho);

}  // namespace clockinterf
