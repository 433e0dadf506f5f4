#include "clockinterf/qutrit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clockinterf {

namespace {

constexpr double kNormTolerance = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_normalized(const QutritState& state) {
    const double deviation = std::abs(state.norm_squared() - 1.0);
    if (!(deviation <= kNormTolerance)) {
        throw std::invalid_argument("qutrit state is not normalized (|norm^2 - 1| = " + std::to_string(deviation) +
                                    ")");
    }
}

void require_nonnegative(const DoubleWord& duration) {
    if (!duration.is_finite() || duration.hi < 0.0) {
        throw std::invalid_argument("free evolution duration must be finite and >= 0");
    }
}

cplx unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

double Populations::operator[](Level level) const {
    switch (level) {
        case Level::ground: return ground;
        case Level::clock1: return clock1;
        case Level::clock2: return clock2;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

DensityMatrix3 DensityMatrix3::from_pure(const QutritState& state) {
    return DensityMatrix3{state.vector() * state.vector().adjoint()};
}

DensityMatrix3 DensityMatrix3::maximally_mixed() {
    return DensityMatrix3{Eigen::Matrix3cd::Identity() / 3.0};
}

double DensityMatrix3::min_eigenvalue() const {
    const Eigen::Matrix3cd hermitian = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(hermitian, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void DensityMatrix3::validate() const {
    if (!rho_.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
    if (hermiticity_defect() > 1e-12) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > 1e-12) throw std::invalid_argument("density matrix trace differs from 1");
    if (min_eigenvalue() < -1e-10) throw std::invalid_argument("density matrix has a negative eigenvalue");
}

// ---------------------------------------------------------------------------

ClockFrequencies::ClockFrequencies(DoubleWord f1, DoubleWord beat) : f1_(f1), beat_(beat) {
    if (!f1_.is_finite() || !beat_.is_finite() || !(f1_.hi > 0.0)) {
        throw std::invalid_argument("clock 1 frequency must be finite and positive");
    }
    if (!(beat_.hi > 0.0)) {
        throw std::invalid_argument("clock 2 must have a larger transition frequency than clock 1 (f2 > f1)");
    }
}

ClockFrequencies::ClockFrequencies(double f1_hz, double f2_hz)
    : ClockFrequencies(DoubleWord{f1_hz}, exact_sum(f2_hz, -f1_hz)) {}

ClockFrequencies ClockFrequencies::from_beat(const DoubleWord& f1_hz, const DoubleWord& beat_hz) {
    return ClockFrequencies{f1_hz, beat_hz};
}

// ---------------------------------------------------------------------------

PulseSpec::PulseSpec(Transition transition, double angle, double phase) : transition_(transition), angle_(angle) {
    if (!std::isfinite(angle) || angle < 0.0 || angle > kTwoPi) {
        throw std::invalid_argument("pulse angle must lie in [0, 2pi]");
    }
    if (!std::isfinite(phase)) throw std::invalid_argument("pulse phase must be finite");
    phase_ = std::fmod(phase, kTwoPi);
    if (phase_ < 0.0) phase_ += kTwoPi;
    if (phase_ >= kTwoPi) phase_ = 0.0;
}

Eigen::Matrix3cd pulse_unitary(const PulseSpec& pulse) {
    const int k = pulse.transition() == Transition::ground_clock1 ? 1 : 2;
    const double c = std::cos(0.5 * pulse.angle());
    const double s = std::sin(0.5 * pulse.angle());
    const cplx minus_i{0.0, -1.0};

    Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
    u(0, 0) = c;
    u(k, k) = c;
    u(k, 0) = minus_i * unit_phasor(pulse.phase()) * s;
    u(0, k) = minus_i * unit_phasor(-pulse.phase()) * s;
    return u;
}

QutritState two_level_pulse(const QutritState& state, const PulseSpec& pulse) {
    require_normalized(state);
    return QutritState{pulse_unitary(pulse) * state.vector()};
}

DensityMatrix3 two_level_pulse(const DensityMatrix3& rho, const PulseSpec& pulse) {
    const Eigen::Matrix3cd u = pulse_unitary(pulse);
    return DensityMatrix3{u * rho.matrix() * u.adjoint()};
}

std::array<PulseSpec, 2> tripod_pulses() {
    // sin^2(pi/6) = 1/4 moves a quarter to |c1>; the remaining 3/4 in |g>
    // then gives up a third of itself to |c2>.
    return {PulseSpec{Transition::ground_clock1, std::numbers::pi / 3.0},
            PulseSpec{Transition::ground_clock2, 2.0 * std::asin(1.0 / std::sqrt(3.0))}};
}

std::array<PulseSpec, 2> double_pi_half_pulses() {
    return {PulseSpec{Transition::ground_clock1, std::numbers::pi / 2.0},
            PulseSpec{Transition::ground_clock2, std::numbers::pi / 2.0}};
}

QutritState tripod_split(const QutritState& state) {
    require_normalized(state);
    if (std::abs(state.amp_c1()) > kNormTolerance || std::abs(state.amp_c2()) > kNormTolerance) {
        throw std::invalid_argument("tripod_split requires the pure ground state as input");
    }
    QutritState out = state;
    for (const auto& pulse : tripod_pulses()) out = two_level_pulse(out, pulse);
    return out;
}

// ---------------------------------------------------------------------------

ArmPhases free_evolution_phases(const DoubleWord& duration_s, const ClockFrequencies& freqs) {
    require_nonnegative(duration_s);
    const DoubleWord cycles1 = freqs.f1() * duration_s;
    const DoubleWord cycles2 = cycles1 + freqs.beat() * duration_s;
    return {ExtendedPhase::from_cycles(cycles1).reduced(), ExtendedPhase::from_cycles(cycles2).reduced()};
}

QutritState free_evolve(const QutritState& state, const DoubleWord& duration_s, const ClockFrequencies& freqs) {
    const ArmPhases phases = free_evolution_phases(duration_s, freqs);
    return {state.amp_g(), state.amp_c1() * unit_phasor(-phases.clock1),
            state.amp_c2() * unit_phasor(-phases.clock2)};
}

DensityMatrix3 free_evolve(const DensityMatrix3& rho, const DoubleWord& duration_s, const ClockFrequencies& freqs) {
    const ArmPhases phases = free_evolution_phases(duration_s, freqs);
    const Eigen::Vector3cd diag(1.0, unit_phasor(-phases.clock1), unit_phasor(-phases.clock2));
    return DensityMatrix3{diag.asDiagonal() * rho.matrix() * diag.conjugate().asDiagonal()};
}

double clock_overlap(const ClockFrequencies& freqs, const DoubleWord& t_s) {
    require_nonnegative(t_s);
    // Half the beat phase, reduced exactly: |cos(pi x)| has period 1 in x.
    const double x = frac(freqs.beat() * t_s).to_double();
    return std::abs(std::cos(std::numbers::pi * x));
}

Populations populations(const QutritState& state) {
    return {std::norm(state.amp_g()), std::norm(state.amp_c1()), std::norm(state.amp_c2())};
}

Populations populations(const DensityMatrix3& rho) {
    const auto& m = rho.matrix();
    return {m(0, 0).real(), m(1, 1).real(), m(2, 2).real()};
}

}  // namespace clockinterf
