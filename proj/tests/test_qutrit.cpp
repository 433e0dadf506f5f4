#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "clockinterf/qutrit.hpp"

using namespace clockinterf;
using std::numbers::pi;

namespace {

QutritState random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3cd v;
    for (int k = 0; k < 3; ++k) v(k) = cplx(n(rng), n(rng));
    return QutritState(v.normalized());
}

double arm_phase_difference(const QutritState& s) { return std::arg(s.amp_c1() * std::conj(s.amp_c2())); }

double wrapped_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * pi)); }

}  // namespace

TEST_CASE("single pulses") {
    auto p = populations(two_level_pulse(QutritState::ground(), PulseSpec(Transition::ground_clock1, pi / 2)));
    CHECK(p.ground == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.clock1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.clock2 == 0.0);

    p = populations(two_level_pulse(QutritState::ground(), PulseSpec(Transition::ground_clock2, pi)));
    CHECK(std::abs(p.ground) < 1e-12);
    CHECK(p.clock1 == 0.0);
    CHECK(std::abs(p.clock2 - 1.0) < 1e-12);
}

TEST_CASE("pulse sign convention") {
    const auto s = two_level_pulse(QutritState::ground(), PulseSpec(Transition::ground_clock1, pi / 2, 0.3));
    const cplx want = -cplx(0, 1) * std::exp(cplx(0, 0.3)) * std::sin(pi / 4);
    CHECK(std::abs(s.amp_c1() - want) < 1e-15);
    CHECK(std::abs(s.amp_g() - std::cos(pi / 4)) < 1e-15);
}

TEST_CASE("pulse followed by its phase-shifted twin is the identity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    std::uniform_real_distribution<double> phase(0.0, 2 * pi);
    for (int i = 0; i < 500; ++i) {
        const auto s = random_state(rng);
        const auto tr = i % 2 ? Transition::ground_clock1 : Transition::ground_clock2;
        const double th = angle(rng);
        const double ph = phase(rng);
        const auto back = two_level_pulse(two_level_pulse(s, PulseSpec(tr, th, ph)), PulseSpec(tr, th, ph + pi));
        CHECK((back.vector() - s.vector()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("unitarity over 1e4 composed operations") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ClockFrequencies freqs(429228004229873.0, 518295836590863.6);
    auto s = random_state(rng);
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
        if (u(rng) < 0.5) {
            const auto tr = u(rng) < 0.5 ? Transition::ground_clock1 : Transition::ground_clock2;
            s = two_level_pulse(s, PulseSpec(tr, 2 * pi * u(rng), 2 * pi * u(rng)));
        } else {
            s = free_evolve(s, DoubleWord(u(rng)), freqs);
        }
        worst = std::max(worst, std::abs(s.norm_squared() - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("pulse unitary is unitary") {
    const auto u = pulse_unitary(PulseSpec(Transition::ground_clock2, 1.234, 5.6));
    CHECK((u * u.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(u(1, 1) == cplx(1.0, 0.0));
}

TEST_CASE("non-normalized input and bad pulse parameters are rejected") {
    const QutritState bad(1.0, 0.1, 0.0);
    CHECK_THROWS_AS((void)two_level_pulse(bad, PulseSpec(Transition::ground_clock1, pi / 2)), std::invalid_argument);
    CHECK_THROWS_AS(PulseSpec(Transition::ground_clock1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(PulseSpec(Transition::ground_clock1, 7.0), std::invalid_argument);
    CHECK(PulseSpec(Transition::ground_clock1, 1.0, -pi / 2).phase() == doctest::Approx(1.5 * pi));
}

TEST_CASE("tripod split") {
    const auto s = tripod_split(QutritState::ground());
    const auto p = populations(s);
    CHECK(std::abs(p.ground - 0.5) < 1e-12);
    CHECK(std::abs(p.clock1 - 0.25) < 1e-12);
    CHECK(std::abs(p.clock2 - 0.25) < 1e-12);
    CHECK(std::abs(std::abs(s.amp_c1()) - 0.5) < 1e-15);
    CHECK(std::abs(std::abs(s.amp_c2()) - 0.5) < 1e-15);
    // Angles chosen in closed form.
    CHECK(std::abs(std::pow(std::sin(pi / 6), 2) - 0.25) < 1e-15);
    CHECK(std::abs(0.75 * std::pow(std::sin(std::asin(1 / std::sqrt(3.0))), 2) - 0.25) < 1e-15);

    const QutritState phased(std::exp(cplx(0, 0.7)), 0.0, 0.0);
    CHECK(std::abs(populations(tripod_split(phased)).ground - 0.5) < 1e-12);
    CHECK_THROWS_AS((void)tripod_split(s), std::invalid_argument);
}

TEST_CASE("populations of the ground state") {
    const auto p = populations(QutritState::ground());
    CHECK(p.ground == 1.0);
    CHECK(p.clock1 == 0.0);
    CHECK(p.clock2 == 0.0);
    CHECK(p[Level::ground] == 1.0);
}

TEST_CASE("clock frequencies") {
    CHECK_THROWS_AS(ClockFrequencies(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ClockFrequencies(1.25, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ClockFrequencies(0.0, 1.0), std::invalid_argument);
    const ClockFrequencies f(1.0, 1.25);
    CHECK(f.beat_hz() == 0.25);
    CHECK(f.mean().to_double() == 1.125);
}

TEST_CASE("free evolution") {
    const ClockFrequencies f(1.0, 1.25);
    const auto s = tripod_split(QutritState::ground());

    const auto same = free_evolve(s, DoubleWord(0.0), f);
    CHECK((same.vector() - s.vector()).cwiseAbs().maxCoeff() == 0.0);

    // 2 pi * 0.25 Hz * 2 s = pi between the arms.
    const auto e = free_evolve(s, DoubleWord(2.0), f);
    CHECK(wrapped_distance(arm_phase_difference(e) - arm_phase_difference(s), pi) < 1e-12);
    CHECK(e.amp_g() == s.amp_g());

    // Integer cycle counts for both clocks at t = 1/(2 df).
    const ClockFrequencies g(10.0, 12.0);
    const auto h = free_evolve(s, DoubleWord(0.25), g);
    CHECK(wrapped_distance(arm_phase_difference(h) - arm_phase_difference(s), pi) < 1e-12);

    CHECK_THROWS_AS((void)free_evolve(s, DoubleWord(-1.0), f), std::invalid_argument);
}

TEST_CASE("free evolution composes, including beyond 1e15 cycles") {
    const ClockFrequencies f(429228004229873.0, 429228004229873.0 + 1e9);
    const auto s = tripod_split(QutritState::ground());
    // f * t ~ 4.3e15 and 8.6e15 cycles.
    for (const auto& [t1, t2] : {std::pair{10.0, 10.5}, std::pair{3.3, 17.25}, std::pair{0.1, 0.2}}) {
        const auto split = free_evolve(free_evolve(s, DoubleWord(t1), f), DoubleWord(t2), f);
        const auto whole = free_evolve(s, DoubleWord(t1) + DoubleWord(t2), f);
        CHECK(wrapped_distance(arm_phase_difference(split), arm_phase_difference(whole)) < 1e-12);
        CHECK(wrapped_distance(std::arg(split.amp_c1()), std::arg(whole.amp_c1())) < 1e-12);
    }
}

TEST_CASE("arm phases follow 2 pi f t modulo 2 pi") {
    const ClockFrequencies f(1.0, 1.25);
    const auto ph = free_evolution_phases(DoubleWord(0.4), f);
    CHECK(std::abs(ph.clock1 - 2 * pi * 0.4) < 1e-14);
    CHECK(std::abs(ph.clock2 - 2 * pi * 0.5) < 1e-14);
}

TEST_CASE("clock overlap") {
    const ClockFrequencies f(1.0, 1.25);
    CHECK(clock_overlap(f, DoubleWord(0.0)) == 1.0);
    CHECK(clock_overlap(f, DoubleWord(2.0)) < 1e-15);
    CHECK(std::abs(clock_overlap(f, DoubleWord(4.0)) - 1.0) < 1e-15);
    CHECK(std::abs(clock_overlap(f, DoubleWord(1.0)) - std::cos(pi / 4)) < 1e-15);

    // Optical carriers with a 1 GHz beat: overlap set by the beat alone.
    const ClockFrequencies g(4.29e14, 4.29e14 + 1e9);
    CHECK(std::abs(clock_overlap(g, DoubleWord(1000.25e-9)) - std::cos(pi / 4)) < 1e-9);
}

TEST_CASE("density matrices") {
    const auto rho = DensityMatrix3::from_pure(tripod_split(QutritState::ground()));
    CHECK(std::abs(rho.trace() - 1.0) < 1e-15);
    CHECK(rho.hermiticity_defect() < 1e-15);
    CHECK(rho.min_eigenvalue() > -1e-12);
    CHECK_NOTHROW(rho.validate());

    const auto mixed = DensityMatrix3::maximally_mixed();
    CHECK(std::abs(mixed.min_eigenvalue() - 1.0 / 3) < 1e-15);

    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    CHECK_THROWS_AS(DensityMatrix3(m).validate(), std::invalid_argument);

    // Pulses on the density matrix agree with the pure-state path.
    const PulseSpec pulse(Transition::ground_clock2, 0.9, 2.2);
    const auto via_rho = two_level_pulse(rho, pulse);
    const auto via_psi = DensityMatrix3::from_pure(two_level_pulse(tripod_split(QutritState::ground()), pulse));
    CHECK((via_rho.matrix() - via_psi.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}
