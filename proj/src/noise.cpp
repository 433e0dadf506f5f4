#include "clockinterf/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace clockinterf {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

bool lifetime_ok(double tau) { return tau > 0.0 && !std::isnan(tau); }

double survival(double t_s, double tau) { return std::isinf(tau) ? 1.0 : std::exp(-t_s / tau); }

std::uint64_t draw_binomial(std::uint64_t n, double p, Philox4x32& engine) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(engine);
}

}  // namespace

Philox4x32::Block Philox4x32::bijection(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

Philox4x32::result_type Philox4x32::operator()() {
    if (used_ == 4) {
        buffer_ = bijection({block_index_++, stream_[0], stream_[1], stream_[2]}, key_);
        used_ = 0;
    }
    return buffer_[used_++];
}

Philox4x32 StreamKey::engine(std::uint32_t family) const {
    if (point > 0xFFFFFFFFull || replicate > 0xFFFFFFFFull) {
        throw std::out_of_range("stream point and replicate indices must fit in 32 bits");
    }
    return Philox4x32({static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
                      {static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(replicate), family});
}

void NoiseConfig::validate() const {
    if (atoms_per_point < 1) throw std::invalid_argument("atoms_per_point must be >= 1");
    if (!lifetime_ok(tau_coherence_s)) throw std::invalid_argument("tau_coherence_s must be > 0 or infinite");
    if (!lifetime_ok(tau_clock_s)) throw std::invalid_argument("tau_clock_s must be > 0 or infinite");
    if (!lifetime_ok(tau_trap_s)) throw std::invalid_argument("tau_trap_s must be > 0 or infinite");
}

bool NoiseConfig::has_decoherence() const { return !std::isinf(tau_coherence_s) || !std::isinf(tau_clock_s); }

ShotCounts sample_shots(const Populations& probs, std::uint64_t n, const StreamKey& key) {
    constexpr double kNegativeTolerance = -1e-12;
    if (probs.ground < kNegativeTolerance || probs.clock1 < kNegativeTolerance || probs.clock2 < kNegativeTolerance) {
        throw std::invalid_argument("negative probability passed to sample_shots");
    }
    if (!(std::abs(probs.sum() - 1.0) <= 1e-9)) {
        throw std::invalid_argument("probabilities passed to sample_shots do not sum to 1");
    }
    const double pg = std::max(probs.ground, 0.0);
    const double p1 = std::max(probs.clock1, 0.0);
    const double p2 = std::max(probs.clock2, 0.0);

    Philox4x32 engine = key.engine();
    ShotCounts counts;
    counts.ground = draw_binomial(n, pg, engine);
    const std::uint64_t rest = n - counts.ground;
    const double excited = p1 + p2;
    counts.clock1 = excited > 0.0 ? draw_binomial(rest, p1 / excited, engine) : 0;
    counts.clock2 = rest - counts.clock1;
    return counts;
}

DensityMatrix3 apply_decoherence(const DensityMatrix3& rho, double t_s, const NoiseConfig& cfg) {
    if (!(t_s >= 0.0)) throw std::invalid_argument("decoherence time must be >= 0");
    const double coherence = survival(t_s, cfg.tau_coherence_s);
    const double keep = survival(t_s, cfg.tau_clock_s);  // 1 - decay probability
    const double keep_amp = std::sqrt(keep);

    Eigen::Matrix3cd m = rho.matrix();
    for (int k = 1; k <= 2; ++k) {
        m(0, k) *= coherence * keep_amp;
        m(k, 0) *= coherence * keep_amp;
    }
    const double decayed = (1.0 - keep) * (m(1, 1).real() + m(2, 2).real());
    m(1, 1) *= keep;
    m(2, 2) *= keep;
    m(1, 2) *= keep;
    m(2, 1) *= keep;
    m(0, 0) += decayed;
    return DensityMatrix3{m};
}

double trap_survival(double t_s, const NoiseConfig& cfg) {
    if (!(t_s >= 0.0)) throw std::invalid_argument("trap survival time must be >= 0");
    return survival(t_s, cfg.tau_trap_s);
}

}  // namespace clockinterf
