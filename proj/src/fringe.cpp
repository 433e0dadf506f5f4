#include "clockinterf/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "clockinterf/errors.hpp"
#include "levenberg_marquardt.hpp"

namespace clockinterf {

namespace {

constexpr double kPi = std::numbers::pi;

// Interior local minima with a prominence of at least 10% of the curve
// range: on each side the curve must climb that far before it dips below
// the candidate. Noise wiggles inside one valley are discarded.
std::vector<std::size_t> sampled_minima(const std::vector<double>& v) {
    std::vector<std::size_t> out;
    if (v.size() < 3) return out;
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double range = *hi_it - *lo_it;
    if (!(range > 1e-9)) return out;
    const double needed = 0.1 * range;

    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (!(v[i] <= v[i - 1] && v[i] <= v[i + 1])) continue;
        bool left = false;
        for (std::size_t j = i; j-- > 0;) {
            if (v[j] < v[i]) break;
            if (v[j] - v[i] >= needed) {
                left = true;
                break;
            }
        }
        if (!left) continue;
        bool right = false;
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            if (v[j] <= v[i]) break;
            if (v[j] - v[i] >= needed) {
                right = true;
                break;
            }
        }
        if (right) out.push_back(i);
    }
    return out;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Period guess from sampled minima; falls back to a curve that starts on a
// visibility maximum when only one minimum is present.
double period_guess(const std::vector<double>& t, const std::vector<std::size_t>& minima) {
    if (minima.size() >= 2) {
        std::vector<double> gaps;
        for (std::size_t k = 1; k < minima.size(); ++k) gaps.push_back(t[minima[k]] - t[minima[k - 1]]);
        return median(std::move(gaps));
    }
    return 2.0 * (t[minima.front()] - t.front());
}

struct NullWindow {
    std::vector<double> t;
    std::vector<double> v2;
};

NullWindow window_around(const std::vector<double>& t, const std::vector<double>& v, std::size_t centre,
                         double half_width) {
    std::size_t lo = centre;
    std::size_t hi = centre;
    while (lo > 0 && t[centre] - t[lo - 1] <= half_width) --lo;
    while (hi + 1 < t.size() && t[hi + 1] - t[centre] <= half_width) ++hi;
    // Always keep the immediate neighbours.
    lo = std::min(lo, centre - 1);
    hi = std::max(hi, centre + 1);
    NullWindow w;
    for (std::size_t i = lo; i <= hi; ++i) {
        w.t.push_back(t[i]);
        w.v2.push_back(v[i] * v[i]);
    }
    return w;
}

struct NullFit {
    double t_null = 0.0;
    bool ok = false;
};

// Fits v^2 = A^2 (1 + k (t - t0)) sin^2(pi (t - t0) / P) + B in the window.
// B absorbs the noise floor of fitted amplitudes and k the tilt of a
// decaying envelope; both are fitted once the window has enough points.
NullFit fit_null(const NullWindow& w, double t_guess, double period, bool free_period) {
    const auto n = static_cast<Eigen::Index>(w.t.size());
    const bool shape = n >= 5;

    double amp2 = 0.0;
    for (std::size_t i = 0; i < w.t.size(); ++i) {
        const double s = std::sin(kPi * (w.t[i] - t_guess) / period);
        if (s * s > 1e-6) amp2 = std::max(amp2, w.v2[i] / (s * s));
    }
    if (amp2 <= 0.0) amp2 = 1.0;

    // Parameter layout: A^2, t0, [B, k], [P].
    const Eigen::Index i_floor = 2;
    const Eigen::Index i_tilt = 3;
    const Eigen::Index i_period = shape ? 4 : 2;
    Eigen::VectorXd p0(2 + (shape ? 2 : 0) + (free_period ? 1 : 0));
    p0(0) = amp2;
    p0(1) = t_guess;
    if (shape) {
        p0(i_floor) = 0.0;
        p0(i_tilt) = 0.0;
    }
    if (free_period) p0(i_period) = period;

    auto evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double per = free_period ? p(i_period) : period;
        const double floor_term = shape ? p(i_floor) : 0.0;
        const double tilt = shape ? p(i_tilt) : 0.0;
        r.resize(n);
        jac.resize(n, p.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dt = w.t[static_cast<std::size_t>(i)] - p(1);
            const double x = kPi * dt / per;
            const double s2 = std::sin(x) * std::sin(x);
            const double s2x = std::sin(2.0 * x);
            const double env = 1.0 + tilt * dt;
            r(i) = p(0) * env * s2 + floor_term - w.v2[static_cast<std::size_t>(i)];
            jac(i, 0) = env * s2;
            jac(i, 1) = -p(0) * (tilt * s2 + env * s2x * kPi / per);
            if (shape) {
                jac(i, i_floor) = 1.0;
                jac(i, i_tilt) = p(0) * dt * s2;
            }
            if (free_period) jac(i, i_period) = -p(0) * env * s2x * x / per;
        }
    };
    const auto fit = detail::levenberg_marquardt(evaluate, p0, 200);
    NullFit out;
    out.t_null = fit.params(1);
    out.ok = fit.converged && std::isfinite(out.t_null) && out.t_null >= w.t.front() && out.t_null <= w.t.back();
    if (free_period) out.ok = out.ok && std::abs(fit.params(i_period) / period - 1.0) < 0.2;
    return out;
}

// The local period is fitted when the window allows it; with noisy data it
// can run off towards the parabolic limit, in which case it is held at the
// global estimate.
double refine_null(const NullWindow& w, double t_guess, double period) {
    if (w.t.size() >= 7) {
        const NullFit free = fit_null(w, t_guess, period, true);
        if (free.ok) return free.t_null;
    }
    const NullFit fixed = fit_null(w, t_guess, period, false);
    if (!fixed.ok) {
        std::ostringstream msg;
        msg << "null refinement near t = " << t_guess << " s did not converge inside its window";
        throw NumericalError(msg.str());
    }
    return fixed.t_null;
}

}  // namespace

double FringeFit::evaluate(double phase) const { return offset + amplitude * std::cos(phase - phase0); }

FringeFit fit_fringe(std::span<const double> phases, std::span<const double> values) {
    if (phases.size() != values.size()) throw std::invalid_argument("fit_fringe: phase/value length mismatch");
    if (phases.size() < static_cast<std::size_t>(kMinPhases)) {
        throw std::invalid_argument("fit_fringe needs at least 8 points");
    }
    const auto n = static_cast<Eigen::Index>(phases.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double phi = phases[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = std::cos(phi);
        design(i, 2) = std::sin(phi);
        y(i) = values[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw NumericalError("fit_fringe: rank-deficient design (duplicate or too few distinct phases)");

    const Eigen::Vector3d coef = qr.solve(y);
    FringeFit fit;
    fit.offset = coef(0);
    fit.amplitude = std::hypot(coef(1), coef(2));
    fit.phase0 = std::atan2(coef(2), coef(1));
    fit.rms_residual = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(n));
    return fit;
}

FringeFit fit_fringe(const FringeDataset& data, Level channel) {
    const auto phases = data.phases();
    const auto values = data.channel(channel);
    return fit_fringe(phases, values);
}

double visibility_amp(const FringeFit& fit, double reference_amplitude) {
    if (!(reference_amplitude > 0.0)) throw std::invalid_argument("reference amplitude must be > 0");
    return std::clamp(fit.amplitude / reference_amplitude, 0.0, 1.0 + 1e-6);
}

double visibility_minmax(const FringeFit& fit) {
    // (off + A) - (off - A) over (off + A) + (off - A).
    if (!(fit.offset > 0.0)) return 0.0;
    return fit.amplitude / fit.offset;
}

double visibility_minmax(const FringeDataset& data, Level channel) { return visibility_minmax(fit_fringe(data, channel)); }

AnalyticBeatModel AnalyticBeatModel::from(const ClockFrequencies& freqs) {
    return {freqs.beat_hz(), freqs.mean().to_double()};
}

double analytic_population(double t_s, const AnalyticBeatModel& model, double phase) {
    if (!(t_s >= 0.0)) throw std::invalid_argument("analytic_population requires t >= 0");
    // cos(pi df t) has period 2 in df t; reduce over that period exactly.
    const double x = frac(exact_product(model.delta_f_hz, t_s) * 0.5).to_double();
    return 0.5 * (1.0 + std::cos(2.0 * kPi * x) * std::cos(phase));
}

// ---------------------------------------------------------------------------

std::vector<double> find_nulls(const VisibilityCurve& curve, std::size_t max_count) {
    curve.validate();
    const auto t = curve.times();
    const auto v = curve.values();
    if (t.size() < 3 || max_count == 0) return {};

    const auto minima = sampled_minima(v);
    if (minima.empty()) return {};

    const double period0 = period_guess(t, minima);
    if (!(period0 > 0.0)) return {};

    const std::size_t count = std::min(max_count, minima.size());
    std::vector<double> nulls;
    nulls.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const NullWindow w = window_around(t, v, minima[k], 0.2 * period0);
        nulls.push_back(refine_null(w, t[minima[k]], period0));
    }
    return nulls;
}

BeatEstimate estimate_beat(const VisibilityCurve& curve, const BeatFitOptions& options) {
    curve.validate();
    const auto t = curve.times();
    const auto v = curve.values();
    const auto n = static_cast<Eigen::Index>(t.size());
    if (n < 8) throw std::invalid_argument("estimate_beat needs at least 8 curve points");
    if (!options.fit_decay && !(options.tau_s > 0.0)) throw std::invalid_argument("tau_s must be > 0");

    const auto minima = sampled_minima(v);
    if (minima.size() < 2) {
        throw NumericalError("estimate_beat: curve must span at least two modulation periods (found " +
                             std::to_string(minima.size()) + " visibility minima)");
    }
    const double first = t[minima.front()];
    const double last = t[minima.back()];
    double beat0 = static_cast<double>(minima.size() - 1) / (last - first);

    const double fixed_rate = options.fit_decay ? 0.0 : 1.0 / options.tau_s;
    const bool fit_rate = options.fit_decay;

    auto model_eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double beat = p(0);
        const double rate = fit_rate ? p(1) : fixed_rate;
        r.resize(n);
        jac.resize(n, p.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ti = t[static_cast<std::size_t>(i)];
            const double arg = kPi * beat * ti;
            const double c = std::cos(arg);
            const double envelope = std::exp(-rate * ti);
            const double model = std::abs(c) * envelope;
            r(i) = model - v[static_cast<std::size_t>(i)];
            jac(i, 0) = -(c < 0.0 ? -1.0 : 1.0) * std::sin(arg) * kPi * ti * envelope;
            if (fit_rate) jac(i, 1) = -ti * model;
        }
    };

    // Coarse scan over +-half a period of accumulated phase at the last
    // sample so that the local solver starts inside the right basin.
    {
        const double span = t.back() - t.front();
        const double half_width = 0.5 / std::max(span, 1e-300);
        double best = beat0;
        double best_cost = std::numeric_limits<double>::infinity();
        Eigen::VectorXd p(fit_rate ? 2 : 1);
        Eigen::VectorXd r;
        Eigen::MatrixXd jac;
        for (int k = -40; k <= 40; ++k) {
            p(0) = beat0 + half_width * k / 40.0;
            if (fit_rate) p(1) = 0.0;
            if (!(p(0) > 0.0)) continue;
            model_eval(p, r, jac);
            const double cost = r.squaredNorm();
            if (cost < best_cost) {
                best_cost = cost;
                best = p(0);
            }
        }
        beat0 = best;
    }

    Eigen::VectorXd p0(fit_rate ? 2 : 1);
    p0(0) = beat0;
    if (fit_rate) p0(1) = 0.0;
    const auto fit = detail::levenberg_marquardt(model_eval, p0, options.max_iterations);
    if (!fit.converged || !std::isfinite(fit.params(0))) {
        std::ostringstream msg;
        msg << "estimate_beat did not converge after " << fit.iterations << " iterations (beat = " << fit.params(0)
            << ", rss = " << fit.cost << ")";
        throw NumericalError(msg.str());
    }

    // Sandwich covariance (HC1).
    const Eigen::MatrixXd& jac = fit.jacobian;
    const auto k = jac.cols();
    const Eigen::MatrixXd bread = (jac.transpose() * jac).inverse();
    const Eigen::MatrixXd meat = jac.transpose() * fit.residuals.array().square().matrix().asDiagonal() * jac;
    const double dof_scale = static_cast<double>(n) / static_cast<double>(n - k);
    const Eigen::MatrixXd cov = dof_scale * bread * meat * bread;

    BeatEstimate est;
    est.delta_f_hz = fit.params(0);
    est.stderr_hz = std::sqrt(std::max(cov(0, 0), 0.0));
    est.tau_s = fit_rate ? (fit.params(1) > 0.0 ? 1.0 / fit.params(1) : std::numeric_limits<double>::infinity())
                         : options.tau_s;
    est.rms_residual = std::sqrt(fit.cost / static_cast<double>(n));
    est.iterations = fit.iterations;
    return est;
}

}  // namespace clockinterf
