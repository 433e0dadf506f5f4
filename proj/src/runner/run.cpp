#include <cmath>
#include <numeric>
#include <stdexcept>

#include "clockinterf/clockinterf.hpp"
#include "clockinterf/runner.hpp"
#include "parallel.hpp"
#include "runner/output.hpp"

namespace clockinterf::runner {

using nlohmann::json;
using detail::Table;

namespace {

// Re-throws failures from a pipeline stage with the stage name attached,
// keeping the error category.
template <typename F>
auto stage(const char* module, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(module) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw NumericalError(std::string(module) + ": " + e.what());
    } catch (const std::out_of_range& e) {
        throw NumericalError(std::string(module) + ": " + e.what());
    }
}

ShiftRegime regime(const RunConfig& c) { return c.units == Units::physical ? ShiftRegime::physical : ShiftRegime::scaled; }

ClockFrequencies effective_frequencies(const RunConfig& c) {
    const ClockFrequencies base = c.frequencies();
    if (!c.has_shift()) return base;
    return shift_frequencies(base, c.shift(), regime(c));
}

NoiseConfig noise_for(const RunConfig& c) {
    NoiseConfig n = c.noise.value_or(NoiseConfig{});
    n.seed = c.seed;
    return n;
}

CurveOptions curve_options(const RunConfig& c) {
    CurveOptions o;
    o.n_phases = c.n_phases;
    o.threads = c.threads;
    if (c.noise) {
        o.noise = noise_for(c);
        o.sample = c.sample;
    }
    return o;
}

json fit_json(const FringeFit& fit) {
    return {{"offset", fit.offset},
            {"amplitude", fit.amplitude},
            {"phase0", fit.phase0},
            {"rms_residual", fit.rms_residual}};
}

json dw_json(const DoubleWord& x) { return {{"value", x.to_double()}, {"hi", x.hi}, {"lo", x.lo}}; }

Table visibility_table(const std::string& stem, const VisibilityCurve& curve) {
    Table t{stem, "visibility/v1", {"t_s", "visibility", "residual"}, {}};
    t.rows.reserve(curve.entries.size());
    for (const auto& e : curve.entries) t.rows.push_back({e.t_s, e.visibility, e.fit_residual});
    return t;
}

// Nulls, period and beat estimate of one curve; failures of the optional
// analyses are reported in the summary instead of aborting the run.
json analyse_curve(const VisibilityCurve& curve, const RunConfig& c) {
    json out;
    try {
        const auto nulls = find_nulls(curve, curve.entries.size());
        out["nulls_s"] = nulls;
        if (nulls.size() >= 2) {
            out["null_period_s"] = (nulls.back() - nulls.front()) / static_cast<double>(nulls.size() - 1);
        }
    } catch (const NumericalError& e) {
        out["nulls_s"] = json::array();
        out["nulls_error"] = std::string("fringe-analysis: ") + e.what();
    }
    try {
        BeatFitOptions opts;
        opts.fit_decay = c.fit_decay;
        const BeatEstimate est = estimate_beat(curve, opts);
        out["beat"] = {{"delta_f_hz", est.delta_f_hz},
                       {"stderr_hz", est.stderr_hz},
                       {"tau_s", std::isinf(est.tau_s) ? json("inf") : json(est.tau_s)},
                       {"rms_residual", est.rms_residual},
                       {"iterations", est.iterations}};
    } catch (const NumericalError& e) {
        out["beat"] = {{"error", std::string("fringe-analysis: ") + e.what()}};
    }
    return out;
}

double max_overlap_deviation(const VisibilityCurve& curve, const ClockFrequencies& freqs) {
    double worst = 0.0;
    for (const auto& e : curve.entries) worst = std::max(worst, std::abs(e.visibility - clock_overlap(freqs, e.t_s)));
    return worst;
}

struct ModeOutput {
    json summary;
    std::vector<Table> tables;
};

ModeOutput run_fringe(const RunConfig& c) {
    const ClockFrequencies freqs = stage("gravity-redshift", [&] { return effective_frequencies(c); });
    const RamseySequence seq{c.prep, DoubleWord{c.interrogation_s}, 0.0, freqs};
    const FringeDataset data = stage("sequence-engine", [&] {
        if (!c.noise) return phase_scan(seq, c.n_phases);
        return phase_scan(seq, c.n_phases, SamplingSpec{noise_for(c), 0, 0, c.sample});
    });

    Table table{"fringe", "fringe/v1", {"phase_rad", "p_g", "p_c1", "p_c2"}, {}};
    if (data.shot_counts) table.columns.insert(table.columns.end(), {"n_g", "n_c1", "n_c2"});
    for (std::size_t k = 0; k < data.points.size(); ++k) {
        const auto& p = data.points[k];
        std::vector<detail::Cell> row{p.phase_rad, p.probs.ground, p.probs.clock1, p.probs.clock2};
        if (data.shot_counts) {
            const auto& n = (*data.shot_counts)[k];
            row.insert(row.end(), {n.ground, n.clock1, n.clock2});
        }
        table.rows.push_back(std::move(row));
    }

    ModeOutput out;
    stage("fringe-analysis", [&] {
        const FringeFit ground = fit_fringe(data, Level::ground);
        const double overlap = clock_overlap(freqs, seq.interrogation_s);
        out.summary["fit"] = {{"ground", fit_json(ground)},
                              {"clock1", fit_json(fit_fringe(data, Level::clock1))},
                              {"clock2", fit_json(fit_fringe(data, Level::clock2))}};
        out.summary["visibility_amp"] = visibility_amp(ground, reference_amplitude(c.prep, c.n_phases));
        out.summary["visibility_minmax"] = visibility_minmax(ground);
        out.summary["clock_overlap"] = overlap;
        if (c.prep == Preparation::tripod) {
            out.summary["tripod_model"] = {{"amplitude", 0.5 * overlap},
                                           {"offset", 0.25 * (1.0 + overlap * overlap)},
                                           {"two_path_offset", 0.5}};
        }
        if (c.noise) out.summary["trap_survival"] = trap_survival(c.interrogation_s, noise_for(c));
        return 0;
    });
    out.tables.push_back(std::move(table));
    return out;
}

ModeOutput run_visibility(const RunConfig& c) {
    const ClockFrequencies freqs = stage("gravity-redshift", [&] { return effective_frequencies(c); });
    const RamseySequence seq{c.prep, DoubleWord{0.0}, 0.0, freqs};
    const auto grid = c.t_grid.points();
    const VisibilityCurve curve = stage("sequence-engine", [&] { return visibility_curve(seq, grid, curve_options(c)); });

    ModeOutput out;
    out.summary = analyse_curve(curve, c);
    out.summary["beat_hz_configured"] = freqs.beat_hz();
    out.summary["expected_period_s"] = 1.0 / freqs.beat_hz();
    if (!c.noise && c.prep == Preparation::tripod) {
        out.summary["max_deviation_from_clock_overlap"] = max_overlap_deviation(curve, freqs);
    }
    out.tables.push_back(visibility_table("visibility", curve));
    return out;
}

ModeOutput run_redshift_compare(const RunConfig& c) {
    const ClockFrequencies reference = c.frequencies();
    const DoubleWord eps = stage("gravity-redshift", [&] { return c.shift(); });
    const ClockFrequencies shifted = stage("gravity-redshift", [&] { return shift_frequencies(reference, eps, regime(c)); });
    const auto grid = c.t_grid.points();
    const CurveOptions options = curve_options(c);

    const auto curve_for = [&](const ClockFrequencies& f) {
        return stage("sequence-engine", [&] {
            return visibility_curve(RamseySequence{c.prep, DoubleWord{0.0}, 0.0, f}, grid, options);
        });
    };
    const VisibilityCurve ref_curve = curve_for(reference);
    const VisibilityCurve shift_curve = curve_for(shifted);

    ModeOutput out;
    out.summary["eps"] = dw_json(eps);
    if (c.redshift) {
        out.summary["redshift_factor"] = dw_json(redshift_factor(*c.redshift));
        out.summary["redshift_factor_rounded_c2"] = redshift_factor_rounded_c2(*c.redshift);
    }
    out.summary["beat_ratio_exact"] = dw_json(shifted.beat() / reference.beat());
    out.summary["reference"] = analyse_curve(ref_curve, c);
    out.summary["shifted"] = analyse_curve(shift_curve, c);
    const json& rb = out.summary["reference"]["beat"];
    const json& sb = out.summary["shifted"]["beat"];
    if (rb.contains("delta_f_hz") && sb.contains("delta_f_hz")) {
        const double ratio = sb["delta_f_hz"].get<double>() / rb["delta_f_hz"].get<double>();
        out.summary["beat_ratio"] = ratio;
        out.summary["beat_ratio_expected"] = (DoubleWord{1.0} + eps).to_double();
        out.summary["beat_ratio_relative_error"] = std::abs(ratio / (DoubleWord{1.0} + eps).to_double() - 1.0);
    }
    out.tables.push_back(visibility_table("visibility_reference", ref_curve));
    out.tables.push_back(visibility_table("visibility_shifted", shift_curve));
    return out;
}

ModeOutput run_stack(const RunConfig& c) {
    const ClockFrequencies freqs = c.frequencies();
    const double beat = freqs.beat_hz();
    const DoubleWord eps = stage("gravity-redshift", [&] { return c.shift(); });

    ModeOutput out;
    const StackingReport report =
        stage("sensitivity-stacking", [&] { return stacked_null_shift(c.stack.n_periods, eps, beat, c.redshift); });
    out.summary["report"] = {{"n_periods", report.n_periods},
                             {"eps", report.eps},
                             {"per_period_shift_s", report.per_period_shift_s},
                             {"cumulative_shift_periods", report.cumulative_shift_periods}};
    if (report.total_signal) out.summary["report"]["total_signal"] = *report.total_signal;
    out.summary["stacking_gain"] = stacking_gain(c.stack.tau_s, beat).to_double();
    if (c.redshift) {
        out.summary["total_signal_at_tau"] = dw_json(total_signal(c.stack.tau_s, *c.redshift));
        out.summary["redshift_factor"] = dw_json(redshift_factor(*c.redshift));
        out.summary["redshift_factor_rounded_c2"] = redshift_factor_rounded_c2(*c.redshift);
    }

    Table table{"stacking", "stacking/v1", {"n_periods", "cumulative_shift_periods", "null_shift_s"}, {}};
    std::vector<std::uint64_t> steps;
    for (std::uint64_t decade = 1; decade <= c.stack.n_periods; decade *= 10) {
        for (std::uint64_t m : {1u, 2u, 5u}) {
            if (decade * m < c.stack.n_periods) steps.push_back(decade * m);
        }
        if (decade > c.stack.n_periods / 10) break;
    }
    steps.push_back(c.stack.n_periods);
    for (const auto n : steps) {
        const auto r = stacked_null_shift(n, eps, beat);
        table.rows.push_back({n, r.cumulative_shift_periods, r.cumulative_shift_periods / beat});
    }
    out.tables.push_back(std::move(table));

    if (c.units == Units::scaled) {
        const StackingVerification v = stage("sensitivity-stacking", [&] {
            StackingSimulationOptions opts;
            opts.points_per_period = c.stack.points_per_period;
            opts.n_phases = c.stack.n_phases;
            opts.threads = c.threads;
            return verify_stacking_by_simulation(eps.to_double(), beat, c.stack.n_periods, opts);
        });
        out.summary["simulation"] = {{"predicted_periods", v.predicted_periods},
                                     {"simulated_periods", v.simulated_periods},
                                     {"discrepancy_periods", v.discrepancy},
                                     {"reference_null_s", v.reference_null_s},
                                     {"shifted_null_s", v.shifted_null_s}};
    }
    if (eps.hi != 0.0 && std::abs(eps.hi) < max_abs_shift(ShiftRegime::physical)) {
        const ExtendedRecovery r =
            stage("sensitivity-stacking", [&] { return recover_shift_extended(freqs, eps, c.stack.tau_s); });
        out.summary["extended"] = {{"null_index", r.null_index},
                                   {"reference_null_s", dw_json(r.reference_null_s)},
                                   {"shifted_null_s", dw_json(r.shifted_null_s)},
                                   {"time_shift_s", dw_json(r.time_shift_s)},
                                   {"eps_recovered", dw_json(r.eps_recovered)},
                                   {"relative_error", r.relative_error},
                                   {"null_phase_error_rad", r.null_phase_error_rad}};
    }
    return out;
}

ModeOutput run_montecarlo(const RunConfig& c) {
    const ClockFrequencies freqs = stage("gravity-redshift", [&] { return effective_frequencies(c); });
    const double t = c.montecarlo.t_s < 0.0 ? 1.0 / (6.0 * freqs.beat_hz()) : c.montecarlo.t_s;
    const RamseySequence seq{c.prep, DoubleWord{t}, 0.0, freqs};
    const double reference = reference_amplitude(c.prep, c.n_phases);
    const std::uint64_t replicates = c.montecarlo.replicates;
    const auto& atoms = c.montecarlo.atoms;

    struct Sample {
        double visibility;
        FringeFit fit;
    };
    std::vector<Sample> samples(atoms.size() * replicates);
    stage("noise-and-decoherence", [&] {
        ::clockinterf::detail::parallel_for(samples.size(), c.threads, [&](std::size_t idx) {
            NoiseConfig noise = noise_for(c);
            noise.atoms_per_point = atoms[idx / replicates];
            const FringeDataset data = phase_scan(seq, c.n_phases, SamplingSpec{noise, 0, idx, true});
            const FringeFit fit = fit_fringe(data);
            samples[idx] = {visibility_amp(fit, reference), fit};
        });
        return 0;
    });

    const double exact = stage("sequence-engine", [&] {
        const FringeDataset data = c.noise ? phase_scan(seq, c.n_phases, SamplingSpec{noise_for(c), 0, 0, false})
                                           : phase_scan(seq, c.n_phases);
        return visibility_amp(fit_fringe(data), reference);
    });

    Table table{"montecarlo", "montecarlo/v1", {"atoms", "replicate", "visibility", "offset", "amplitude"}, {}};
    json per_n = json::array();
    std::vector<double> scaled_spread;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        double sum = 0.0;
        for (std::uint64_t r = 0; r < replicates; ++r) {
            const Sample& s = samples[a * replicates + r];
            table.rows.push_back({atoms[a], r, s.visibility, s.fit.offset, s.fit.amplitude});
            sum += s.visibility;
        }
        const double mean = sum / static_cast<double>(replicates);
        double ss = 0.0;
        for (std::uint64_t r = 0; r < replicates; ++r) {
            const double d = samples[a * replicates + r].visibility - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(replicates - 1));
        const double scaled = sd * std::sqrt(static_cast<double>(atoms[a]));
        scaled_spread.push_back(scaled);
        per_n.push_back({{"atoms", atoms[a]}, {"mean", mean}, {"stddev", sd}, {"stddev_sqrt_n", scaled}});
    }
    const double centre = std::accumulate(scaled_spread.begin(), scaled_spread.end(), 0.0) /
                          static_cast<double>(scaled_spread.size());
    double worst = 0.0;
    for (const double s : scaled_spread) worst = std::max(worst, std::abs(s / centre - 1.0));

    ModeOutput out;
    out.summary["t_s"] = t;
    out.summary["visibility_exact"] = exact;
    out.summary["per_atom_number"] = per_n;
    out.summary["sqrt_n_scaling_max_deviation"] = worst;
    out.tables.push_back(std::move(table));
    return out;
}

}  // namespace

RunResult run(const RunConfig& config) {
    const std::string started = detail::utc_timestamp();
    const auto& dir = config.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    ModeOutput mode_out;
    switch (config.mode) {
        case Mode::fringe: mode_out = run_fringe(config); break;
        case Mode::visibility: mode_out = run_visibility(config); break;
        case Mode::redshift_compare: mode_out = run_redshift_compare(config); break;
        case Mode::stack: mode_out = run_stack(config); break;
        case Mode::montecarlo: mode_out = run_montecarlo(config); break;
    }

    RunResult result;
    for (const auto& table : mode_out.tables) result.files.push_back(detail::write_table(dir, table, config.format));

    json summary = mode_out.summary;
    summary["mode"] = to_string(config.mode);
    summary["tool_version"] = kVersion;
    result.files.push_back(detail::write_json(dir, "summary.json", "summary/v1", summary));
    result.summary = std::move(summary);

    json outputs = json::array();
    for (const auto& f : result.files) {
        outputs.push_back({{"file", f.name}, {"schema", f.schema}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    const json manifest = {{"manifest_version", 1},
                           {"tool", "clockinterf"},
                           {"tool_version", kVersion},
                           {"config", config.to_json()},
                           {"seed", config.seed},
                           {"started_utc", started},
                           {"finished_utc", detail::utc_timestamp()},
                           {"outputs", outputs}};
    result.files.push_back(detail::write_json(dir, "manifest.json", "manifest/v1", manifest));
    return result;
}

}  // namespace clockinterf::runner
