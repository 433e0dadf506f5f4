#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "clockinterf/clockinterf.hpp"
#include "clockinterf/runner.hpp"

namespace py = pybind11;
using namespace clockinterf;

namespace {

std::tuple<double, double, double> as_tuple(const Populations& p) { return {p.ground, p.clock1, p.clock2}; }

VisibilityCurve curve_from(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) throw std::invalid_argument("times and values must have the same length");
    VisibilityCurve c;
    for (std::size_t i = 0; i < t.size(); ++i) c.entries.push_back({t[i], v[i], 0.0});
    return c;
}

std::string run_json(const std::string& config_text) {
    const auto config = runner::parse_config(nlohmann::json::parse(config_text));
    return runner::run(config).summary.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Three-level clock interferometry: dynamics, fringes, redshift and stacking";
    m.attr("__version__") = std::string(kVersion);

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::enum_<Preparation>(m, "Preparation")
        .value("tripod", Preparation::tripod)
        .value("double_pi_half", Preparation::double_pi_half);
    py::enum_<Transition>(m, "Transition")
        .value("ground_clock1", Transition::ground_clock1)
        .value("ground_clock2", Transition::ground_clock2);

    py::class_<ClockFrequencies>(m, "ClockFrequencies")
        .def(py::init<double, double>(), py::arg("f1_hz"), py::arg("f2_hz"))
        .def_property_readonly("f1_hz", &ClockFrequencies::f1_hz)
        .def_property_readonly("f2_hz", &ClockFrequencies::f2_hz)
        .def_property_readonly("beat_hz", &ClockFrequencies::beat_hz)
        .def("__repr__", [](const ClockFrequencies& f) {
            return "ClockFrequencies(" + runner::format_double(f.f1_hz()) + ", " + runner::format_double(f.f2_hz()) +
                   ")";
        });

    py::class_<QutritState>(m, "QutritState")
        .def(py::init<cplx, cplx, cplx>(), py::arg("amp_g"), py::arg("amp_c1"), py::arg("amp_c2"))
        .def_static("ground", &QutritState::ground)
        .def_property_readonly("amp_g", &QutritState::amp_g)
        .def_property_readonly("amp_c1", &QutritState::amp_c1)
        .def_property_readonly("amp_c2", &QutritState::amp_c2)
        .def("norm_squared", &QutritState::norm_squared);

    py::class_<PulseSpec>(m, "PulseSpec")
        .def(py::init<Transition, double, double>(), py::arg("transition"), py::arg("angle"), py::arg("phase") = 0.0)
        .def_property_readonly("angle", &PulseSpec::angle)
        .def_property_readonly("phase", &PulseSpec::phase);

    m.def("two_level_pulse", py::overload_cast<const QutritState&, const PulseSpec&>(&two_level_pulse),
          py::arg("state"), py::arg("pulse"));
    m.def("tripod_split", &tripod_split, py::arg("state"));
    m.def(
        "free_evolve",
        [](const QutritState& s, double t, const ClockFrequencies& f) { return free_evolve(s, DoubleWord(t), f); },
        py::arg("state"), py::arg("duration_s"), py::arg("freqs"));
    m.def(
        "populations", [](const QutritState& s) { return as_tuple(populations(s)); }, py::arg("state"),
        "(p_ground, p_clock1, p_clock2)");
    m.def(
        "clock_overlap", [](const ClockFrequencies& f, double t) { return clock_overlap(f, DoubleWord(t)); },
        py::arg("freqs"), py::arg("t_s"));

    m.def(
        "run_sequence",
        [](const ClockFrequencies& f, double t, double phase, Preparation prep) {
            return as_tuple(run_sequence(RamseySequence{prep, DoubleWord(t), phase, f}));
        },
        py::arg("freqs"), py::arg("interrogation_s"), py::arg("closing_phase") = 0.0,
        py::arg("prep") = Preparation::tripod);

    m.def(
        "phase_scan",
        [](const ClockFrequencies& f, double t, int n_phases, Preparation prep) {
            const auto data = phase_scan(RamseySequence{prep, DoubleWord(t), 0.0, f}, n_phases);
            return std::make_pair(data.phases(), data.channel(Level::ground));
        },
        py::arg("freqs"), py::arg("interrogation_s"), py::arg("n_phases") = kDefaultPhases,
        py::arg("prep") = Preparation::tripod, "(phases, ground-state probabilities)");

    m.def(
        "visibility_curve",
        [](const ClockFrequencies& f, const std::vector<double>& t_grid, int n_phases, Preparation prep,
           unsigned threads) {
            CurveOptions o;
            o.n_phases = n_phases;
            o.threads = threads;
            const auto c = visibility_curve(RamseySequence{prep, DoubleWord(0.0), 0.0, f}, t_grid, o);
            return c.values();
        },
        py::arg("freqs"), py::arg("t_grid"), py::arg("n_phases") = kDefaultPhases,
        py::arg("prep") = Preparation::tripod, py::arg("threads") = 1u);

    py::class_<FringeFit>(m, "FringeFit")
        .def_readonly("offset", &FringeFit::offset)
        .def_readonly("amplitude", &FringeFit::amplitude)
        .def_readonly("phase0", &FringeFit::phase0)
        .def_readonly("rms_residual", &FringeFit::rms_residual);
    m.def(
        "fit_fringe",
        [](const std::vector<double>& phases, const std::vector<double>& values) { return fit_fringe(phases, values); },
        py::arg("phases"), py::arg("values"));
    m.def("visibility_amp", &visibility_amp, py::arg("fit"), py::arg("reference_amplitude"));
    m.def("visibility_minmax", py::overload_cast<const FringeFit&>(&visibility_minmax), py::arg("fit"));
    m.def(
        "find_nulls",
        [](const std::vector<double>& t, const std::vector<double>& v, std::size_t max_count) {
            return find_nulls(curve_from(t, v), max_count);
        },
        py::arg("t"), py::arg("visibility"), py::arg("max_count"));

    py::class_<BeatEstimate>(m, "BeatEstimate")
        .def_readonly("delta_f_hz", &BeatEstimate::delta_f_hz)
        .def_readonly("stderr_hz", &BeatEstimate::stderr_hz)
        .def_readonly("tau_s", &BeatEstimate::tau_s)
        .def_readonly("rms_residual", &BeatEstimate::rms_residual)
        .def_readonly("iterations", &BeatEstimate::iterations);
    m.def(
        "estimate_beat",
        [](const std::vector<double>& t, const std::vector<double>& v, bool fit_decay) {
            BeatFitOptions o;
            o.fit_decay = fit_decay;
            return estimate_beat(curve_from(t, v), o);
        },
        py::arg("t"), py::arg("visibility"), py::arg("fit_decay") = false);

    m.def(
        "redshift_factor", [](double g, double dh) { return redshift_factor({g, dh}).to_double(); }, py::arg("g"),
        py::arg("delta_h"));
    m.def(
        "redshift_factor_rounded_c2", [](double g, double dh) { return redshift_factor_rounded_c2({g, dh}); },
        py::arg("g"), py::arg("delta_h"));
    m.def(
        "shift_frequencies",
        [](const ClockFrequencies& f, double eps, bool scaled) {
            return shift_frequencies(f, DoubleWord(eps), scaled ? ShiftRegime::scaled : ShiftRegime::physical);
        },
        py::arg("freqs"), py::arg("eps"), py::arg("scaled") = false);

    m.def(
        "stacking_gain", [](double tau, double df) { return stacking_gain(tau, df).to_double(); }, py::arg("tau_s"),
        py::arg("delta_f_hz"));
    m.def(
        "cumulative_shift_periods",
        [](std::uint64_t n, double eps, double df) {
            return stacked_null_shift(n, DoubleWord(eps), df).cumulative_shift_periods;
        },
        py::arg("n_periods"), py::arg("eps"), py::arg("delta_f_hz"));

    py::class_<StackingVerification>(m, "StackingVerification")
        .def_readonly("predicted_periods", &StackingVerification::predicted_periods)
        .def_readonly("simulated_periods", &StackingVerification::simulated_periods)
        .def_readonly("discrepancy", &StackingVerification::discrepancy);
    m.def(
        "verify_stacking_by_simulation",
        [](double eps, double df, std::uint64_t n, unsigned threads) {
            StackingSimulationOptions o;
            o.threads = threads;
            return verify_stacking_by_simulation(eps, df, n, o);
        },
        py::arg("eps"), py::arg("delta_f_hz"), py::arg("n_periods"), py::arg("threads") = 1u);
    m.def(
        "recover_shift_extended",
        [](const ClockFrequencies& f, double eps, double tau) {
            const auto r = recover_shift_extended(f, DoubleWord(eps), tau);
            return py::dict(py::arg("null_index") = r.null_index,
                            py::arg("eps_recovered") = r.eps_recovered.to_double(),
                            py::arg("time_shift_s") = r.time_shift_s.to_double(),
                            py::arg("relative_error") = r.relative_error);
        },
        py::arg("freqs"), py::arg("eps"), py::arg("tau_s"));

    m.def("_run_json", &run_json, py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
}
