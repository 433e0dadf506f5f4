import math

import pytest

import clockinterf as ci


def test_tripod_populations():
    pg, p1, p2 = ci.populations(ci.tripod_split(ci.QutritState.ground()))
    assert pg == pytest.approx(0.5, abs=1e-12)
    assert p1 == pytest.approx(0.25, abs=1e-12)
    assert p2 == pytest.approx(0.25, abs=1e-12)


def test_visibility_and_nulls():
    f = ci.ClockFrequencies(1.0, 2.0)
    t = [3.0 * i / 300 for i in range(301)]
    v = ci.visibility_curve(f, t, n_phases=16)
    for ti, vi in zip(t, v):
        assert vi == pytest.approx(abs(math.cos(math.pi * ti)), abs=1e-9)
    nulls = ci.find_nulls(t, v, 3)
    assert nulls == pytest.approx([0.5, 1.5, 2.5], abs=1e-9)
    assert ci.estimate_beat(t, v).delta_f_hz == pytest.approx(1.0, rel=1e-9)


def test_fringe_fit():
    phases, pg = ci.phase_scan(ci.ClockFrequencies(1.0, 1.25), 0.0, 64)
    fit = ci.fit_fringe(phases, pg)
    assert fit.offset == pytest.approx(0.5, abs=1e-10)
    assert fit.amplitude == pytest.approx(0.5, abs=1e-10)


def test_redshift_and_stacking():
    assert ci.redshift_factor(9.8, 1.0) == pytest.approx(1.0904e-16, rel=1e-4)
    assert ci.redshift_factor_rounded_c2(9.8, 1.0) == pytest.approx(1.0889e-16, rel=1e-4)
    assert ci.cumulative_shift_periods(1000, 4e-4, 1.0) == pytest.approx(0.4, rel=1e-12)
    shifted = ci.shift_frequencies(ci.ClockFrequencies(1.0, 1.25), 4e-4)
    assert shifted.beat_hz == pytest.approx(0.2501, rel=1e-15)
    with pytest.raises(ValueError):
        ci.shift_frequencies(ci.ClockFrequencies(1.0, 1.25), 2e-3)
    rec = ci.recover_shift_extended(ci.ClockFrequencies(4.29e14, 4.29e14 + 1e9), 1.1e-16, 1.0)
    assert rec["eps_recovered"] == pytest.approx(1.1e-16, rel=1e-2)


def test_run_config(tmp_path):
    summary = ci.run({"mode": "fringe", "f1": 1.0, "f2": 1.25, "n_phases": 16, "out": str(tmp_path / "out")})
    assert summary["visibility_amp"] == pytest.approx(1.0, abs=1e-9)
    assert (tmp_path / "out" / "manifest.json").exists()
    with pytest.raises(ci.ConfigError):
        ci.run({"mode": "fringe", "f1": 2.0, "f2": 1.0})
