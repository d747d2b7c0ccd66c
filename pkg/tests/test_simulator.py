import math

import numpy as np
import pandas as pd
import pytest

from uvoclab.errors import WindowTooShortError
from uvoclab.scenario_reader import load_raw, load_scenario, scenario_from_dict
from uvoclab.simulator import (
    EXTRA_COLUMNS, TRACE_COLUMNS, FrequencyResponse, Trace, identify_response, multitone, run_scenario,
    steady_state_extract, tone_frequencies,
)

OMEGA0 = 2 * math.pi * 60


def _synthetic_trace(omega: float, T: float = 0.5, dt: float = 1e-3) -> Trace:
    n = int(round(T / dt))
    t = np.arange(n) * dt
    th = omega * t
    return Trace(pd.DataFrame({
        "t": t,
        "v_alpha": 169.7 * np.cos(th),
        "v_beta": 169.7 * np.sin(th),
        "P": 5000.0 + 10.0 * np.cos(2 * OMEGA0 * t),
        "Q": np.full(n, -300.0),
        "V_p": np.full(n, 169.7),
        "v_dc": np.full(n, 400.0),
        "x_f": np.zeros(n, int),
    }), OMEGA0)


def test_steady_state_extract_on_sinusoid():
    tr = _synthetic_trace(OMEGA0 + 0.5)
    ss = steady_state_extract(tr, 0.1)
    assert ss.cycles == 6
    assert ss.omega == pytest.approx(OMEGA0 + 0.5, rel=1e-9)
    assert ss.P == pytest.approx(5000.0, abs=0.05)
    assert ss.Q == -300.0
    assert ss.V == pytest.approx(169.7 / math.sqrt(2.0))
    assert math.isnan(ss.P_poc)


def test_steady_state_window_too_short():
    tr = _synthetic_trace(OMEGA0)
    with pytest.raises(WindowTooShortError):
        steady_state_extract(tr, 0.02)
    with pytest.raises(WindowTooShortError):
        steady_state_extract(tr, 1.0)


def test_fault_intervals():
    tr = _synthetic_trace(OMEGA0, T=0.01)
    tr.frame["x_f"] = [0, 1, 1, 0, 0, 1, 1, 1, 0, 1]
    assert tr.fault_intervals() == [
        (pytest.approx(0.001), pytest.approx(0.003)),
        (pytest.approx(0.005), pytest.approx(0.008)),
        (pytest.approx(0.009), None),
    ]


def test_tone_frequencies_are_dft_bins():
    f = tone_frequencies(1.0, 100.0, 12, 2.0)
    assert np.all(np.diff(f) > 0)
    np.testing.assert_allclose(f * 2.0, np.round(f * 2.0))
    assert f[0] == 1.0 and f[-1] == 100.0


def test_multitone_starts_at_t0():
    sig = multitone([1.0, 2.0, 3.0], 2.0, t0=0.5)
    assert sig(0.4) == 0.0
    assert sig(0.5) == pytest.approx(2.0 * sum(math.cos(ph) for ph in sig.phases))
    assert sig.phases[0] == 0.0
    assert multitone([1.0, 2.0], 1.0, "random", seed=3) == multitone([1.0, 2.0], 1.0, "random", seed=3)


def test_identify_first_order_lag():
    fs, T, wc = 1000.0, 2.0, 2 * math.pi * 10
    t = np.arange(int(round(T * fs))) / fs
    freqs = tone_frequencies(1.0, 50.0, 6, T)
    sig = multitone(freqs, 1.0)
    u = np.array([sig(x) for x in t])
    y = np.zeros_like(t)
    for f, ph in zip(sig.freqs, sig.phases):
        g = 1.0 / (1.0 + 2j * math.pi * f / wc)
        y += abs(g) * np.cos(2 * math.pi * f * t + ph + np.angle(g))
    h = identify_response(t, u, y, freqs)
    expected = 1.0 / (1.0 + 2j * math.pi * np.asarray(freqs) / wc)
    np.testing.assert_allclose(np.abs(h), np.abs(expected), rtol=0.01)
    np.testing.assert_allclose(np.degrees(np.angle(h)), np.degrees(np.angle(expected)), atol=1.0)
    frame = FrequencyResponse(freqs, h).to_frame()
    assert list(frame.columns) == ["omega", "mag_db", "phase_deg"]


def test_run_is_deterministic(scenarios_dir):
    s = load_scenario(scenarios_dir / "gfl_q0_step.json", ["duration=0.02"])
    a = run_scenario(s)
    b = run_scenario(s)
    pd.testing.assert_frame_equal(a.frame, b.frame)
    assert list(a.frame.columns) == list(TRACE_COLUMNS) + list(EXTRA_COLUMNS)
    assert len(a.frame) == 20
    assert np.isfinite(a.frame[list(TRACE_COLUMNS)].to_numpy()).all()


def test_steady_state_start_is_quiet(scenarios_dir):
    s = load_scenario(scenarios_dir / "gfl_q0_step.json", ["duration=0.05"])
    f = run_scenario(s).frame
    V_p0 = s.ratings.V_p0
    assert (f["V_p"] - f["V_p"].iloc[0]).abs().max() < 0.02 * V_p0
    assert (f["omega"] - s.ratings.omega0).abs().max() < 2.0


def test_events_logged(scenarios_dir):
    s = load_scenario(scenarios_dir / "gfl_q0_step.json", ["duration=0.21"])
    tr = run_scenario(s)
    assert tr.events == ["t=0.2 setpoint_q 3000"]
    assert tr.frame["Q0"].iloc[-1] == pytest.approx(3000.0)


@pytest.mark.slow
def test_dead_short_is_simulated_and_cleared(scenarios_dir):
    doc = load_raw(scenarios_dir / "unintentional_islanding.json")
    reference = run_scenario(scenario_from_dict(doc))
    doc["events"] = [
        {"t": 0.3, "kind": "sts_open"},
        {"t": 0.4, "kind": "short_circuit"},
        {"t": 0.45, "kind": "short_clear"},
    ]
    s = scenario_from_dict(doc)
    tr = run_scenario(s)
    f = tr.frame
    assert tr.events == ["t=0.3 sts_open", "t=0.4 short_circuit", "t=0.45 short_clear"]
    assert np.isfinite(f[list(TRACE_COLUMNS)].to_numpy()).all()

    t = f["t"].to_numpy()
    i_a = np.hypot(f["ia_alpha"].to_numpy(), f["ia_beta"].to_numpy())
    v_f = np.hypot(f["vf_alpha"].to_numpy(), f["vf_beta"].to_numpy())
    shorted = (t > 0.4005) & (t < 0.45)
    # узел фильтра удерживается коротким замыканием
    assert v_f[shorted].max() < 1.0
    p, evi = s.plant, s.controller.evi
    i_sc = s.ratings.V_p0 / abs(evi.R_vir + 1j * s.ratings.omega0 * p.L_a)
    assert i_a.max() <= 2.5 * i_sc

    # после отключения замыкания режим совпадает с режимом без замыкания
    ss = steady_state_extract(tr, 0.1)
    ref = steady_state_extract(reference, 0.1)
    S = s.ratings.S_rated
    assert ss.P == pytest.approx(ref.P, abs=0.01 * S)
    assert ss.omega == pytest.approx(ref.omega, abs=0.1)
    assert ss.V_p == pytest.approx(ref.V_p, rel=0.01)


def test_single_phase_short_run(scenarios_dir):
    s = load_scenario(scenarios_dir / "sec7a_single_phase_rectifier.json", ["duration=0.05"])
    f = run_scenario(s).frame
    assert len(f) == 50
    assert f["Q_poc"].isna().all()
    assert f["v_dc"].between(150.0, 250.0).all()


@pytest.mark.slow
def test_grid_following_tracks_reactive_step(scenarios_dir):
    s = load_scenario(scenarios_dir / "gfl_q0_step.json")
    ss = steady_state_extract(run_scenario(s), 0.1)
    S = s.ratings.S_rated
    assert abs(ss.Q - 0.3 * S) <= 0.005 * S
    assert abs(ss.P) <= 0.005 * S
