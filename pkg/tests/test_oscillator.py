import cmath
import math

import numpy as np
import pytest

from uvoclab.errors import ConfigurationError, DegenerateVoltageError
from uvoclab.fault import FaultConfig, FaultState
from uvoclab.oscillator import (
    OscillatorState, SvoParams, circular_limit, current_reference, fault_gain, fault_mode_reference,
    saturated_reference, svo_step,
)
from uvoclab.record import SpaceVector

OMEGA0 = 2 * math.pi * 60
V_P0 = math.sqrt(2.0) * 120.0


def _harmonic() -> SvoParams:
    return SvoParams(eta=0.0, mu=0.0, phi=0.5 * math.pi, omega0=OMEGA0, V_p0=V_P0)


def test_svo_params_validation():
    with pytest.raises(ConfigurationError):
        SvoParams(eta=-1.0, mu=0.0, phi=0.0, omega0=OMEGA0, V_p0=V_P0)
    with pytest.raises(ConfigurationError):
        SvoParams(eta=1.0, mu=-1e-4, phi=0.0, omega0=OMEGA0, V_p0=V_P0)
    with pytest.raises(ConfigurationError):
        SvoParams(eta=1.0, mu=0.0, phi=2.0, omega0=OMEGA0, V_p0=V_P0)
    with pytest.raises(ConfigurationError):
        SvoParams(eta=1.0, mu=0.0, phi=0.0, omega0=OMEGA0, V_p0=V_P0, N=2)


def test_grid_forming_flag(gfm_svo, gfl_svo):
    assert gfm_svo.grid_forming
    assert not gfl_svo.grid_forming
    assert gfm_svo.V0 == pytest.approx(120.0)


def test_current_reference_in_phase_with_voltage():
    v = SpaceVector(V_P0, 0.0)
    i0 = current_reference(v, 3000.0, 0.0, 3)
    assert i0.alpha == pytest.approx(2.0 * 3000.0 / (3 * V_P0))
    assert i0.beta == pytest.approx(0.0, abs=1e-12)


def test_circular_limit_geometry():
    rng = np.random.default_rng(2024)
    I_m = 39.28
    vectors = rng.uniform(-120.0, 120.0, (20_000, 2))
    for a, b in vectors:
        i0 = SpaceVector(a, b)
        out = circular_limit(i0, I_m)
        m = i0.magnitude()
        if m <= I_m:
            assert out is i0
        else:
            assert out.magnitude() == pytest.approx(I_m, rel=1e-12)
            # направление сохраняется
            assert out.alpha * b - out.beta * a == pytest.approx(0.0, abs=1e-9 * m * I_m)
            assert out.alpha * a + out.beta * b > 0


def test_circular_limit_rejects_nonpositive_bound():
    with pytest.raises(ValueError):
        circular_limit(SpaceVector(1.0, 0.0), 0.0)


def test_fault_gain():
    assert fault_gain(0.0, 0.0, 3, 10.0) == math.inf
    assert fault_gain(3000.0, 4000.0, 3, 10.0) == pytest.approx(3 * 10.0 / (math.sqrt(2.0) * 5000.0))


def test_fault_mode_reference_has_limit_magnitude():
    v = SpaceVector(50.0, 20.0)
    i = fault_mode_reference(v, 5000.0, 8660.0, 3, 39.28)
    assert i.magnitude() == pytest.approx(39.28, rel=1e-12)
    i0 = current_reference(v, 5000.0, 8660.0, 3)
    assert cmath.phase(i.as_complex()) == pytest.approx(cmath.phase(i0.as_complex()), abs=1e-12)


def test_fault_mode_reference_zero_setpoints_is_reactive():
    v = SpaceVector(100.0, 0.0)
    i = fault_mode_reference(v, 0.0, 0.0, 3, 20.0)
    assert i.alpha == pytest.approx(0.0, abs=1e-12)
    assert i.beta == pytest.approx(-20.0)


def test_saturated_reference_switches_on_fault(gfm_svo):
    p = gfm_svo.with_setpoints(9000.0, 4400.0)
    v = SpaceVector(0.3 * V_P0, 0.0)
    normal = saturated_reference(v, p, FaultState(), 39.28)
    assert normal.magnitude() == pytest.approx(39.28)
    p_small = gfm_svo.with_setpoints(500.0, 0.0)
    faulted = saturated_reference(SpaceVector(V_P0, 0.0), p_small, FaultState(x_f=1), 39.28)
    assert faulted.magnitude() == pytest.approx(39.28)


def test_harmonic_oscillator_conserves_amplitude():
    p = _harmonic()
    osc = OscillatorState(SpaceVector(V_P0, 0.0))
    dt = 1e-4
    for _ in range(10_000):
        osc = svo_step(osc, SpaceVector(), p, FaultState(), dt)
    assert abs(osc.v.magnitude() - V_P0) / V_P0 < 1e-6


def test_harmonic_oscillator_advances_angle():
    p = _harmonic()
    osc = OscillatorState(SpaceVector(V_P0, 0.0))
    dt = 1e-5
    n = 1667
    for _ in range(n):
        osc = svo_step(osc, SpaceVector(), p, FaultState(), dt)
    expected = math.remainder(OMEGA0 * n * dt, 2 * math.pi)
    assert math.remainder(cmath.phase(osc.v.as_complex()) - expected, 2 * math.pi) == pytest.approx(0.0, abs=1e-8)
    assert osc.v.magnitude() == pytest.approx(V_P0, rel=1e-8)


def test_amplitude_correction_restores_nominal(gfm_svo):
    # без нагрузки μ-член возвращает амплитуду к V_p0
    osc = OscillatorState(SpaceVector(0.9 * V_P0, 0.0))
    for _ in range(20_000):
        osc = svo_step(osc, SpaceVector(), gfm_svo, FaultState(), 1e-4)
    assert osc.v.magnitude() == pytest.approx(V_P0, rel=1e-3)


def test_degenerate_voltage_raises(gfm_svo):
    with pytest.raises(DegenerateVoltageError):
        svo_step(OscillatorState(SpaceVector()), SpaceVector(), gfm_svo, FaultState(), 1e-4, v_floor=1.2e-4)


def test_fault_boost_uses_config(gfm_svo):
    cfg = FaultConfig(I_T=45.0, V_T=150.0, I_m=39.0, R_0=5.25)
    state = FaultState(x_f=1)
    assert state.eta_gain(cfg) == pytest.approx(1.0 + 5.25 / 0.028)
    osc = OscillatorState(SpaceVector(V_P0, 0.0))
    out = svo_step(osc, SpaceVector(10.0, 0.0), gfm_svo.with_setpoints(5000.0, 0.0), state, 1e-4, cfg)
    assert out.v.is_finite()


def test_rotating_hold_keeps_balanced_operating_point(gfl_svo):
    p = gfl_svo.with_setpoints(5000.0, 0.0)
    v = SpaceVector(V_P0, 0.0)
    i = current_reference(v, p.P0, p.Q0, p.N)
    dt = 1e-4
    out = svo_step(OscillatorState(v), i, p, FaultState(), dt)
    exact = V_P0 * cmath.exp(1j * OMEGA0 * dt)
    assert abs(out.v.as_complex() - exact) < 1e-4


def test_stationary_hold_lags_rotating_hold(gfl_svo):
    p = gfl_svo.with_setpoints(5000.0, 0.0)
    v = SpaceVector(V_P0, 0.0)
    i = current_reference(v, p.P0, p.Q0, p.N)
    dt = 1e-4
    rotating = svo_step(OscillatorState(v), i, p, FaultState(), dt).v.as_complex()
    held = svo_step(OscillatorState(v), i, p, FaultState(), dt, rotating_hold=False).v.as_complex()
    # ток, зафиксированный в αβ, отстаёт от вращающегося v на ω0·t внутри шага
    expected = p.eta * i.magnitude() * OMEGA0 * dt ** 2 / 2
    assert abs(held - rotating) == pytest.approx(expected, rel=0.05)
