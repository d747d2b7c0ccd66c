import math
from dataclasses import replace

import pytest

from uvoclab.controller import (
    ControllerConfig, Measurements, Modulation, UvocController, apply_controller_event, controller_step,
    initial_controller_state,
)
from uvoclab.errors import ConfigurationError
from uvoclab.fault import FaultConfig
from uvoclab.filters import DcRegParams, EviParams, PresyncParams
from uvoclab.oscillator import SvoParams, fault_gain
from uvoclab.record import Event, EventKind, SpaceVector, VscRatings


def _nominal_meas(cfg: ControllerConfig, v_dc: float = 400.0) -> Measurements:
    return Measurements(SpaceVector(5.0, -1.0), SpaceVector(cfg.svo.V_p0, 0.0), v_dc)


def test_reference_modulation(gfl_config):
    state = initial_controller_state(gfl_config, SpaceVector(gfl_config.svo.V_p0, 0.0))
    new_state, out = controller_step(state, _nominal_meas(gfl_config), gfl_config)
    assert out.v_c == new_state.osc.v
    assert out.m.alpha == pytest.approx(new_state.osc.v.alpha / 400.0)
    assert out.m.beta == pytest.approx(new_state.osc.v.beta / 400.0)
    assert out.v_ol == SpaceVector()
    assert out.i_ps == SpaceVector()


def test_instantaneous_modulation(gfl_config):
    cfg = replace(gfl_config, modulation=Modulation.INSTANTANEOUS)
    state = initial_controller_state(cfg, SpaceVector(cfg.svo.V_p0, 0.0))
    _, out = controller_step(state, _nominal_meas(cfg, v_dc=380.0), cfg)
    assert out.m.alpha == pytest.approx(out.v_c.alpha / 380.0)


def test_virtual_impedance_subtracted(ratings, gfl_svo):
    cfg = ControllerConfig(ratings, gfl_svo, evi=EviParams(R_vir=0.5))
    state = initial_controller_state(cfg, SpaceVector(cfg.svo.V_p0, 0.0))
    new_state, out = controller_step(state, _nominal_meas(cfg), cfg)
    assert out.v_zv.magnitude() > 0
    expected = new_state.osc.v - out.v_zv
    assert out.v_c.alpha == pytest.approx(expected.alpha)
    assert out.v_c.beta == pytest.approx(expected.beta)


def test_forced_fault_step(ratings, gfm_svo):
    ib = ratings.i_base_peak
    fault = FaultConfig(I_T=1.1 * ib, V_T=0.9 * ratings.V_p0, I_m=ib, R_0=5.0)
    cfg = ControllerConfig(ratings, gfm_svo.with_setpoints(5000.0, 0.0), fault=fault)
    state = initial_controller_state(cfg, SpaceVector(ratings.V_p0, 0.0))
    meas = Measurements(SpaceVector(60.0, 0.0), SpaceVector(0.3 * ratings.V_p0, 0.0), 400.0)
    new_state, out = controller_step(state, meas, cfg)

    assert new_state.fault.x_f == 1
    assert new_state.fault.x_r == 1.0
    assert out.Q0 == pytest.approx(math.sqrt(1e8 - 5000.0 ** 2), rel=1e-12)
    assert new_state.fault.K_m == pytest.approx(fault_gain(5000.0, out.Q0, 3, ib))
    assert out.i0_sat.magnitude() == pytest.approx(ib, rel=1e-12)
    expected = (out.i0_sat - meas.i) * 5.0
    assert out.v_ol.alpha == pytest.approx(expected.alpha)
    assert out.v_ol.beta == pytest.approx(expected.beta)


def test_fault_without_R0_rejected(ratings, gfm_svo):
    with pytest.raises(ConfigurationError):
        ControllerConfig(ratings, gfm_svo, fault=FaultConfig(I_T=40.0, V_T=100.0, I_m=39.0))


def test_phase_count_mismatch_rejected(ratings):
    svo = SvoParams(eta=16.63, mu=0.0, phi=0.0, omega0=ratings.omega0, V_p0=ratings.V_p0, N=1)
    with pytest.raises(ConfigurationError):
        ControllerConfig(ratings, svo)


def test_setpoint_events(gfl_config):
    state = initial_controller_state(gfl_config, SpaceVector(gfl_config.svo.V_p0, 0.0))
    state = apply_controller_event(state, Event(0.1, EventKind.SETPOINT_P, 4000.0), gfl_config)
    state = apply_controller_event(state, Event(0.1, EventKind.SETPOINT_Q, -500.0), gfl_config)
    state = apply_controller_event(state, Event(0.1, EventKind.MU, 1e-4), gfl_config)
    assert (state.P0, state.Q0, state.mu) == (4000.0, -500.0, 1e-4)
    _, out = controller_step(state, _nominal_meas(gfl_config), gfl_config)
    assert out.P0 == 4000.0
    assert out.Q0 == -500.0


def test_invalid_controller_events(gfl_config):
    state = initial_controller_state(gfl_config, SpaceVector(gfl_config.svo.V_p0, 0.0))
    with pytest.raises(ConfigurationError):
        apply_controller_event(state, Event(0.0, EventKind.MU, -1.0), gfl_config)
    with pytest.raises(ConfigurationError):
        apply_controller_event(state, Event(0.0, EventKind.GRID_VOLTAGE, 100.0), gfl_config)


def test_presync_event_drives_virtual_current(ratings, gfm_svo):
    cfg = ControllerConfig(ratings, gfm_svo, presync=PresyncParams())
    state = initial_controller_state(cfg, SpaceVector(ratings.V_p0, 0.0))
    state = apply_controller_event(state, Event(0.0, EventKind.PRESYNC_ON), cfg)
    assert state.presync_on
    meas = Measurements(SpaceVector(), SpaceVector(0.0, ratings.V_p0), 400.0)
    _, out = controller_step(state, meas, cfg)
    assert out.i_ps.magnitude() > 0
    assert out.i_fb == out.i_ps
    state = apply_controller_event(state, Event(0.0, EventKind.PRESYNC_OFF), cfg)
    _, out = controller_step(state, meas, cfg)
    assert out.i_ps == SpaceVector()


def test_dc_regulator_sets_active_power(ratings, gfl_svo):
    cfg = ControllerConfig(ratings, gfl_svo, dcreg=DcRegParams(enabled=True))
    state = initial_controller_state(cfg, SpaceVector(ratings.V_p0, 0.0))
    meas = _nominal_meas(cfg, v_dc=410.0)
    for _ in range(100):
        state, out = controller_step(state, meas, cfg)
    assert out.P0 > 0
    state = apply_controller_event(state, Event(0.0, EventKind.DCREG_OFF), cfg)
    _, frozen = controller_step(state, meas, cfg)
    assert frozen.P0 == state.P0


def test_injection_adds_to_setpoint(gfl_config):
    state = initial_controller_state(gfl_config, SpaceVector(gfl_config.svo.V_p0, 0.0))
    _, out = controller_step(state, _nominal_meas(gfl_config), gfl_config, p0_offset=250.0)
    assert out.P0 == pytest.approx(gfl_config.svo.P0 + 250.0)


def test_single_phase_zeroes_beta_voltage():
    ratings = VscRatings(S_rated=3354.1, P_rated=3000.0, Q_rated=1500.0, V0=120.0, N=1)
    svo = SvoParams(eta=16.63, mu=0.0, phi=0.5 * math.pi, omega0=ratings.omega0, V_p0=ratings.V_p0, N=1)
    cfg = ControllerConfig(ratings, svo, evi=EviParams(R_vir=0.5))
    state = initial_controller_state(cfg, SpaceVector(ratings.V_p0, 0.0))
    for k in range(60):
        t = k * cfg.dt
        meas = Measurements(SpaceVector(10.0 * math.cos(ratings.omega0 * t), 0.0),
                            SpaceVector(ratings.V_p0 * math.cos(ratings.omega0 * t), 0.0), 400.0)
        state, out = controller_step(state, meas, cfg)
        assert out.v_zv.beta == 0.0
    # после заполнения буфера β-составляющая сети восстановлена
    assert out.vg_mag > 0.5 * ratings.V_p0


def test_step_is_deterministic(gfl_config):
    def run():
        ctrl = UvocController(gfl_config, SpaceVector(gfl_config.svo.V_p0, 0.0))
        ctrl.apply_event(Event(0.0, EventKind.SETPOINT_P, 3000.0))
        return [ctrl.step(_nominal_meas(gfl_config)) for _ in range(50)]

    assert run() == run()
