import math

import pytest

from uvoclab.errors import ConfigurationError
from uvoclab.fault import FaultConfig, FaultState, fault_fsm_step, ocl_compensation
from uvoclab.record import SpaceVector

DT = 1e-4


@pytest.fixture
def cfg() -> FaultConfig:
    return FaultConfig(I_T=43.2, V_T=150.0, I_m=39.28, R_0=5.0, t_f=0.1)


def test_enters_fault_on_overcurrent(cfg):
    s = fault_fsm_step(FaultState(), 50.0, 169.0, cfg, DT)
    assert s.x_f == 1
    assert s.x_r == 1.0


def test_stays_normal_below_threshold(cfg):
    s = fault_fsm_step(FaultState(), 43.0, 30.0, cfg, DT)
    assert s == FaultState()


def test_latched_until_voltage_recovers(cfg):
    s = fault_fsm_step(FaultState(), 50.0, 160.0, cfg, DT)
    # ток уже ограничен, но напряжение ещё низкое
    for _ in range(100):
        s = fault_fsm_step(s, 39.0, 50.0, cfg, DT)
    assert s.x_f == 1
    assert s.armed
    s = fault_fsm_step(s, 39.0, 160.0, cfg, DT)
    assert s.x_f == 0
    assert s.x_r == 1.0
    assert s.latch_clock == 0.0 and not s.armed


def test_no_release_before_voltage_dip(cfg):
    # отфильтрованное напряжение в момент броска тока ещё выше порога
    s = fault_fsm_step(FaultState(), 50.0, 165.0, cfg, DT)
    assert s.x_f == 1 and not s.armed
    for _ in range(150):
        s = fault_fsm_step(s, 45.0, 165.0, cfg, DT)
        assert s.x_f == 1
    assert not s.armed
    s = fault_fsm_step(s, 40.0, 140.0, cfg, DT)
    assert s.armed
    s = fault_fsm_step(s, 40.0, 151.0, cfg, DT)
    assert s.x_f == 0


def test_minimum_hold_time(cfg):
    s = fault_fsm_step(FaultState(), 50.0, 100.0, cfg, DT)
    assert s.armed
    for _ in range(50):
        s = fault_fsm_step(s, 39.0, 160.0, cfg, DT)
    assert s.x_f == 1
    assert s.latch_clock == pytest.approx(0.005)
    for _ in range(60):
        s = fault_fsm_step(s, 39.0, 160.0, cfg, DT)
    assert s.x_f == 0


def test_release_without_dip_after_timeout(cfg):
    s = fault_fsm_step(FaultState(), 50.0, 169.0, cfg, DT)
    transitions = 0
    x_f = s.x_f
    for _ in range(2500):
        s = fault_fsm_step(s, 30.0, 169.0, cfg, DT)
        transitions += s.x_f != x_f
        x_f = s.x_f
    assert transitions == 1
    assert s.x_f == 0 and s.x_r == 0.0


def test_hold_times_validated():
    with pytest.raises(ConfigurationError):
        FaultConfig(I_T=43.2, V_T=150.0, I_m=39.28, t_hold=0.2, t_release=0.1)
    with pytest.raises(ConfigurationError):
        FaultConfig(I_T=43.2, V_T=150.0, I_m=39.28, t_hold=-0.01)


def test_compensation_ramps_down_after_clearing(cfg):
    s = FaultState(x_f=0, x_r=1.0)
    for _ in range(500):
        s = fault_fsm_step(s, 20.0, 169.0, cfg, DT)
    assert s.x_r == pytest.approx(0.5, abs=1e-9)
    for _ in range(600):
        s = fault_fsm_step(s, 20.0, 169.0, cfg, DT)
    assert s.x_r == 0.0
    assert s.x_f == 0


def test_reentry_during_ramp(cfg):
    s = FaultState(x_f=0, x_r=0.4, ramp_clock=0.06)
    s = fault_fsm_step(s, 60.0, 50.0, cfg, DT)
    assert s.x_f == 1
    assert s.x_r == 1.0
    assert s.ramp_clock == 0.0


def test_disabled_config_is_inert():
    cfg = FaultConfig(enabled=False)
    s = fault_fsm_step(FaultState(), 1e6, 0.0, cfg, DT)
    assert s.x_f == 0


def test_nonpositive_dt_raises(cfg):
    with pytest.raises(ValueError):
        fault_fsm_step(FaultState(), 0.0, 0.0, cfg, 0.0)


def test_limit_above_threshold_rejected():
    with pytest.raises(ConfigurationError):
        FaultConfig(I_T=30.0, V_T=100.0, I_m=40.0)


def test_default_R0_from_filter_inductance():
    cfg = FaultConfig(I_T=43.2, V_T=150.0, I_m=39.28)
    L_total = 0.1304 * 11.46e-3
    out = cfg.with_default_R0(L_total)
    assert out.R_0 == pytest.approx(2 * math.pi * 500 * L_total)
    assert out.with_default_R0(1.0) is out


def test_gain_boost():
    cfg = FaultConfig(I_T=43.2, V_T=150.0, I_m=39.28, R_0=5.25)
    assert cfg.gain_boost == pytest.approx(188.5)
    assert FaultState(x_f=0).eta_gain(cfg) == 1.0
    assert FaultState(x_f=1).eta_gain(None) == 1.0


def test_ocl_compensation():
    v = ocl_compensation(SpaceVector(30.0, 0.0), SpaceVector(40.0, 5.0), 0.5, 4.0)
    assert v.alpha == pytest.approx(-20.0)
    assert v.beta == pytest.approx(-10.0)
    assert ocl_compensation(SpaceVector(30.0, 0.0), SpaceVector(40.0, 5.0), 0.0, 4.0) == SpaceVector(0.0, 0.0)
