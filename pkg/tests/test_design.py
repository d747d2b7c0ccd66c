import math
from dataclasses import replace

import numpy as np
import pytest

from uvoclab.design import (
    DesignSpec, MapSpec, design_eta_mu, design_report, designed_svo, direct_droop_point, droop_frequency,
    power_limit_map, reactive_power_at_voltage, steady_state_voltage,
)
from uvoclab.errors import ConfigurationError, InfeasibleOperatingPointError
from uvoclab.scenario_reader import load_design


def test_table_design_values(design_spec):
    eta, mu = design_eta_mu(design_spec)
    assert eta == pytest.approx(16.6253, rel=1e-3)
    assert mu == pytest.approx(5.2029e-4, rel=1e-3)


def test_zero_voltage_band_rejected(ratings):
    with pytest.raises(ConfigurationError):
        design_eta_mu(DesignSpec(ratings, delta_V_max=0.0, delta_omega_max=math.pi))


def test_voltage_band_must_be_below_nominal(ratings):
    with pytest.raises(ConfigurationError):
        DesignSpec(ratings, delta_V_max=ratings.V0, delta_omega_max=math.pi)


def test_in_phase_design_swaps_ratings(ratings):
    quad = design_eta_mu(DesignSpec(ratings, 6.0, math.pi))
    in_phase = design_eta_mu(DesignSpec(ratings, 6.0, math.pi, phi=0.0))
    assert in_phase[0] == pytest.approx(quad[0] * ratings.P_rated / ratings.Q_rated)
    with pytest.raises(ConfigurationError):
        design_eta_mu(DesignSpec(ratings, 6.0, math.pi, phi=0.3))


def test_design_report_back_substitution(design_spec):
    report = design_report(design_spec)
    assert report.omega_residual == pytest.approx(0.0, abs=1e-9)
    assert report.voltage_residual == pytest.approx(0.0, abs=1e-9)
    assert report.V_max == pytest.approx(126.0)
    assert report.V_min < design_spec.ratings.V0
    frame = report.to_frame()
    assert list(frame["parameter"])[:2] == ["eta", "mu"]


def test_steady_state_voltage_requires_amplitude_control(gfl_svo):
    with pytest.raises(InfeasibleOperatingPointError):
        steady_state_voltage(0.0, 0.0, gfl_svo)


def test_nominal_operating_point(gfm_svo):
    assert steady_state_voltage(0.0, 0.0, gfm_svo) == pytest.approx(120.0)
    assert droop_frequency(0.0, 0.0, 120.0, gfm_svo) == gfm_svo.omega0


def test_droop_frequency_rejects_zero_voltage(gfm_svo):
    with pytest.raises(ValueError):
        droop_frequency(0.0, 0.0, 0.0, gfm_svo)


@pytest.mark.parametrize("phi", [0.0, 0.5 * math.pi])
def test_direct_droop_point_is_consistent(gfm_svo, phi):
    p = replace(gfm_svo, phi=phi).with_setpoints(2000.0, -500.0)
    rng = np.random.default_rng(11)
    for _ in range(20):
        V = rng.uniform(114.0, 126.0)
        w = p.omega0 + rng.uniform(-math.pi, math.pi)
        pt = direct_droop_point(V, w, p)
        assert steady_state_voltage(pt.P, pt.Q, p) == pytest.approx(V, rel=1e-9)
        assert droop_frequency(pt.P, pt.Q, V, p) == pytest.approx(w, rel=1e-12)


def test_reactive_power_inverts_voltage_droop(gfm_svo):
    p = gfm_svo.with_setpoints(3000.0, 500.0)
    for V in (115.0, 120.0, 125.0):
        Q = reactive_power_at_voltage(V, p, P=2500.0)
        assert steady_state_voltage(2500.0, Q, p) == pytest.approx(V, rel=1e-9)


def test_reactive_power_undefined_in_phase(gfm_svo):
    with pytest.raises(ConfigurationError):
        reactive_power_at_voltage(120.0, replace(gfm_svo, phi=0.0))


def test_designed_svo(design_spec):
    p = designed_svo(design_spec, P0=100.0)
    assert p.grid_forming
    assert p.P0 == 100.0
    assert p.V_p0 == pytest.approx(design_spec.ratings.V_p0)


def test_direct_power_map(design_spec):
    frame = power_limit_map(design_spec)
    r = design_spec.ratings
    assert len(frame) == 441
    assert frame["converged"].all()
    assert frame["P_poc"].abs().max() <= r.P_rated * (1 + 1e-9)
    assert frame["Q_poc"].abs().max() <= r.Q_rated * (1 + 1e-9)
    center = frame[((frame["V_g"] - r.V0).abs() < 1e-9) & ((frame["omega_g"] - r.omega0).abs() < 1e-9)]
    assert len(center) == 1
    assert center["P_poc"].iloc[0] == pytest.approx(0.0, abs=1e-6)
    assert center["Q_poc"].iloc[0] == pytest.approx(0.0, abs=1e-6)
    corner = frame.loc[frame["V_g"].idxmax()]
    assert corner["V_g"] == pytest.approx(r.V0 + design_spec.delta_V_max)


def test_map_grid_validation():
    with pytest.raises(ConfigurationError):
        MapSpec(v_points=0)


def test_filtered_power_map(scenarios_dir):
    design = load_design(scenarios_dir / "table2_design.json")
    frame = power_limit_map(design.spec, design.plant, design.map, design.evi)
    r = design.spec.ratings
    assert frame.shape == (441, 5)
    assert frame["converged"].all()
    assert frame["P_poc"].abs().max() <= 1.01 * r.P_rated
    assert frame["Q_poc"].abs().max() <= 1.01 * r.Q_rated
