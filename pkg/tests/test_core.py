import math

import numpy as np
import pytest

from uvoclab.core import (
    abc_to_alphabeta, alphabeta_to_abc, instantaneous_pq, polar_compose, polar_decompose, power_error, rotate,
    voltage_floor,
)
from uvoclab.errors import DegenerateVoltageError
from uvoclab.oscillator import current_reference
from uvoclab.record import PolarForm, SpaceVector


def test_clarke_amplitude_invariant():
    v = abc_to_alphabeta(1.0, -0.5, -0.5)
    assert v.alpha == pytest.approx(1.0)
    assert v.beta == pytest.approx(0.0, abs=1e-15)


def test_clarke_round_trip_balanced():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b = rng.uniform(-200, 200, 2)
        c = -a - b
        back = alphabeta_to_abc(abc_to_alphabeta(a, b, c))
        assert back == pytest.approx((a, b, c), rel=1e-12, abs=1e-10)


def test_polar_round_trip():
    v = SpaceVector(3.0, -4.0)
    p = polar_decompose(v)
    assert p.magnitude == pytest.approx(5.0)
    back = polar_compose(p)
    assert back.alpha == pytest.approx(3.0, rel=1e-12)
    assert back.beta == pytest.approx(-4.0, rel=1e-12)


def test_polar_of_zero_vector():
    assert polar_decompose(SpaceVector()) == PolarForm(0.0, 0.0)


def test_rotate_preserves_magnitude_and_composes():
    v = SpaceVector(120.0, 35.0)
    r = rotate(v, 0.7)
    assert r.magnitude() == pytest.approx(v.magnitude(), rel=1e-12)
    twice = rotate(rotate(v, 0.3), 1.1)
    once = rotate(v, 1.4)
    assert twice.alpha == pytest.approx(once.alpha, rel=1e-12)
    assert twice.beta == pytest.approx(once.beta, rel=1e-12)


def test_instantaneous_power_signs():
    v = SpaceVector(100.0, 0.0)
    P, Q = instantaneous_pq(v, SpaceVector(10.0, 0.0), 3)
    assert P == pytest.approx(1500.0)
    assert Q == pytest.approx(0.0)
    # ток, отстающий на 90°, соответствует выдаче реактивной мощности
    P, Q = instantaneous_pq(v, SpaceVector(0.0, -10.0), 3)
    assert P == pytest.approx(0.0)
    assert Q == pytest.approx(1500.0)


def test_single_phase_power_scale():
    P, _ = instantaneous_pq(SpaceVector(100.0, 0.0), SpaceVector(10.0, 0.0), 1)
    assert P == pytest.approx(500.0)


def test_power_error_reconstructs_current_error():
    rng = np.random.default_rng(7)
    for _ in range(50):
        v = SpaceVector(*rng.uniform(-200, 200, 2))
        i = SpaceVector(*rng.uniform(-40, 40, 2))
        P0, Q0 = rng.uniform(-9000, 9000, 2)
        err = power_error(v, i, P0, Q0, 3)
        lhs = complex(err.e_iP, err.e_iQ) * v.as_complex()
        rhs = current_reference(v, P0, Q0, 3).as_complex() - i.as_complex()
        assert abs(lhs - rhs) <= 1e-9 * max(abs(rhs), 1.0)


def test_power_error_zero_when_tracking():
    v = SpaceVector(169.7, 0.0)
    i = current_reference(v, 5000.0, -1000.0, 3)
    err = power_error(v, i, 5000.0, -1000.0, 3)
    assert err.e_P == pytest.approx(0.0, abs=1e-9)
    assert err.e_Q == pytest.approx(0.0, abs=1e-9)


def test_power_error_degenerate_voltage():
    with pytest.raises(DegenerateVoltageError):
        power_error(SpaceVector(), SpaceVector(1.0, 0.0), 100.0, 0.0, 3, v_floor=voltage_floor(120.0))


def test_voltage_floor():
    assert voltage_floor(120.0) == pytest.approx(1.2e-4)


def test_space_vector_arithmetic():
    a = SpaceVector(1.0, 2.0)
    b = SpaceVector(3.0, -1.0)
    assert a + b == SpaceVector(4.0, 1.0)
    assert a - b == SpaceVector(-2.0, 3.0)
    assert -a == SpaceVector(-1.0, -2.0)
    assert (a * 2.0).as_complex() == complex(2.0, 4.0)
    assert SpaceVector.from_complex(complex(5.0, -6.0)) == SpaceVector(5.0, -6.0)
    assert math.isclose(b.magnitude(), math.sqrt(10.0))
