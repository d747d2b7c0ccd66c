import math
from pathlib import Path

import pytest

from uvoclab.controller import ControllerConfig
from uvoclab.design import DesignSpec
from uvoclab.oscillator import SvoParams
from uvoclab.plant import GridParams, PlantParams
from uvoclab.record import VscRatings

SCENARIOS = Path(__file__).resolve().parent.parent / "uvoclab" / "scenarios"

OMEGA0 = 2 * math.pi * 60


@pytest.fixture
def ratings() -> VscRatings:
    """Номинальные данные трёхфазного преобразователя 10 кВА, 120 В."""
    return VscRatings(S_rated=10000.0, P_rated=9000.0, Q_rated=4400.0, V0=120.0)


@pytest.fixture
def design_spec(ratings) -> DesignSpec:
    return DesignSpec(ratings, delta_V_max=0.05 * ratings.V0, delta_omega_max=math.pi)


@pytest.fixture
def gfm_svo(ratings) -> SvoParams:
    return SvoParams(eta=16.6253, mu=5.2029e-4, phi=0.5 * math.pi, omega0=ratings.omega0, V_p0=ratings.V_p0)


@pytest.fixture
def gfl_svo(ratings) -> SvoParams:
    return SvoParams(eta=16.63, mu=0.0, phi=0.5 * math.pi, omega0=ratings.omega0, V_p0=ratings.V_p0)


@pytest.fixture
def plant(ratings) -> PlantParams:
    """LCL-фильтр в относительных единицах, жёсткая сеть, звено постоянного тока 2 мФ."""
    return PlantParams(
        L_a=0.0778 * ratings.l_base,
        L_g=0.0524 * ratings.l_base,
        C_f=0.0879 * ratings.c_base,
        C_dc=2e-3,
        grid=GridParams(V_gp=ratings.V_p0, omega_g=ratings.omega0),
    )


@pytest.fixture
def gfl_config(ratings, gfl_svo) -> ControllerConfig:
    return ControllerConfig(ratings, gfl_svo)


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS
