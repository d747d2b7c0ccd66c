"""
Описание сценария моделирования: номинальные данные, силовая часть,
регулятор, начальные условия, события и параметры анализа.
"""
import math
from dataclasses import dataclass, field
from enum import Enum

from .controller import ControllerConfig
from .errors import ConfigurationError
from .plant import PlantParams
from .record import Event, VscRatings


class InitialMode(str, Enum):
    """
    Способ задания начального состояния.

    * ``steady_state`` — решение установившегося режима цепи и осциллятора;
    * ``grid_aligned`` — осциллятор совпадает с источником, токи нулевые;
    * ``zero`` — нулевое состояние силовой части, осциллятор на номинальной амплитуде.
    """

    STEADY_STATE = "steady_state"
    GRID_ALIGNED = "grid_aligned"
    ZERO = "zero"


@dataclass(frozen=True)
class InitialCondition:
    """
    Начальные условия.

    Attributes:
        mode (InitialMode): Способ инициализации.
        V_dc0 (float | None): Начальное напряжение звена постоянного тока, В. None — V*_dc.
        theta0 (float): Начальная фаза источника сети, рад.
    """

    mode: InitialMode = InitialMode.STEADY_STATE
    V_dc0: float | None = None
    theta0: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    """
    Перебор значения параметра сценария.

    Attributes:
        param (str): Путь к параметру через точку, например ``plant.grid.omega_g``.
        values (tuple): Значения в формате сценария (число или ``{"pu": x}``).
    """

    param: str
    values: tuple = ()


@dataclass(frozen=True)
class AnalysisSpec:
    """
    Параметры измерения частотной характеристики многотональной инжекцией в P0.

    Attributes:
        f_min (float): Нижняя частота, Гц.
        f_max (float): Верхняя частота, Гц.
        tones (int): Число тонов.
        amplitude (float): Амплитуда тона в долях P_rated.
        settle (float): Время установления до инжекции, с.
        measure (float): Длительность окна измерения, с.
        output (str): ``loop`` — контурное усиление −R/E регулятора звена
            постоянного тока, ``v_dc`` — Δv_dc/(−ΔP0).
        drift_tol (float): Допустимый относительный дрейф рабочей точки перед инжекцией.
        phases (str): ``schroeder`` или ``random`` (по ``seed`` сценария).
    """

    f_min: float = 1.0
    f_max: float = 100.0
    tones: int = 12
    amplitude: float = 0.005
    settle: float = 2.0
    measure: float = 2.0
    output: str = "loop"
    drift_tol: float = 2e-3
    phases: str = "schroeder"

    def __post_init__(self):
        if not 0 < self.f_min < self.f_max:
            raise ConfigurationError("Требуется 0 < f_min < f_max", f_min=self.f_min, f_max=self.f_max)
        if self.tones < 1 or self.amplitude <= 0 or self.settle < 0 or self.measure <= 0:
            raise ConfigurationError("Недопустимые параметры инжекции")
        if self.output not in ("loop", "v_dc"):
            raise ConfigurationError("Неизвестный выход измерения", output=self.output)
        if self.phases not in ("schroeder", "random"):
            raise ConfigurationError("Неизвестный способ задания фаз", phases=self.phases)


@dataclass(frozen=True)
class Scenario:
    """
    Сценарий моделирования.

    Attributes:
        name (str): Имя сценария.
        ratings (VscRatings): Номинальные данные.
        plant (PlantParams): Силовая часть.
        controller (ControllerConfig): Регулятор.
        initial (InitialCondition): Начальные условия.
        events (tuple[Event, ...]): События, упорядоченные по времени.
        duration (float): Длительность моделирования, с.
        substeps (int): Число шагов силовой части на период регулятора.
        decimation (int): Прореживание записи (в периодах регулятора).
        seed (int): Зерно генератора случайных возмущений.
        description (str): Описание.
        sweeps (tuple[SweepSpec, ...]): Переборы параметров.
        analysis (AnalysisSpec): Параметры измерения частотной характеристики.
    """

    name: str
    ratings: VscRatings
    plant: PlantParams
    controller: ControllerConfig
    initial: InitialCondition = field(default_factory=InitialCondition)
    events: tuple[Event, ...] = ()
    duration: float = 1.0
    substeps: int = 10
    decimation: int = 10
    seed: int = 0
    description: str = ""
    sweeps: tuple[SweepSpec, ...] = ()
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)

    def __post_init__(self):
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigurationError("Длительность должна быть положительной", duration=self.duration)
        if self.substeps < 1 or self.decimation < 1:
            raise ConfigurationError("substeps и decimation должны быть не меньше 1")
        times = [e.t for e in self.events]
        if times != sorted(times):
            raise ConfigurationError("События должны быть упорядочены по времени")
        if self.plant.N != self.ratings.N:
            raise ConfigurationError("Число фаз силовой части и номинальных данных различается")

    @property
    def dt_control(self) -> float:
        """Период регулятора 1/f_s, с."""
        return self.ratings.dt

    @property
    def dt_plant(self) -> float:
        """Шаг интегрирования силовой части, с."""
        return self.ratings.dt / self.substeps

    @property
    def V_dc0(self) -> float:
        """Начальное напряжение звена постоянного тока, В."""
        if self.initial.V_dc0 is not None:
            return self.initial.V_dc0
        return self.controller.V_dc_ref
