"""
Типы-значения uVOC-Lab: пространственный вектор, полярная форма, номинальные
данные преобразователя, ошибка мощности, точка статической характеристики и
события сценария.
"""
import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError


@dataclass(frozen=True)
class SpaceVector:
    """
    Пространственный вектор в неподвижной системе координат αβ.

    Универсальный носитель сигналов напряжения и тока: v, i, i0, i0_sat,
    v_g, v_c, v_OL, v_zv, i_ps и коэффициент модуляции m.

    Attributes:
        alpha (float): Составляющая по оси α (В или А).
        beta (float): Составляющая по оси β (В или А).
    """

    alpha: float = 0.0
    beta: float = 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "SpaceVector":
        """
        Создаёт вектор из комплексного числа ``alpha + j·beta``.

        Args:
            z (complex): Комплексное представление вектора.

        Returns:
            SpaceVector: Вектор с составляющими (Re z, Im z).
        """
        return cls(z.real, z.imag)

    def as_complex(self) -> complex:
        """
        Возвращает комплексное представление ``alpha + j·beta``.

        Returns:
            complex: Вектор как комплексное число.
        """
        return complex(self.alpha, self.beta)

    def magnitude(self) -> float:
        """
        Модуль вектора √(α² + β²).

        Returns:
            float: Неотрицательный модуль.
        """
        return math.hypot(self.alpha, self.beta)

    def is_finite(self) -> bool:
        """
        Проверяет, что обе составляющие конечны.

        Returns:
            bool: True, если нет NaN и бесконечностей.
        """
        return math.isfinite(self.alpha) and math.isfinite(self.beta)

    def __add__(self, other: "SpaceVector") -> "SpaceVector":
        return SpaceVector(self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other: "SpaceVector") -> "SpaceVector":
        return SpaceVector(self.alpha - other.alpha, self.beta - other.beta)

    def __neg__(self) -> "SpaceVector":
        return SpaceVector(-self.alpha, -self.beta)

    def __mul__(self, k: float) -> "SpaceVector":
        return SpaceVector(self.alpha * k, self.beta * k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> "SpaceVector":
        return SpaceVector(self.alpha / k, self.beta / k)


@dataclass(frozen=True)
class PolarForm:
    """
    Полярная форма пространственного вектора.

    Attributes:
        magnitude (float): Амплитуда V_p ≥ 0.
        angle (float): Угол θ в радианах.
    """

    magnitude: float
    angle: float


@dataclass(frozen=True)
class VscRatings:
    """
    Номинальные данные преобразователя и базисные величины относительных единиц.

    Attributes:
        S_rated (float): Полная номинальная мощность, ВА.
        P_rated (float): Номинальная активная мощность, Вт.
        Q_rated (float): Номинальная реактивная мощность, вар.
        V0 (float): Номинальное фазное действующее напряжение, В.
        omega0 (float): Номинальная угловая частота, рад/с.
        f_s (float): Частота дискретизации регулятора, Гц.
        N (int): Число фаз, 1 или 3.
    """

    S_rated: float
    P_rated: float
    Q_rated: float
    V0: float
    omega0: float = 2 * math.pi * 60
    f_s: float = 10e3
    N: int = 3

    def __post_init__(self):
        if self.N not in (1, 3):
            raise ConfigurationError(f"Число фаз должно быть 1 или 3, получено {self.N}", field="N")
        if self.f_s <= 0:
            raise ConfigurationError("Частота дискретизации должна быть положительной", field="f_s")
        if self.S_rated <= 0 or self.V0 <= 0 or self.omega0 <= 0:
            raise ConfigurationError("S_rated, V0 и omega0 должны быть положительными")
        if math.hypot(self.P_rated, self.Q_rated) > 1.01 * self.S_rated:
            raise ConfigurationError(
                "P_rated² + Q_rated² превышает S_rated² более чем на 1%",
                P_rated=self.P_rated, Q_rated=self.Q_rated, S_rated=self.S_rated,
            )

    @property
    def V_p0(self) -> float:
        """Номинальная амплитуда фазного напряжения √2·V0, В."""
        return math.sqrt(2.0) * self.V0

    @property
    def z_base(self) -> float:
        """Базисное сопротивление N·V0²/S, Ом."""
        return self.N * self.V0 ** 2 / self.S_rated

    @property
    def l_base(self) -> float:
        """Базисная индуктивность Z_base/ω0, Гн."""
        return self.z_base / self.omega0

    @property
    def c_base(self) -> float:
        """Базисная ёмкость 1/(ω0·Z_base), Ф."""
        return 1.0 / (self.omega0 * self.z_base)

    @property
    def i_base_peak(self) -> float:
        """Базисная амплитуда тока √2·S/(N·V0), А."""
        return math.sqrt(2.0) * self.S_rated / (self.N * self.V0)

    @property
    def dt(self) -> float:
        """Период дискретизации регулятора, с."""
        return 1.0 / self.f_s


@dataclass(frozen=True)
class PowerError:
    """
    Ошибка отслеживания мощности и соответствующие составляющие ошибки тока.

    Attributes:
        e_P (float): P0 − P, Вт.
        e_Q (float): Q0 − Q, вар.
        e_iP (float): 2·e_P/(N·V_p²), См.
        e_iQ (float): −2·e_Q/(N·V_p²), См.
    """

    e_P: float
    e_Q: float
    e_iP: float
    e_iQ: float


@dataclass(frozen=True)
class DroopPoint:
    """
    Точка установившейся статической характеристики.

    Attributes:
        P (float): Активная мощность, Вт.
        Q (float): Реактивная мощность, вар.
        V (float): Действующее фазное напряжение, В.
        omega (float): Угловая частота, рад/с.
    """

    P: float
    Q: float
    V: float
    omega: float

    def __post_init__(self):
        if self.V <= 0:
            raise ConfigurationError("Напряжение точки характеристики должно быть положительным", V=self.V)


class EventKind(str, Enum):
    """
    Тип события сценария.

    События объекта (сеть, нагрузка, коммутатор, звено постоянного тока)
    изменяют :class:`~uvoclab.plant.PlantParams`, события регулятора —
    уставки и режимы :class:`~uvoclab.controller.ControllerState`.
    """

    GRID_VOLTAGE = "grid_voltage"
    GRID_FREQUENCY = "grid_frequency"
    STS_OPEN = "sts_open"
    STS_CLOSE = "sts_close"
    LOAD = "load"
    SHORT_CIRCUIT = "short_circuit"
    SHORT_CLEAR = "short_clear"
    DC_LOAD = "dc_load"
    SETPOINT_P = "setpoint_p"
    SETPOINT_Q = "setpoint_q"
    MU = "mu"
    PRESYNC_ON = "presync_on"
    PRESYNC_OFF = "presync_off"
    DCREG_ON = "dcreg_on"
    DCREG_OFF = "dcreg_off"

    @property
    def targets_plant(self) -> bool:
        """True, если событие изменяет параметры объекта."""
        return self in _PLANT_EVENTS

    @property
    def needs_value(self) -> bool:
        """True, если событие требует числового значения."""
        return self in _VALUED_EVENTS


_PLANT_EVENTS = frozenset({
    EventKind.GRID_VOLTAGE, EventKind.GRID_FREQUENCY, EventKind.STS_OPEN, EventKind.STS_CLOSE,
    EventKind.LOAD, EventKind.SHORT_CIRCUIT, EventKind.SHORT_CLEAR, EventKind.DC_LOAD,
})

_VALUED_EVENTS = frozenset({
    EventKind.GRID_VOLTAGE, EventKind.GRID_FREQUENCY, EventKind.DC_LOAD,
    EventKind.SETPOINT_P, EventKind.SETPOINT_Q, EventKind.MU,
})


@dataclass(frozen=True)
class Event:
    """
    Событие сценария.

    Attributes:
        t (float): Момент применения, с.
        kind (EventKind): Тип события.
        value (float | None): Новое значение в СИ (амплитуда напряжения, частота,
            сопротивление нагрузки, мощность, μ). Для коммутаций не используется.
    """

    t: float
    kind: EventKind
    value: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0:
            raise ConfigurationError("Время события должно быть неотрицательным", t=self.t)
        if self.kind.needs_value and self.value is None:
            raise ConfigurationError(f"Событие {self.kind.value} требует значения", t=self.t)
