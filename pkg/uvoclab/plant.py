"""
Усреднённая модель силовой части: LCL-фильтр, ветвь сети по Тевенену,
локальная нагрузка, статический коммутатор (STS) и звено постоянного тока.

Схема: v_a — L_a — узел фильтра (C_f последовательно с r_c, нагрузка) —
L_g — точка подключения (PoC) — STS — R_N + sL_N — источник сети.

Для N = 3 все величины — пространственные векторы (амплитудно-инвариантные),
для N = 1 используется только составляющая α, а источник вещественный.
Внутри модуля векторы хранятся как комплексные числа ``α + jβ``.
"""
import cmath
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigurationError, ConvergenceError, DcBusCollapseError, NonFiniteStateError, UnknownEventError,
)
from .filters import EviParams, FeedbackSide
from .oscillator import SvoParams
from .record import Event, EventKind, SpaceVector
from .units import Kind, physical

logger = logging.getLogger(__name__)

# Нижняя граница напряжения звена постоянного тока, В
V_DC_FLOOR = 1.0


@dataclass(frozen=True)
class GridHarmonic:
    """
    Гармоника напряжения источника сети.

    Гармоники с h ≡ 1 (mod 3) — прямой последовательности, с h ≡ 2 (mod 3) —
    обратной, с h ≡ 0 (mod 3) в трёхфазном режиме не проявляются в αβ.

    Attributes:
        h (int): Номер гармоники.
        amplitude (float): Амплитуда, В.
        phase (float): Начальная фаза, рад.
    """

    h: int
    amplitude: float = physical(Kind.VOLTAGE)
    phase: float = 0.0


@dataclass(frozen=True)
class GridParams:
    """
    Эквивалент сети по Тевенену.

    Attributes:
        V_gp (float): Амплитуда фазного напряжения источника, В.
        omega_g (float): Частота источника, рад/с.
        R_N (float): Сопротивление сети, Ом.
        L_N (float): Индуктивность сети, Гн.
        harmonics (tuple[GridHarmonic, ...]): Гармоники источника.
    """

    V_gp: float = physical(Kind.VOLTAGE)
    omega_g: float = 2 * math.pi * 60
    R_N: float = physical(Kind.IMPEDANCE, default=0.0)
    L_N: float = physical(Kind.INDUCTANCE, default=0.0)
    harmonics: tuple[GridHarmonic, ...] = ()

    def __post_init__(self):
        if self.V_gp < 0 or self.omega_g <= 0 or self.R_N < 0 or self.L_N < 0:
            raise ConfigurationError("Недопустимые параметры сети", V_gp=self.V_gp, omega_g=self.omega_g)
        for harm in self.harmonics:
            if harm.h < 2:
                raise ConfigurationError("Номер гармоники сети должен быть не меньше 2", h=harm.h)


@dataclass(frozen=True)
class PlantParams:
    """
    Параметры силовой части.

    Attributes:
        L_a (float): Индуктивность со стороны преобразователя, Гн.
        L_g (float): Индуктивность со стороны сети, Гн.
        C_f (float): Ёмкость фильтра, Ф.
        C_dc (float): Ёмкость звена постоянного тока, Ф.
        grid (GridParams): Эквивалент сети.
        r_a (float): Паразитное сопротивление L_a, Ом.
        r_g (float): Паразитное сопротивление L_g, Ом.
        r_c (float): Демпфирующее сопротивление последовательно с C_f, Ом.
        load_R (float | None): Сопротивление локальной нагрузки, Ом. None — нагрузки нет.
        short_R (float): Сопротивление короткого замыкания в узле фильтра, Ом.
        shorted (bool): Замкнут ли узел фильтра накоротко.
        sts_closed (bool): Замкнут ли статический коммутатор.
        P_dc (float): Мощность, поступающая в звено постоянного тока, Вт.
        dc_stiff (bool): Звено постоянного тока как идеальный источник.
        N (int): Число фаз.
    """

    L_a: float = physical(Kind.INDUCTANCE)
    L_g: float = physical(Kind.INDUCTANCE)
    C_f: float = physical(Kind.CAPACITANCE)
    C_dc: float = physical(Kind.CAPACITANCE)
    grid: GridParams = None
    r_a: float = physical(Kind.IMPEDANCE, default=0.0)
    r_g: float = physical(Kind.IMPEDANCE, default=0.0)
    r_c: float = physical(Kind.IMPEDANCE, default=0.0)
    load_R: float | None = physical(Kind.IMPEDANCE, default=None)
    short_R: float = physical(Kind.IMPEDANCE, default=1e-3)
    shorted: bool = False
    sts_closed: bool = True
    P_dc: float = physical(Kind.POWER, default=0.0)
    dc_stiff: bool = False
    N: int = 3

    def __post_init__(self):
        if self.grid is None:
            raise ConfigurationError("Не заданы параметры сети", field="grid")
        if min(self.L_a, self.L_g, self.C_f, self.C_dc) <= 0:
            raise ConfigurationError("L_a, L_g, C_f и C_dc должны быть положительными")
        if min(self.r_a, self.r_g, self.r_c) < 0:
            raise ConfigurationError("Сопротивления не могут быть отрицательными")
        if self.short_R <= 0 or (self.load_R is not None and self.load_R <= 0):
            raise ConfigurationError("Сопротивления нагрузки и замыкания должны быть положительными")
        if self.N not in (1, 3):
            raise ConfigurationError("Число фаз должно быть 1 или 3", N=self.N)

    @property
    def L_line(self) -> float:
        """Суммарная индуктивность L_g + L_N, Гн."""
        return self.L_g + self.grid.L_N

    @property
    def R_line(self) -> float:
        """Суммарное сопротивление r_g + R_N, Ом."""
        return self.r_g + self.grid.R_N

    @property
    def load_conductance(self) -> float:
        """Проводимость узла фильтра на землю, См."""
        if self.shorted:
            return 1.0 / self.short_R
        if self.load_R is None:
            return 0.0
        return 1.0 / self.load_R


@dataclass(frozen=True)
class PlantState:
    """
    Непрерывное состояние силовой части.

    Attributes:
        i_a (SpaceVector): Ток преобразователя, А.
        i_g (SpaceVector): Ток сети, А.
        v_f (SpaceVector): Напряжение конденсатора фильтра, В.
        v_dc (float): Напряжение звена постоянного тока, В.
        theta (float): Фаза источника сети, рад.
    """

    i_a: SpaceVector
    i_g: SpaceVector
    v_f: SpaceVector
    v_dc: float
    theta: float = 0.0


@dataclass(frozen=True)
class PlantDerivatives:
    """Производные состояния силовой части по времени."""

    di_a: SpaceVector
    di_g: SpaceVector
    dv_f: SpaceVector
    dv_dc: float
    dtheta: float


def power_scale(N: int) -> float:
    """
    Множитель мгновенной мощности силовой части.

    Для N = 3 мощность равна (3/2)·Re(v·ī), для однофазной схемы — v_α·i_α.
    """
    return 1.5 if N == 3 else 1.0


def _source(theta: float, p: PlantParams) -> complex:
    g = p.grid
    if p.N == 1:
        v = g.V_gp * math.cos(theta)
        for harm in g.harmonics:
            v += harm.amplitude * math.cos(harm.h * theta + harm.phase)
        return complex(v, 0.0)
    v = g.V_gp * cmath.exp(1j * theta)
    for harm in g.harmonics:
        r = harm.h % 3
        if r == 1:
            v += harm.amplitude * cmath.exp(1j * (harm.h * theta + harm.phase))
        elif r == 2:
            v += harm.amplitude * cmath.exp(-1j * (harm.h * theta + harm.phase))
    return v


def _node(i_a: complex, i_g: complex, v_f: complex, p: PlantParams) -> complex:
    return (v_f + p.r_c * (i_a - i_g)) / (1.0 + p.r_c * p.load_conductance)


def _derivatives(x: tuple, v_a: complex, P_dc: float, p: PlantParams, quasi_static: bool = False) -> tuple:
    i_a, i_g, v_f, v_dc, theta = x
    if not v_dc > V_DC_FLOOR:
        raise DcBusCollapseError("Напряжение звена постоянного тока ниже допустимого", v_dc=v_dc)
    if quasi_static:
        # ток конденсатора нулевой, узел задаётся проводимостью нагрузки
        v_n = (i_a - i_g) / p.load_conductance
        dv_f = 0j
    else:
        v_n = _node(i_a, i_g, v_f, p)
        dv_f = (i_a - i_g - p.load_conductance * v_n) / p.C_f
    di_a = (v_a - v_n - p.r_a * i_a) / p.L_a
    if p.sts_closed:
        di_g = (v_n - _source(theta, p) - p.R_line * i_g) / p.L_line
    else:
        di_g = 0j
    if p.dc_stiff:
        dv_dc = 0.0
    else:
        P = power_scale(p.N) * (v_a.real * i_a.real + v_a.imag * i_a.imag)
        dv_dc = (P_dc - P) / (p.C_dc * v_dc)
    return di_a, di_g, dv_f, dv_dc, p.grid.omega_g


def _pack(s: PlantState) -> tuple:
    return s.i_a.as_complex(), s.i_g.as_complex(), s.v_f.as_complex(), s.v_dc, s.theta


def _unpack(x: tuple) -> PlantState:
    i_a, i_g, v_f, v_dc, theta = x
    return PlantState(SpaceVector(i_a.real, i_a.imag), SpaceVector(i_g.real, i_g.imag),
                      SpaceVector(v_f.real, v_f.imag), v_dc, theta)


def plant_derivatives(s: PlantState, v_a: SpaceVector, P_dc: float | None, p: PlantParams,
                      t: float = 0.0) -> PlantDerivatives:
    """
    Правые части уравнений силовой части.

    Args:
        s (PlantState): Состояние.
        v_a (SpaceVector): Напряжение на выводах преобразователя, В.
        P_dc (float | None): Мощность источника звена постоянного тока, Вт. None — ``p.P_dc``.
        p (PlantParams): Параметры.
        t (float): Время, с. Источник сети задаётся фазой ``s.theta``, поэтому
            правые части от t явно не зависят.

    Returns:
        PlantDerivatives: Производные всех переменных состояния.

    Raises:
        DcBusCollapseError: Если v_dc ниже 1 В.
    """
    va = v_a.as_complex()
    if p.N == 1:
        va = complex(va.real, 0.0)
    d = _derivatives(_pack(s), va, p.P_dc if P_dc is None else P_dc, p)
    return PlantDerivatives(
        SpaceVector.from_complex(d[0]), SpaceVector.from_complex(d[1]), SpaceVector.from_complex(d[2]),
        d[3], d[4],
    )


def plant_rk4_step(s: PlantState, v_a: SpaceVector, p: PlantParams, dt: float, t: float = 0.0) -> PlantState:
    """
    Шаг интегрирования силовой части методом Рунге–Кутты 4-го порядка.

    Напряжение v_a и мощность P_dc постоянны на шаге. Если постоянная времени
    узла фильтра не разрешается шагом (см. :func:`stiff_node`), ёмкость
    исключается: узел считается квазистатическим, а v_f в конце шага равно
    напряжению нагрузки.

    Args:
        s (PlantState): Состояние на начало шага.
        v_a (SpaceVector): Напряжение преобразователя, В.
        p (PlantParams): Параметры.
        dt (float): Шаг, с.
        t (float): Время начала шага (для диагностики), с.

    Returns:
        PlantState: Состояние в конце шага.

    Raises:
        DcBusCollapseError: Если v_dc ниже 1 В.
        NonFiniteStateError: Если состояние стало неконечным.
    """
    va = v_a.as_complex()
    if p.N == 1:
        va = complex(va.real, 0.0)
    P_dc = p.P_dc
    quasi = stiff_node(p, dt)
    x0 = _pack(s)

    def shifted(x, k, h):
        return tuple(xi + h * ki for xi, ki in zip(x, k))

    k1 = _derivatives(x0, va, P_dc, p, quasi)
    k2 = _derivatives(shifted(x0, k1, 0.5 * dt), va, P_dc, p, quasi)
    k3 = _derivatives(shifted(x0, k2, 0.5 * dt), va, P_dc, p, quasi)
    k4 = _derivatives(shifted(x0, k3, dt), va, P_dc, p, quasi)
    x1 = tuple(xi + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
               for xi, a, b, c, d in zip(x0, k1, k2, k3, k4))
    if quasi:
        x1 = (x1[0], x1[1], (x1[0] - x1[1]) / p.load_conductance, x1[3], x1[4])
    names = ("i_a", "i_g", "v_f", "v_dc", "theta")
    for name, value in zip(names, x1):
        if not cmath.isfinite(value):
            raise NonFiniteStateError("Состояние силовой части стало неконечным", t=t, variable=name)
    if not x1[3] > V_DC_FLOOR:
        raise DcBusCollapseError("Напряжение звена постоянного тока ниже допустимого", t=t, v_dc=x1[3])
    return _unpack(x1)


def grid_source_voltage(s: PlantState, p: PlantParams) -> SpaceVector:
    """Напряжение источника сети в момент с фазой ``s.theta``, В."""
    return SpaceVector.from_complex(_source(s.theta, p))


def poc_voltage(s: PlantState, p: PlantParams) -> SpaceVector:
    """
    Напряжение в точке подключения между L_g и STS.

    При замкнутом STS находится из делителя индуктивностей L_g и L_N,
    при разомкнутом равно напряжению узла фильтра (ток сети нулевой).

    Returns:
        SpaceVector: v_poc, В.
    """
    i_g = s.i_g.as_complex()
    v_n = _node(s.i_a.as_complex(), i_g, s.v_f.as_complex(), p)
    if not p.sts_closed:
        return SpaceVector.from_complex(v_n - p.r_g * i_g)
    v_src = _source(s.theta, p)
    g = p.grid
    v = (g.L_N * (v_n - p.r_g * i_g) + p.L_g * (v_src + g.R_N * i_g)) / p.L_line
    return SpaceVector.from_complex(v)


def grid_measurement(s: PlantState, p: PlantParams) -> SpaceVector:
    """
    Напряжение сети, измеряемое регулятором.

    При замкнутом STS — напряжение в точке подключения, при разомкнутом —
    напряжение источника за коммутатором.
    """
    if p.sts_closed:
        return poc_voltage(s, p)
    return grid_source_voltage(s, p)


def stored_energy(s: PlantState, p: PlantParams) -> float:
    """
    Энергия, запасённая в индуктивностях, ёмкости фильтра и звене постоянного тока, Дж.
    """
    k = 0.5 * power_scale(p.N)
    i_a, i_g, v_f = s.i_a.as_complex(), s.i_g.as_complex(), s.v_f.as_complex()
    ac = p.L_a * abs(i_a) ** 2 + p.L_line * abs(i_g) ** 2 + p.C_f * abs(v_f) ** 2
    return k * ac + 0.5 * p.C_dc * s.v_dc ** 2


def power_balance(s: PlantState, v_a: SpaceVector, p: PlantParams) -> float:
    """
    Правая часть энергетического баланса dE/dt = P_dc − P_src − P_load − P_loss, Вт.

    P_src — мощность, отдаваемая в источник сети, P_load — мощность нагрузки,
    P_loss — потери в r_a, r_g, R_N и r_c.
    """
    k = power_scale(p.N)
    va = v_a.as_complex()
    if p.N == 1:
        va = complex(va.real, 0.0)
    i_a, i_g, v_f = s.i_a.as_complex(), s.i_g.as_complex(), s.v_f.as_complex()
    v_n = _node(i_a, i_g, v_f, p)
    i_c = i_a - i_g - p.load_conductance * v_n
    p_src = k * (_source(s.theta, p) * i_g.conjugate()).real if p.sts_closed else 0.0
    p_load = k * p.load_conductance * abs(v_n) ** 2
    p_loss = k * (p.r_a * abs(i_a) ** 2 + p.R_line * abs(i_g) ** 2 + p.r_c * abs(i_c) ** 2)
    if p.dc_stiff:
        p_dc = k * (va * i_a.conjugate()).real
    else:
        p_dc = p.P_dc
    return p_dc - p_src - p_load - p_loss


def stiff_node(p: PlantParams, dt: float) -> bool:
    """
    Проверяет, что постоянная времени узла фильтра не разрешается шагом dt.

    Постоянная времени разряда C_f на нагрузку равна C_f·(r_c + 1/G). Если
    она меньше трёх шагов (например, при коротком замыкании), узел
    интегрируется квазистатически.

    Args:
        p (PlantParams): Параметры.
        dt (float): Шаг интегрирования, с.

    Returns:
        bool: True, если ёмкость фильтра исключается.
    """
    G = p.load_conductance
    if G == 0.0:
        return False
    return p.C_f * (p.r_c + 1.0 / G) < 3.0 * dt


def apply_event(p: PlantParams, event: Event) -> PlantParams:
    """
    Применяет событие силовой части.

    Args:
        p (PlantParams): Текущие параметры.
        event (Event): Событие.

    Returns:
        PlantParams: Новые параметры.

    Raises:
        UnknownEventError: Если событие не относится к силовой части.
    """
    kind = event.kind
    if kind is EventKind.GRID_VOLTAGE:
        return replace(p, grid=replace(p.grid, V_gp=float(event.value)))
    if kind is EventKind.GRID_FREQUENCY:
        return replace(p, grid=replace(p.grid, omega_g=float(event.value)))
    if kind is EventKind.STS_OPEN:
        return replace(p, sts_closed=False)
    if kind is EventKind.STS_CLOSE:
        return replace(p, sts_closed=True)
    if kind is EventKind.LOAD:
        load = None if event.value is None or event.value <= 0 else float(event.value)
        return replace(p, load_R=load)
    if kind is EventKind.SHORT_CIRCUIT:
        short_R = p.short_R if event.value is None else float(event.value)
        return replace(p, shorted=True, short_R=short_R)
    if kind is EventKind.SHORT_CLEAR:
        return replace(p, shorted=False)
    if kind is EventKind.DC_LOAD:
        return replace(p, P_dc=float(event.value))
    raise UnknownEventError(f"Событие {kind.value} не относится к силовой части", t=event.t)


# --- установившийся режим на основной частоте -------------------------------------

@dataclass(frozen=True)
class PhasorSolution:
    """
    Комплексные амплитуды установившегося режима (опорная фаза — источник сети).

    Attributes:
        V_a (complex): Напряжение преобразователя, В.
        I_a (complex): Ток преобразователя, А.
        I_g (complex): Ток сети, А.
        V_n (complex): Напряжение узла фильтра, В.
        V_f (complex): Напряжение конденсатора, В.
        V_poc (complex): Напряжение в точке подключения, В.
        omega (float): Частота, рад/с.
    """

    V_a: complex
    I_a: complex
    I_g: complex
    V_n: complex
    V_f: complex
    V_poc: complex
    omega: float

    def poc_power(self, N: int) -> tuple[float, float]:
        """Активная и реактивная мощности в точке подключения, Вт и вар."""
        s = 0.5 * N * self.V_poc * self.I_g.conjugate()
        return s.real, s.imag


def phasor_network(p: PlantParams, V_a: complex, omega: float | None = None) -> PhasorSolution:
    """
    Решение линейной цепи LCL + сеть для синусоидального режима.

    Args:
        p (PlantParams): Параметры (гармоники источника не учитываются).
        V_a (complex): Комплексная амплитуда напряжения преобразователя, В.
        omega (float | None): Частота; по умолчанию частота источника.

    Returns:
        PhasorSolution: Токи и напряжения цепи.
    """
    w = p.grid.omega_g if omega is None else omega
    Z_a = p.r_a + 1j * w * p.L_a
    Y_c = 1j * w * p.C_f / (1.0 + 1j * w * p.C_f * p.r_c)
    V_s = complex(p.grid.V_gp)
    Y_line = 1.0 / (p.R_line + 1j * w * p.L_line) if p.sts_closed else 0.0
    Y = 1.0 / Z_a + Y_c + p.load_conductance + Y_line
    V_n = (V_a / Z_a + V_s * Y_line) / Y
    I_a = (V_a - V_n) / Z_a
    I_g = (V_n - V_s) * Y_line
    V_f = V_n - p.r_c * Y_c * V_n
    V_poc = V_n - (p.r_g + 1j * w * p.L_g) * I_g
    return PhasorSolution(V_a, I_a, I_g, V_n, V_f, V_poc, w)


@dataclass(frozen=True)
class SteadyState:
    """
    Совместное установившееся решение цепи и осциллятора.

    Attributes:
        v (complex): Комплексная амплитуда напряжения осциллятора, В.
        network (PhasorSolution): Решение цепи.
        P (float): Активная мощность на стороне осциллятора, Вт.
        Q (float): Реактивная мощность на стороне осциллятора, вар.
        iterations (int): Число итераций Ньютона.
        residual (float): Норма невязки, рад/с.
    """

    v: complex
    network: PhasorSolution
    P: float
    Q: float
    iterations: int
    residual: float


def svo_residual(v: complex, i_fb: complex, svo: SvoParams, omega: float) -> np.ndarray:
    """
    Невязки установившегося режима осциллятора, нормированные на N·V_p0²/2.

    r1 = (ω − ω0)·N V² − η·W, r2 = 2μ(V0² − V²)·N V² + η·D, где
    D = e_P cosφ + e_Q sinφ, W = e_P sinφ − e_Q cosφ, V — действующее значение.

    Returns:
        np.ndarray: Вектор (r1, r2) в рад/с.
    """
    s = 0.5 * svo.N * v * i_fb.conjugate()
    e_P = svo.P0 - s.real
    e_Q = svo.Q0 - s.imag
    c, sn = math.cos(svo.phi), math.sin(svo.phi)
    D = e_P * c + e_Q * sn
    W = e_P * sn - e_Q * c
    nv2 = 0.5 * svo.N * abs(v) ** 2
    r1 = (omega - svo.omega0) * nv2 - svo.eta * W
    r2 = svo.mu * (svo.V_p0 ** 2 - abs(v) ** 2) * nv2 + svo.eta * D
    return np.array([r1, r2]) / (0.5 * svo.N * svo.V_p0 ** 2)


def _no_load_magnitude(svo: SvoParams, fallback: float) -> float:
    if svo.mu <= 0.0:
        return fallback
    D0 = svo.P0 * math.cos(svo.phi) + svo.Q0 * math.sin(svo.phi)
    disc = svo.V_p0 ** 4 + 8.0 * svo.eta * D0 / (svo.mu * svo.N)
    if disc <= 0.0:
        return fallback
    return math.sqrt(0.5 * (svo.V_p0 ** 2 + math.sqrt(disc)))


def steady_state_solve(p: PlantParams, svo: SvoParams, evi: EviParams | None = None,
                       feedback: FeedbackSide = FeedbackSide.GRID, k_mod: float = 1.0,
                       max_iter: int = 60, tol: float = 1e-10) -> SteadyState:
    """
    Совместное решение цепи и уравнений установившегося режима осциллятора.

    Неизвестные — амплитуда V_p и угол δ напряжения осциллятора относительно
    источника. Напряжение преобразователя v_a = k_mod·(v − Z_v(jω)·i),
    где i — ток обратной связи. Метод Ньютона с численным якобианом и
    уменьшением шага вдвое, пока норма невязки не убывает.

    Args:
        p (PlantParams): Параметры силовой части (STS должен быть замкнут).
        svo (SvoParams): Параметры осциллятора с уставками.
        evi (EviParams | None): Виртуальное сопротивление; None — отсутствует.
        feedback (FeedbackSide): Сторона измерения тока обратной связи.
        k_mod (float): Отношение v_dc/V*_dc.
        max_iter (int): Максимум итераций.
        tol (float): Допуск нормы невязки, рад/с.

    Returns:
        SteadyState: Решение.

    Raises:
        ConfigurationError: Если STS разомкнут.
        ConvergenceError: Если итерации не сошлись.
    """
    if not p.sts_closed:
        raise ConfigurationError("Установившийся режим с сетью требует замкнутого STS")
    w = p.grid.omega_g
    Z_v = evi.impedance(1j * w) if evi is not None else 0.0
    use_grid = feedback is FeedbackSide.GRID

    def meas(sol: PhasorSolution) -> complex:
        return sol.I_g if use_grid else sol.I_a

    base = meas(phasor_network(p, 0j, w))
    gain = meas(phasor_network(p, 1.0 + 0j, w)) - base

    def solve(x: np.ndarray) -> tuple[complex, PhasorSolution]:
        v = x[0] * cmath.exp(1j * x[1])
        V_a = k_mod * (v - Z_v * base) / (1.0 + k_mod * Z_v * gain)
        return v, phasor_network(p, V_a, w)

    def residual(x: np.ndarray) -> np.ndarray:
        v, sol = solve(x)
        return svo_residual(v, meas(sol), svo, w)

    x = np.array([_no_load_magnitude(svo, p.grid.V_gp or svo.V_p0), 0.0])
    r = residual(x)
    norm = float(np.max(np.abs(r)))
    h = np.array([1e-6 * svo.V_p0, 1e-6])
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        J = np.empty((2, 2))
        for k in range(2):
            dx = np.zeros(2)
            dx[k] = h[k]
            J[:, k] = (residual(x + dx) - residual(x - dx)) / (2.0 * h[k])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("Вырожденный якобиан установившегося режима", residual=norm,
                                   iterations=it) from exc
        alpha = 1.0
        while True:
            x_new = x + alpha * step
            if x_new[0] <= 0:
                x_new[0] = 0.5 * x[0]
            r_new = residual(x_new)
            norm_new = float(np.max(np.abs(r_new)))
            if norm_new < norm or alpha < 1.0 / 64:
                break
            alpha *= 0.5
        x, r, norm = x_new, r_new, norm_new
        logger.debug("Установившийся режим: итерация %d, невязка %.3e", it, norm)
    if not norm <= tol:
        raise ConvergenceError("Установившийся режим не найден", residual=norm, iterations=it)
    v, sol = solve(x)
    s = 0.5 * svo.N * v * meas(sol).conjugate()
    return SteadyState(v, sol, s.real, s.imag, it, norm)
