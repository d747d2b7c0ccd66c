"""
Расчёт установившихся режимов и выбор параметров осциллятора.

* выбор η и μ по допустимым отклонениям частоты и напряжения;
* аналитические статические характеристики ω(P, Q, V) и V(P, Q);
* карта предельных мощностей в точке подключения по решению потокораспределения
  через LCL-фильтр совместно с установившимся режимом осциллятора.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .errors import ConfigurationError, ConvergenceError, InfeasibleOperatingPointError
from .filters import EviParams, FeedbackSide
from .oscillator import SvoParams
from .plant import PlantParams, steady_state_solve
from .record import DroopPoint, VscRatings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignSpec:
    """
    Требования к статическим характеристикам.

    Attributes:
        ratings (VscRatings): Номинальные данные.
        delta_V_max (float): Допустимое отклонение действующего напряжения ΔV_max, В.
        delta_omega_max (float): Допустимое отклонение частоты Δω_max, рад/с.
        phi (float): Угол φ, 0 или π/2.
    """

    ratings: VscRatings
    delta_V_max: float
    delta_omega_max: float
    phi: float = 0.5 * math.pi

    def __post_init__(self):
        if not self.delta_V_max < self.ratings.V0:
            raise ConfigurationError("Требуется ΔV_max < V0", delta_V_max=self.delta_V_max)
        if not self.delta_omega_max > 0:
            raise ConfigurationError("Требуется Δω_max > 0", delta_omega_max=self.delta_omega_max)

    @property
    def V_max(self) -> float:
        """Максимальное действующее напряжение V0 + ΔV_max, В."""
        return self.ratings.V0 + self.delta_V_max

    @property
    def quadrature(self) -> bool:
        """True для φ = π/2, False для φ = 0."""
        if abs(self.phi - 0.5 * math.pi) < 1e-9:
            return True
        if abs(self.phi) < 1e-9:
            return False
        raise ConfigurationError("Выбор параметров поддерживается только для φ ∈ {0, π/2}", phi=self.phi)


@dataclass(frozen=True)
class MapSpec:
    """
    Сетка карты предельных мощностей.

    Attributes:
        v_points (int): Число узлов по напряжению сети.
        w_points (int): Число узлов по частоте сети.
        span (float): Множитель размаха относительно ±ΔV_max × ±Δω_max.
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
    """

    v_points: int = 21
    w_points: int = 21
    span: float = 1.0
    P0: float = 0.0
    Q0: float = 0.0

    def __post_init__(self):
        if self.v_points < 1 or self.w_points < 1 or self.span <= 0:
            raise ConfigurationError("Недопустимая сетка карты мощностей")


def design_eta_mu(spec: DesignSpec) -> tuple[float, float]:
    """
    Выбор коэффициентов η и μ.

    Для φ = π/2: η = N·Δω_max·V_max²/P_rated,
    μ = 2η·Q_rated/(N·[(2V_max² − V0²)² − V0⁴]).
    Для φ = 0 номинальные P и Q меняются местами.

    Args:
        spec (DesignSpec): Требования.

    Returns:
        tuple[float, float]: (η, μ).

    Raises:
        ConfigurationError: Если знаменатель μ неположителен (V_max ≤ V0).

    Example:
        >>> r = VscRatings(10e3, 9e3, 4.4e3, 120.0)
        >>> design_eta_mu(DesignSpec(r, 6.0, math.pi))
        (16.6253..., 0.00052029...)
    """
    r = spec.ratings
    P_r, Q_r = (r.P_rated, r.Q_rated) if spec.quadrature else (r.Q_rated, r.P_rated)
    Vm2 = spec.V_max ** 2
    V02 = r.V0 ** 2
    den = (2.0 * Vm2 - V02) ** 2 - V02 ** 2
    if not den > 0:
        raise ConfigurationError("Знаменатель μ неположителен: требуется V_max > V0", V_max=spec.V_max)
    eta = r.N * spec.delta_omega_max * Vm2 / P_r
    mu = 2.0 * eta * Q_r / (r.N * den)
    return eta, mu


def designed_svo(spec: DesignSpec, P0: float = 0.0, Q0: float = 0.0) -> SvoParams:
    """Параметры осциллятора с коэффициентами из :func:`design_eta_mu`."""
    eta, mu = design_eta_mu(spec)
    r = spec.ratings
    return SvoParams(eta=eta, mu=mu, phi=spec.phi, omega0=r.omega0, V_p0=r.V_p0, P0=P0, Q0=Q0, N=r.N)


def steady_state_voltage(P: float, Q: float, p: SvoParams) -> float:
    """
    Установившееся действующее напряжение осциллятора.

    V² = [V0² + √(V0⁴ + 2η·D/(μN))]/2, D = (P0 − P)cosφ + (Q0 − Q)sinφ.

    Args:
        P (float): Активная мощность, Вт.
        Q (float): Реактивная мощность, вар.
        p (SvoParams): Параметры осциллятора.

    Returns:
        float: V, В (действующее).

    Raises:
        InfeasibleOperatingPointError: Если подкоренное выражение отрицательно или μ = 0.
    """
    if p.mu <= 0:
        raise InfeasibleOperatingPointError("При μ = 0 напряжение не определяется статической характеристикой")
    V02 = p.V0 ** 2
    D = (p.P0 - P) * math.cos(p.phi) + (p.Q0 - Q) * math.sin(p.phi)
    rad = V02 ** 2 + 2.0 * p.eta * D / (p.mu * p.N)
    if rad < 0:
        raise InfeasibleOperatingPointError("Отрицательное подкоренное выражение", radicand=rad, P=P, Q=Q)
    return math.sqrt(0.5 * (V02 + math.sqrt(rad)))


def droop_frequency(P: float, Q: float, V: float, p: SvoParams) -> float:
    """
    Установившаяся частота ω = ω0 + (η/(N V²))·[(P0 − P)sinφ − (Q0 − Q)cosφ].

    Args:
        V (float): Действующее напряжение, В.

    Raises:
        ValueError: Если V ≤ 0.
    """
    if V <= 0:
        raise ValueError("Напряжение должно быть положительным")
    return p.omega0 + p.eta / (p.N * V * V) * ((p.P0 - P) * math.sin(p.phi) - (p.Q0 - Q) * math.cos(p.phi))


def reactive_power_at_voltage(V: float, p: SvoParams, P: float | None = None) -> float:
    """
    Обратная статическая характеристика Q(V) при заданной активной мощности.

    Args:
        V (float): Действующее напряжение, В.
        p (SvoParams): Параметры осциллятора (sin φ ≠ 0).
        P (float | None): Активная мощность; по умолчанию P0.

    Returns:
        float: Q, вар.
    """
    s = math.sin(p.phi)
    if abs(s) < 1e-12:
        raise ConfigurationError("Q(V) не определена при φ = 0")
    P = p.P0 if P is None else P
    D = 2.0 * p.mu * p.N * V * V * (V * V - p.V0 ** 2) / p.eta
    return p.Q0 - (D - (p.P0 - P) * math.cos(p.phi)) / s


def direct_droop_point(V: float, omega: float, p: SvoParams) -> DroopPoint:
    """
    Мощности осциллятора, непосредственно подключённого к шинам с напряжением V и частотой ω.

    Returns:
        DroopPoint: (P, Q, V, ω), удовлетворяющие обеим статическим характеристикам.
    """
    nv2 = p.N * V * V
    W = (omega - p.omega0) * nv2 / p.eta
    D = 2.0 * p.mu * nv2 * (V * V - p.V0 ** 2) / p.eta
    c, s = math.cos(p.phi), math.sin(p.phi)
    e_P = D * c + W * s
    e_Q = D * s - W * c
    return DroopPoint(p.P0 - e_P, p.Q0 - e_Q, V, omega)


@dataclass(frozen=True)
class DesignReport:
    """
    Результат выбора параметров.

    Attributes:
        eta (float): η, Ом/с.
        mu (float): μ, 1/(В²·с).
        V_max (float): Напряжение при номинальном потреблении реактивной мощности, В.
        V_min (float): Напряжение при номинальной выдаче реактивной мощности, В.
        omega_residual (float): Относительная невязка Δω при V_max и номинальной мощности.
        voltage_residual (float): Относительная невязка V_max по характеристике V(Q).
    """

    eta: float
    mu: float
    V_max: float
    V_min: float
    omega_residual: float
    voltage_residual: float

    def to_frame(self) -> pd.DataFrame:
        """Отчёт в виде таблицы parameter/value."""
        return pd.DataFrame({
            "parameter": ["eta", "mu", "V_max", "V_min", "omega_residual", "voltage_residual"],
            "value": [self.eta, self.mu, self.V_max, self.V_min, self.omega_residual, self.voltage_residual],
        })


def design_report(spec: DesignSpec) -> DesignReport:
    """
    Выбор параметров с проверкой обратной подстановкой.

    V_min соответствует номинальной выдаче реактивной мощности и не равен
    V0 − ΔV_max: статическая характеристика V(Q) несимметрична.

    Raises:
        ConfigurationError: Если требования невыполнимы.
    """
    p = designed_svo(spec)
    r = spec.ratings
    if spec.quadrature:
        active, reactive = r.P_rated, r.Q_rated
        p_shift, q_shift = (lambda x: (-x, 0.0)), (lambda x: (0.0, -x))
    else:
        active, reactive = r.Q_rated, r.P_rated
        p_shift, q_shift = (lambda x: (0.0, x)), (lambda x: (-x, 0.0))
    P, Q = p_shift(active)
    omega = droop_frequency(P, Q, spec.V_max, p)
    omega_res = (abs(omega - r.omega0) - spec.delta_omega_max) / spec.delta_omega_max
    P, Q = q_shift(reactive)
    V_hi = steady_state_voltage(P, Q, p)
    P, Q = q_shift(-reactive)
    try:
        V_lo = steady_state_voltage(P, Q, p)
    except InfeasibleOperatingPointError:
        V_lo = math.nan
    report = DesignReport(p.eta, p.mu, V_hi, V_lo, omega_res, (V_hi - spec.V_max) / spec.V_max)
    logger.debug("Параметры: η = %.6g, μ = %.6g, V_min = %.6g", p.eta, p.mu, V_lo)
    return report


def power_limit_map(spec: DesignSpec, plant: PlantParams | None = None, map_spec: MapSpec | None = None,
                    evi: EviParams | None = None,
                    feedback: FeedbackSide = FeedbackSide.GRID) -> pd.DataFrame:
    """
    Карта мощностей в точке подключения по сетке напряжения и частоты сети.

    В каждом узле решается установившийся режим цепи LCL + сеть совместно со
    статическими характеристиками осциллятора. Без силовой части (plant=None)
    осциллятор подключён к шинам непосредственно, и мощности находятся в
    замкнутой форме. Несошедшиеся узлы помечаются ``converged = False``.

    Args:
        spec (DesignSpec): Требования (η и μ выбираются по ним).
        plant (PlantParams | None): Силовая часть; напряжение и частота сети заменяются узлами сетки.
        map_spec (MapSpec | None): Сетка; по умолчанию 21×21 по ±ΔV_max × ±Δω_max.
        evi (EviParams | None): Виртуальное сопротивление в контуре.
        feedback (FeedbackSide): Сторона измерения тока.

    Returns:
        pd.DataFrame: Колонки V_g (действующее), omega_g, P_poc, Q_poc, converged.
    """
    m = map_spec or MapSpec()
    r = spec.ratings
    p = designed_svo(spec, m.P0, m.Q0)
    dv = m.span * spec.delta_V_max
    dw = m.span * spec.delta_omega_max
    v_grid = np.linspace(r.V0 - dv, r.V0 + dv, m.v_points) if m.v_points > 1 else np.array([r.V0])
    w_grid = np.linspace(r.omega0 - dw, r.omega0 + dw, m.w_points) if m.w_points > 1 else np.array([r.omega0])
    rows = []
    failed = 0
    for V_g in v_grid:
        for w_g in w_grid:
            if plant is None:
                pt = direct_droop_point(float(V_g), float(w_g), p)
                rows.append((V_g, w_g, pt.P, pt.Q, True))
                continue
            node = replace(plant, grid=replace(plant.grid, V_gp=math.sqrt(2.0) * V_g, omega_g=float(w_g)))
            try:
                ss = steady_state_solve(node, p, evi, feedback)
            except ConvergenceError as exc:
                failed += 1
                logger.warning("Узел V_g=%.4g, ω_g=%.6g не сошёлся: %s", V_g, w_g, exc.message)
                rows.append((V_g, w_g, math.nan, math.nan, False))
                continue
            P, Q = ss.network.poc_power(r.N)
            rows.append((V_g, w_g, P, Q, True))
    if failed:
        logger.warning("Не сошлось %d из %d узлов карты", failed, len(rows))
    return pd.DataFrame(rows, columns=["V_g", "omega_g", "P_poc", "Q_poc", "converged"])
