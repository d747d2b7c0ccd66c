"""
Малосигнальная модель преобразователя с uVOC в синхронной системе координат.

Состояние x = [I_d, I_q, V, θ_s, v_dc] (токи и напряжение — действующие
значения, система координат вращается с частотой сети ω* и совмещена с v_g),
вход u = [P0, Q0]. Ёмкость фильтра, задержка регулятора и ШИМ не учитываются;
R_e и L_e — суммарные сопротивление (включая R_vir) и индуктивность контура.

Модуль решает равновесие, строит аналитический якобиан (A, B) для
нормального и аварийного режимов, вычисляет полюса, передаточные функции,
частотную характеристику контура регулирования звена постоянного тока и
запасы устойчивости.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from .controller import ControllerConfig, Modulation
from .errors import (
    ConfigurationError, ConvergenceError, InfeasibleOperatingPointError, NoCrossoverError,
    PoleEvaluationError,
)
from .filters import DcRegParams
from .oscillator import SvoParams
from .scenario import Scenario

logger = logging.getLogger(__name__)

STATE_NAMES = ("I_d", "I_q", "V", "theta_s", "v_dc")
INPUT_NAMES = ("P0", "Q0")


@dataclass(frozen=True)
class SmallSignalParams:
    """
    Параметры малосигнальной модели.

    Attributes:
        R_e (float): Суммарное последовательное сопротивление, Ом.
        L_e (float): Суммарная индуктивность L_a + L_g + L_N, Гн.
        C_dc (float): Ёмкость звена постоянного тока, Ф.
        V_dc_ref (float): Задание V*_dc, В.
        svo (SvoParams): Параметры осциллятора.
        instantaneous (bool): Модуляция по измеренному v_dc (k_v = 1), иначе k_v = v_dc/V*_dc.
    """

    R_e: float
    L_e: float
    C_dc: float
    V_dc_ref: float
    svo: SvoParams
    instantaneous: bool = False

    def __post_init__(self):
        if not self.L_e > 0:
            raise ConfigurationError("Требуется L_e > 0", L_e=self.L_e)
        if self.R_e < 0 or not self.C_dc > 0 or not self.V_dc_ref > 0:
            raise ConfigurationError("Недопустимые параметры малосигнальной модели")

    @classmethod
    def from_scenario(cls, s: Scenario, R_vir: float | None = None) -> "SmallSignalParams":
        """
        Параметры из сценария.

        R_e = R_vir + r_a + r_g + R_N, L_e = L_a + L_g + L_N + L_vir.

        Args:
            s (Scenario): Сценарий.
            R_vir (float | None): Замена виртуального сопротивления, Ом.
        """
        p, cfg = s.plant, s.controller
        r_vir = cfg.evi.R_vir if R_vir is None else R_vir
        return cls(
            R_e=r_vir + p.r_a + p.r_g + p.grid.R_N,
            L_e=p.L_a + p.L_g + p.grid.L_N + cfg.evi.L_vir,
            C_dc=p.C_dc,
            V_dc_ref=cfg.V_dc_ref,
            svo=cfg.svo,
            instantaneous=cfg.modulation is Modulation.INSTANTANEOUS,
        )


@dataclass(frozen=True)
class GridCondition:
    """
    Режим сети.

    Attributes:
        V_g (float): Действующее фазное напряжение сети, В.
        omega_star (float): Частота сети ω*, рад/с.
    """

    V_g: float
    omega_star: float

    @classmethod
    def from_scenario(cls, s: Scenario) -> "GridCondition":
        """Напряжение и частота источника сети сценария."""
        return cls(s.plant.grid.V_gp / math.sqrt(2.0), s.plant.grid.omega_g)


@dataclass(frozen=True)
class FaultMode:
    """
    Аварийный режим: ограниченное задание тока и компенсация OCL.

    Уставки осциллятора заменяются на K_m·V·P0 и K_m·V·Q0, к R_e добавляется R_0,
    в уравнения тока — R_0·i_0,sat; коррекция амплитуды отключена.

    Attributes:
        K_m (float): N·I_m/√(2(P0² + Q0²)), 1/В.
        R_0 (float): Коэффициент OCL, Ом.
        eta_gain (float): Отношение η_f/η.
    """

    K_m: float
    R_0: float
    eta_gain: float = 1.0

    @classmethod
    def from_config(cls, cfg: ControllerConfig, P0: float, Q0: float) -> "FaultMode":
        """
        Аварийный режим по конфигурации регулятора и уставкам.

        Raises:
            ConfigurationError: Если аварийный режим выключен или P0 = Q0 = 0.
        """
        f = cfg.fault
        if not f.enabled or f.R_0 is None:
            raise ConfigurationError("Аварийный режим не настроен в сценарии")
        S0 = math.hypot(P0, Q0)
        if S0 == 0.0:
            raise ConfigurationError("Для аварийного режима нужны ненулевые уставки P0, Q0")
        return cls(cfg.ratings.N * f.I_m / (math.sqrt(2.0) * S0), f.R_0, f.gain_boost)


def fault_setpoints(cfg: ControllerConfig) -> tuple[float, float]:
    """Уставки в аварийном режиме: Q0 поднимается до √(S² − P0²) при поддержке Q."""
    P0, Q0 = cfg.svo.P0, cfg.svo.Q0
    if cfg.fault.q_support:
        Q0 = math.sqrt(max(cfg.ratings.S_rated ** 2 - P0 * P0, 0.0))
    return P0, Q0


@dataclass(frozen=True)
class OperatingPoint:
    """
    Рабочая точка (равновесие) малосигнальной модели.

    Attributes:
        I_d (float): Ток по оси d, А (действующее).
        I_q (float): Ток по оси q, А (действующее).
        V (float): Действующее напряжение осциллятора, В.
        theta_s (float): Угол осциллятора относительно сети, рад.
        v_dc (float): Напряжение звена постоянного тока, В.
        omega_star (float): Частота сети, рад/с.
        V_g (float): Действующее напряжение сети, В.
        P0 (float): Уставка P0, Вт.
        Q0 (float): Уставка Q0, вар.
        P_dc (float): Мощность источника звена постоянного тока, равная P в равновесии, Вт.
        residual (float): Нормированная невязка равновесия.
    """

    I_d: float
    I_q: float
    V: float
    theta_s: float
    v_dc: float
    omega_star: float
    V_g: float
    P0: float = 0.0
    Q0: float = 0.0
    P_dc: float = 0.0
    residual: float = 0.0

    @property
    def state(self) -> np.ndarray:
        """Вектор состояния [I_d, I_q, V, θ_s, v_dc]."""
        return np.array([self.I_d, self.I_q, self.V, self.theta_s, self.v_dc])

    @property
    def inputs(self) -> np.ndarray:
        """Вектор входов [P0, Q0]."""
        return np.array([self.P0, self.Q0])

    @property
    def grid(self) -> GridCondition:
        return GridCondition(self.V_g, self.omega_star)

    @property
    def xi(self) -> tuple[float, float]:
        """(ξ1, ξ2) = (I_d cosθ_s + I_q sinθ_s, I_d sinθ_s − I_q cosθ_s)."""
        c, s = math.cos(self.theta_s), math.sin(self.theta_s)
        return self.I_d * c + self.I_q * s, self.I_d * s - self.I_q * c

    def to_frame(self) -> pd.DataFrame:
        """Таблица quantity/value."""
        names = ["I_d", "I_q", "V", "theta_s", "v_dc", "omega_star", "V_g", "P0", "Q0", "P_dc", "residual"]
        return pd.DataFrame({"quantity": names, "value": [getattr(self, n) for n in names]})


def _coefficients(p: SmallSignalParams, mode: FaultMode | None):
    svo = p.svo
    if mode is None:
        return svo.eta, svo.mu, p.R_e, 0.0, 0.0
    return svo.eta * mode.eta_gain, 0.0, p.R_e + mode.R_0, mode.R_0, mode.K_m


def model_rhs(x: Sequence[float], u: Sequence[float], p: SmallSignalParams, grid: GridCondition,
              mode: FaultMode | None = None, P_dc: float = 0.0) -> np.ndarray:
    """
    Правые части нелинейной модели F(x, u).

    Args:
        x (Sequence[float]): [I_d, I_q, V, θ_s, v_dc].
        u (Sequence[float]): [P0, Q0].
        p (SmallSignalParams): Параметры.
        grid (GridCondition): Режим сети.
        mode (FaultMode | None): Аварийный режим; None — нормальный.
        P_dc (float): Мощность источника звена постоянного тока, Вт.

    Returns:
        np.ndarray: Производные состояния.
    """
    I_d, I_q, V, th, v = x
    P0, Q0 = u
    svo = p.svo
    N, L = svo.N, p.L_e
    eta, mu, R, R0, K_m = _coefficients(p, mode)
    k = 1.0 if p.instantaneous else v / p.V_dc_ref
    c, s = math.cos(th), math.sin(th)
    xi1 = I_d * c + I_q * s
    xi2 = I_d * s - I_q * c
    P = N * V * k * xi1
    Q = N * V * k * xi2
    g = K_m * V if mode is not None else 1.0
    e_P = g * P0 - P
    e_Q = g * Q0 - Q
    cp, sp = math.cos(svo.phi), math.sin(svo.phi)
    D = e_P * cp + e_Q * sp
    W = e_P * sp - e_Q * cp
    ff = R0 * K_m / N
    w = grid.omega_star
    return np.array([
        (-R * I_d + w * L * I_q + k * V * c - grid.V_g + ff * (P0 * c + Q0 * s)) / L,
        (-w * L * I_d - R * I_q + k * V * s + ff * (P0 * s - Q0 * c)) / L,
        2.0 * mu * V * (svo.V0 ** 2 - V * V) + eta / (N * V) * D,
        svo.omega0 - w + eta / (N * V * V) * W,
        P_dc / (p.C_dc * v) - N * V * k * xi1 / (p.C_dc * v),
    ])


def jacobian(x: Sequence[float], u: Sequence[float], p: SmallSignalParams, grid: GridCondition,
             mode: FaultMode | None = None, P_dc: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """
    Аналитические производные ∂F/∂x (5×5) и ∂F/∂u (5×2).

    При φ = π/2 и φ = 0 совпадают с известными матрицами модели; для
    промежуточных φ получаются той же подстановкой. Строка звена постоянного
    тока содержит −P_dc/(C_dc v_dc²) на диагонали (ноль без нагрузки звена).
    """
    I_d, I_q, V, th, v = x
    P0, Q0 = u
    svo = p.svo
    N, L, C = svo.N, p.L_e, p.C_dc
    eta, mu, R, R0, K_m = _coefficients(p, mode)
    fault = mode is not None
    k = 1.0 if p.instantaneous else v / p.V_dc_ref
    dk = 0.0 if p.instantaneous else 1.0 / p.V_dc_ref
    c, s = math.cos(th), math.sin(th)
    xi1 = I_d * c + I_q * s
    xi2 = I_d * s - I_q * c
    cp, sp = math.cos(svo.phi), math.sin(svo.phi)
    ff = R0 * K_m / N
    w = grid.omega_star

    # производные P и Q по [I_d, I_q, V, θ_s, v_dc]
    dP = np.array([N * V * k * c, N * V * k * s, N * k * xi1, -N * V * k * xi2, N * V * dk * xi1])
    dQ = np.array([N * V * k * s, -N * V * k * c, N * k * xi2, N * V * k * xi1, N * V * dk * xi2])
    g = K_m * V if fault else 1.0
    dPe = np.array([0.0, 0.0, K_m * P0 if fault else 0.0, 0.0, 0.0])
    dQe = np.array([0.0, 0.0, K_m * Q0 if fault else 0.0, 0.0, 0.0])
    P = N * V * k * xi1
    Q = N * V * k * xi2
    e_P, e_Q = g * P0 - P, g * Q0 - Q
    D = e_P * cp + e_Q * sp
    W = e_P * sp - e_Q * cp
    dD = (dPe - dP) * cp + (dQe - dQ) * sp
    dW = (dPe - dP) * sp - (dQe - dQ) * cp

    A = np.zeros((5, 5))
    A[0] = [-R / L, w, k * c / L, (-k * V * s + ff * (-P0 * s + Q0 * c)) / L, V * dk * c / L]
    A[1] = [-w, -R / L, k * s / L, (k * V * c + ff * (P0 * c + Q0 * s)) / L, V * dk * s / L]
    A[2] = eta / (N * V) * dD
    A[2, 2] += 2.0 * mu * (svo.V0 ** 2 - 3.0 * V * V) - eta * D / (N * V * V)
    A[3] = eta / (N * V * V) * dW
    A[3, 2] -= 2.0 * eta * W / (N * V ** 3)
    A[4] = -dP / (C * v)
    A[4, 4] = -P_dc / (C * v * v) + N * V * k * xi1 / (C * v * v) - N * V * dk * xi1 / (C * v)

    B = np.zeros((5, 2))
    B[0] = [ff * c / L, ff * s / L]
    B[1] = [ff * s / L, -ff * c / L]
    B[2] = [eta * g * cp / (N * V), eta * g * sp / (N * V)]
    B[3] = [eta * g * sp / (N * V * V), -eta * g * cp / (N * V * V)]
    return A, B


def _scales(p: SmallSignalParams, grid: GridCondition) -> np.ndarray:
    V0 = p.svo.V0
    return np.array([V0 / p.L_e, V0 / p.L_e, p.svo.omega0 * V0, p.svo.omega0, p.V_dc_ref * p.svo.omega0])


def _initial_magnitude(p: SmallSignalParams, grid: GridCondition, mode: FaultMode | None) -> float:
    svo = p.svo
    if mode is not None or svo.mu <= 0.0:
        return grid.V_g if grid.V_g > 0 else svo.V0
    return svo.V0


def equilibrium_solve(p: SmallSignalParams, grid: GridCondition, mode: FaultMode | None = None,
                      P0: float | None = None, Q0: float | None = None, v_dc: float | None = None,
                      tol: float = 1e-10, max_iter: int = 50) -> OperatingPoint:
    """
    Равновесие нелинейной модели методом Ньютона с уменьшением шага.

    Неизвестные — I_d, I_q, V, θ_s; v_dc фиксируется (по умолчанию V*_dc),
    а мощность источника звена постоянного тока P_dc принимается равной P,
    что обращает в ноль производную v_dc. Невязка нормируется на естественные
    масштабы строк (V0/L_e для токов, ω0·V0 для V, ω0 для θ_s).

    Args:
        p (SmallSignalParams): Параметры.
        grid (GridCondition): Режим сети.
        mode (FaultMode | None): Аварийный режим.
        P0 (float | None): Уставка P0; по умолчанию из осциллятора.
        Q0 (float | None): Уставка Q0; по умолчанию из осциллятора.
        v_dc (float | None): Напряжение звена постоянного тока.
        tol (float): Допуск нормированной невязки.
        max_iter (int): Максимум итераций.

    Returns:
        OperatingPoint: Равновесие.

    Raises:
        ConvergenceError: Если итерации не сошлись (с последней невязкой).
    """
    P0 = p.svo.P0 if P0 is None else P0
    Q0 = p.svo.Q0 if Q0 is None else Q0
    v_dc = p.V_dc_ref if v_dc is None else v_dc
    u = np.array([P0, Q0])
    scale = _scales(p, grid)[:4]

    def residual(y: np.ndarray) -> np.ndarray:
        return model_rhs([*y, v_dc], u, p, grid, mode)[:4] / scale

    # токи из уравнений контура при заданных V и θ_s
    V = _initial_magnitude(p, grid, mode)
    y = np.array([0.0, 0.0, V, 0.0])
    r = residual(y)
    norm = float(np.max(np.abs(r)))
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        J = jacobian([*y, v_dc], u, p, grid, mode)[0][:4, :4] / scale[:, None]
        try:
            step = linalg.solve(J, -r)
        except (linalg.LinAlgError, ValueError) as exc:
            raise ConvergenceError("Вырожденный якобиан равновесия", residual=norm, iterations=it) from exc
        alpha = 1.0
        while True:
            y_new = y + alpha * step
            if y_new[2] <= 0.0:
                y_new[2] = 0.5 * y[2]
            r_new = residual(y_new)
            norm_new = float(np.max(np.abs(r_new)))
            if norm_new < norm or alpha < 1.0 / 256:
                break
            alpha *= 0.5
        y, r, norm = y_new, r_new, norm_new
        logger.debug("Равновесие: итерация %d, невязка %.3e", it, norm)
    if not norm <= tol:
        raise ConvergenceError("Равновесие малосигнальной модели не найдено", residual=norm, iterations=it)
    I_d, I_q, V, th = y
    th = math.atan2(math.sin(th), math.cos(th))
    k = 1.0 if p.instantaneous else v_dc / p.V_dc_ref
    P = p.svo.N * V * k * (I_d * math.cos(th) + I_q * math.sin(th))
    return OperatingPoint(I_d, I_q, V, th, v_dc, grid.omega_star, grid.V_g, P0, Q0, P, norm)


@dataclass(frozen=True)
class LinearModel:
    """
    Линеаризованная модель ẋ = A x + B u с разбиением по звену постоянного тока.

    Attributes:
        A (np.ndarray): Матрица 5×5.
        B (np.ndarray): Матрица 5×2.
        op (OperatingPoint | None): Рабочая точка.
    """

    A: np.ndarray
    B: np.ndarray
    op: OperatingPoint | None = None

    @property
    def A11(self) -> np.ndarray:
        return self.A[:4, :4]

    @property
    def A12(self) -> np.ndarray:
        return self.A[:4, 4:]

    @property
    def A21(self) -> np.ndarray:
        return self.A[4:, :4]

    @property
    def A22(self) -> np.ndarray:
        return self.A[4:, 4:]

    @property
    def B11(self) -> np.ndarray:
        return self.B[:4, :]

    @property
    def B21(self) -> np.ndarray:
        return self.B[4:, :]

    @classmethod
    def from_blocks(cls, A11, A12, A21, A22, B11, B21, op: OperatingPoint | None = None) -> "LinearModel":
        """Собирает модель из блоков."""
        A = np.block([[np.asarray(A11), np.asarray(A12)], [np.asarray(A21), np.asarray(A22)]])
        B = np.vstack([np.asarray(B11), np.asarray(B21)])
        return cls(A, B, op)

    def to_frames(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        """Матрицы A и B как таблицы с именами состояний и входов."""
        A = pd.DataFrame(self.A, index=list(STATE_NAMES), columns=list(STATE_NAMES))
        B = pd.DataFrame(self.B, index=list(STATE_NAMES), columns=list(INPUT_NAMES))
        return A, B


def linearize(op: OperatingPoint, p: SmallSignalParams, mode: FaultMode | None = None,
              tol: float = 1e-8) -> LinearModel:
    """
    Линеаризация в рабочей точке.

    Args:
        op (OperatingPoint): Равновесие.
        p (SmallSignalParams): Параметры.
        mode (FaultMode | None): Аварийный режим.
        tol (float): Допуск нормированной невязки равновесия.

    Returns:
        LinearModel: Матрицы A и B.

    Raises:
        InfeasibleOperatingPointError: Если точка не является равновесием.
    """
    grid = op.grid
    f = model_rhs(op.state, op.inputs, p, grid, mode, op.P_dc) / _scales(p, grid)
    res = float(np.max(np.abs(f)))
    if res > tol:
        raise InfeasibleOperatingPointError("Точка не является равновесием", residual=res)
    A, B = jacobian(op.state, op.inputs, p, grid, mode, op.P_dc)
    return LinearModel(A, B, op)


def eigenvalues(m: LinearModel | np.ndarray, block: str = "A11") -> np.ndarray:
    """
    Собственные значения, упорядоченные по убыванию вещественной, затем мнимой части.

    Args:
        m (LinearModel | np.ndarray): Модель или квадратная матрица.
        block (str): ``A11`` (без звена постоянного тока) или ``A`` для модели.

    Returns:
        np.ndarray: Комплексный спектр.
    """
    if isinstance(m, LinearModel):
        M = m.A11 if block == "A11" else m.A
    else:
        M = np.asarray(m, float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigurationError("Требуется квадратная матрица", shape=M.shape)
    lam = linalg.eigvals(M)
    order = np.lexsort((-lam.imag, -lam.real))
    return lam[order]


def _index(name: str | int, names: tuple[str, ...]) -> int:
    if isinstance(name, int):
        if not 0 <= name < len(names):
            raise ConfigurationError(f"Индекс {name} вне диапазона")
        return name
    if name not in names:
        raise ConfigurationError(f"Неизвестное имя {name!r}; допустимо: {', '.join(names)}")
    return names.index(name)


class TransferFunction:
    """
    Передаточная функция G(s) = sign·c (sI − A)⁻¹ b, вычисляемая решением линейной системы.

    Attributes:
        A (np.ndarray): Матрица состояния.
        b (np.ndarray): Столбец входа.
        c (np.ndarray): Строка выхода.
        sign (float): Множитель (−1 для G_OL = Δv_dc/(−ΔP0)).
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, sign: float = 1.0):
        self.A = np.asarray(A, float)
        self.b = np.asarray(b, float).reshape(-1)
        self.c = np.asarray(c, float).reshape(-1)
        self.sign = sign
        self.poles = linalg.eigvals(self.A)

    def __call__(self, s: complex) -> complex:
        """
        Значение G(s).

        Raises:
            PoleEvaluationError: Если s совпадает с собственным значением A.
        """
        s = complex(s)
        if np.min(np.abs(self.poles - s)) <= 1e-12 * max(1.0, abs(s)):
            raise PoleEvaluationError("Вычисление передаточной функции в полюсе", s=s)
        M = s * np.eye(len(self.A)) - self.A
        try:
            x = linalg.solve(M, self.b.astype(complex))
        except linalg.LinAlgError as exc:
            raise PoleEvaluationError("Вычисление передаточной функции в полюсе", s=s) from exc
        return complex(self.sign * np.dot(self.c, x))

    def frequency_response(self, omega: np.ndarray) -> np.ndarray:
        """Значения G(jω) на массиве частот."""
        return np.array([self(1j * w) for w in np.asarray(omega, float)])


def transfer_function(m: LinearModel, output: str | int = "v_dc", input: str | int = "P0",
                      sign: float = 1.0) -> TransferFunction:
    """
    Передаточная функция от входа ``input`` к состоянию ``output``.

    Args:
        m (LinearModel): Модель.
        output (str | int): Имя или индекс состояния.
        input (str | int): ``P0``/``Q0`` или индекс входа.
        sign (float): Множитель.
    """
    i = _index(output, STATE_NAMES)
    j = _index(input, INPUT_NAMES)
    c = np.zeros(5)
    c[i] = 1.0
    return TransferFunction(m.A, m.B[:, j], c, sign)


def open_loop_dc(m: LinearModel) -> TransferFunction:
    """Разомкнутая характеристика G_OL(s) = Δv_dc/(−ΔP0)."""
    return transfer_function(m, "v_dc", "P0", sign=-1.0)


def dc_compensator(p: DcRegParams, s: complex) -> complex:
    """Значение F_dc(s) регулятора звена постоянного тока."""
    num, den = p.transfer_function()
    return complex(np.polyval(num, s) / np.polyval(den, s))


def dc_compensator_response(p: DcRegParams, omega: Sequence[float]) -> np.ndarray:
    """
    F_dc(jω) = K_pdc(1 + 1/(jωT_i))·√(ω_p/ω_z)·(jω + ω_z)/(jω + ω_p).

    Args:
        p (DcRegParams): Параметры регулятора.
        omega (Sequence[float]): Частоты ω > 0, рад/с.
    """
    w = np.asarray(omega, float)
    if np.any(w <= 0):
        raise ConfigurationError("Частоты должны быть положительными")
    jw = 1j * w
    return (p.K_pdc * (1.0 + 1.0 / (jw * p.T_i)) * math.sqrt(p.omega_p / p.omega_z)
            * (jw + p.omega_z) / (jw + p.omega_p))


def dc_loop_gain(m: LinearModel, p: DcRegParams) -> Callable[[complex], complex]:
    """Контурное усиление L(s) = F_dc(s)·G_OL(s)."""
    g = open_loop_dc(m)

    def loop(s: complex) -> complex:
        return dc_compensator(p, s) * g(s)

    return loop


def bode(loop: Callable[[complex], complex], omega: Sequence[float]) -> pd.DataFrame:
    """
    Логарифмические характеристики.

    Returns:
        pd.DataFrame: Колонки omega, mag_db, phase_deg (фаза развёрнута).
    """
    w = np.asarray(omega, float)
    h = np.array([loop(1j * x) for x in w])
    return pd.DataFrame({
        "omega": w,
        "mag_db": 20.0 * np.log10(np.abs(h)),
        "phase_deg": np.degrees(np.unwrap(np.angle(h))),
    })


@dataclass(frozen=True)
class MarginReport:
    """
    Запасы устойчивости.

    Attributes:
        gain_crossover_rad_s (float): Частота среза |L| = 1, рад/с.
        phase_margin_deg (float): Запас по фазе, град.
        phase_crossover_rad_s (float): Частота arg L = −180°, рад/с (NaN, если нет).
        gain_margin_db (float): Запас по амплитуде, дБ (inf, если нет пересечения фазы).
        gain_crossovers (tuple[float, ...]): Все найденные частоты среза.
        phase_crossovers (tuple[float, ...]): Все найденные частоты пересечения −180°.
    """

    gain_crossover_rad_s: float
    phase_margin_deg: float
    phase_crossover_rad_s: float
    gain_margin_db: float
    gain_crossovers: tuple[float, ...] = ()
    phase_crossovers: tuple[float, ...] = ()

    def lines(self) -> list[str]:
        """Строки отчёта ``имя: значение``."""
        return [
            f"gain_crossover_rad_s: {self.gain_crossover_rad_s:.6g}",
            f"gain_margin_db: {self.gain_margin_db:.6g}",
            f"phase_margin_deg: {self.phase_margin_deg:.6g}",
            f"phase_crossover_rad_s: {self.phase_crossover_rad_s:.6g}",
        ]


def _bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    fa = f(a)
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _phase_margin(h: complex) -> float:
    pm = 180.0 + math.degrees(math.atan2(h.imag, h.real))
    return pm - 360.0 if pm > 180.0 else pm


def margins(loop: Callable[[complex], complex], w_min: float = 0.1, w_max: float = 1e4,
            points: int = 4000, tol: float = 1e-6) -> MarginReport:
    """
    Запасы устойчивости по контурному усилению.

    Частоты среза находятся сканированием по логарифмической сетке и
    уточняются бисекцией |L(jω)| = 1 до ``tol`` рад/с; частоты пересечения
    фазы −180° — бисекцией Im L = 0 при Re L < 0. При нескольких пересечениях
    сообщаются наименьшие запасы.

    Args:
        loop (Callable[[complex], complex]): L(s).
        w_min (float): Нижняя граница поиска, рад/с.
        w_max (float): Верхняя граница поиска, рад/с.
        points (int): Число точек сканирования.
        tol (float): Точность бисекции, рад/с.

    Returns:
        MarginReport: Запасы.

    Raises:
        NoCrossoverError: Если в диапазоне нет частоты среза.
    """
    w = np.geomspace(w_min, w_max, points)
    h = np.array([loop(1j * x) for x in w])
    mag = np.log(np.abs(h))

    def log_mag(x: float) -> float:
        return math.log(abs(loop(1j * x)))

    def imag(x: float) -> float:
        return loop(1j * x).imag

    gc = []
    for k in np.nonzero(np.sign(mag[:-1]) != np.sign(mag[1:]))[0]:
        gc.append(_bisect(log_mag, w[k], w[k + 1], tol))
    if not gc:
        raise NoCrossoverError("Нет частоты среза в диапазоне", w_min=w_min, w_max=w_max)
    pc = []
    for k in np.nonzero(np.sign(h.imag[:-1]) != np.sign(h.imag[1:]))[0]:
        if h.real[k] < 0 and h.real[k + 1] < 0:
            pc.append(_bisect(imag, w[k], w[k + 1], tol))

    pms = [_phase_margin(loop(1j * x)) for x in gc]
    i = int(np.argmin(pms))
    if pc:
        gms = [-20.0 * math.log10(abs(loop(1j * x))) for x in pc]
        j = int(np.argmin(gms))
        w_pc, gm = pc[j], gms[j]
    else:
        w_pc, gm = math.nan, math.inf
    logger.debug("Частоты среза: %s; пересечения фазы: %s", gc, pc)
    return MarginReport(gc[i], pms[i], w_pc, gm, tuple(gc), tuple(pc))
