"""
Дискретные линейные блоки регулятора uVOC.

* эмулируемое виртуальное сопротивление (EVI): ограниченная по полосе ветвь
  R_vir + sL_vir и банк резонансных звеньев на гармониках;
* фильтр предварительной синхронизации Y_ps = 1/(sL_ps + R_ps);
* регулятор напряжения звена постоянного тока (ПИ + опережающее звено);
* задержка на четверть периода для однофазного режима;
* фильтр нижних частот детектора модуля напряжения.

Непрерывные передаточные функции переводятся в дискретные билинейным
преобразованием :func:`scipy.signal.bilinear` с предыскажением частоты на
резонансной частоте или частоте среза; отсчёты фильтруются
:func:`scipy.signal.lfilter` с явным состоянием ``zi``.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import signal

from .abstract import DiscreteBlock
from .errors import ConfigurationError
from .record import SpaceVector
from .units import Kind, physical

Section = tuple[np.ndarray, np.ndarray]
FilterState = tuple[np.ndarray, ...]


def bilinear_section(num: Sequence[float], den: Sequence[float], dt: float,
                     omega_match: float | None = None) -> Section:
    """
    Билинейное преобразование с необязательным предыскажением частоты.

    Args:
        num (Sequence[float]): Числитель H(s) по убыванию степеней s. Ведущие нули
            отбрасываются.
        den (Sequence[float]): Знаменатель H(s).
        dt (float): Период дискретизации, с.
        omega_match (float | None): Частота, на которой дискретная характеристика
            совпадает с непрерывной. None — без предыскажения.

    Returns:
        tuple[np.ndarray, np.ndarray]: Коэффициенты (b, a) с a[0] = 1.
    """
    if omega_match is None or omega_match <= 0:
        fs = 1.0 / dt
    else:
        fs = omega_match / (2.0 * math.tan(0.5 * omega_match * dt))
    num = np.trim_zeros(np.asarray(num, float), "f")
    if num.size == 0:
        num = np.zeros(1)
    b, a = signal.bilinear(num, np.trim_zeros(np.asarray(den, float), "f"), fs=fs)
    return np.atleast_1d(b), np.atleast_1d(a)


class LinearFilter(DiscreteBlock[FilterState]):
    """
    Параллельное соединение дискретных звеньев, применяемое к каждому каналу.

    Выход равен сумме выходов всех звеньев. Для вектора αβ используются два
    канала, для скалярных сигналов — один.

    Attributes:
        sections (tuple[tuple[np.ndarray, np.ndarray], ...]): Коэффициенты (b, a) звеньев.
        channels (int): Число независимых каналов.
    """

    def __init__(self, sections: Sequence[Section], dt: float, channels: int = 2):
        super().__init__(dt)
        if not sections:
            raise ValueError("Фильтр должен содержать хотя бы одно звено")
        self.sections = tuple((np.asarray(b, float), np.asarray(a, float)) for b, a in sections)
        self.channels = channels

    def _order(self, b: np.ndarray, a: np.ndarray) -> int:
        return max(len(a), len(b)) - 1

    def initial_state(self, x0: Sequence[float] | float | None = None) -> FilterState:
        """
        Нулевое состояние или установившееся состояние для постоянного входа x0.

        Args:
            x0: Постоянный входной сигнал по каналам. Для звеньев с полюсом
                в z = 1 (интеграторов) допустимо только None.

        Returns:
            tuple[np.ndarray, ...]: Массивы ``zi`` формы (channels, порядок) по звеньям.
        """
        if x0 is None:
            return tuple(np.zeros((self.channels, self._order(b, a))) for b, a in self.sections)
        x0 = np.broadcast_to(np.asarray(x0, float), (self.channels,))
        return tuple(np.outer(x0, signal.lfilter_zi(b, a)) for b, a in self.sections)

    def step(self, state: FilterState, x: Sequence[float] | float) -> tuple[FilterState, np.ndarray]:
        """
        Один отсчёт фильтра.

        Args:
            state (tuple[np.ndarray, ...]): Текущее состояние звеньев.
            x: Входной отсчёт по каналам.

        Returns:
            tuple: Новое состояние и выход (np.ndarray формы (channels,)).
        """
        xk = np.broadcast_to(np.asarray(x, float), (self.channels,)).reshape(self.channels, 1)
        y = np.zeros(self.channels)
        new_state = []
        for (b, a), zi in zip(self.sections, state):
            yk, zf = signal.lfilter(b, a, xk, axis=1, zi=zi)
            y += yk[:, 0]
            new_state.append(zf)
        return tuple(new_state), y

    def frequency_response(self, omega: np.ndarray) -> np.ndarray:
        """
        Суммарная частотная характеристика звеньев на частотах ω, рад/с.
        """
        w = np.asarray(omega, float) * self.dt
        h = np.zeros(w.shape, complex)
        for b, a in self.sections:
            h += signal.freqz(b, a, worN=w)[1]
        return h


# --- эмулируемое виртуальное сопротивление -------------------------------------

class FeedbackSide(str, Enum):
    """Точка измерения тока обратной связи."""

    GRID = "grid"
    CONVERTER = "converter"


@dataclass(frozen=True)
class ResonantTerm:
    """
    Резонансное звено EVI на гармонике h.

    Attributes:
        h (int): Номер гармоники.
        K_h (float): Сопротивление на резонансной частоте, Ом.
        omega_B (float): Полоса звена, рад/с.
    """

    h: int
    K_h: float = physical(Kind.IMPEDANCE)
    omega_B: float = 10.0


@dataclass(frozen=True)
class EviParams:
    """
    Параметры эмулируемого виртуального сопротивления Z_v(s).

    Attributes:
        R_vir (float): Виртуальное сопротивление, Ом.
        L_vir (float): Ограниченная по полосе виртуальная индуктивность, Гн.
        omega_c (float): Полоса ветви R_vir + sL_vir, рад/с.
        resonant (tuple[ResonantTerm, ...]): Банк резонансных звеньев.
        feedback_side (FeedbackSide): Сторона измерения тока, определяет форму резонансных звеньев.
        omega0 (float): Основная частота, ω_h = h·ω0.
    """

    R_vir: float = physical(Kind.IMPEDANCE, default=0.0)
    L_vir: float = physical(Kind.INDUCTANCE, default=0.0)
    omega_c: float = 1200.0
    resonant: tuple[ResonantTerm, ...] = ()
    feedback_side: FeedbackSide = FeedbackSide.GRID
    omega0: float = 2 * math.pi * 60

    def __post_init__(self):
        if self.R_vir < 0 or self.L_vir < 0:
            raise ConfigurationError("R_vir и L_vir должны быть неотрицательными")
        if self.omega_c <= 0:
            raise ConfigurationError("Полоса omega_c должна быть положительной")
        for term in self.resonant:
            if term.h < 1 or term.K_h < 0 or term.omega_B <= 0:
                raise ConfigurationError("Некорректное резонансное звено EVI", h=term.h)

    def omega_h(self, term: ResonantTerm) -> float:
        """Резонансная частота звена h·ω0, рад/с."""
        return term.h * self.omega0

    def continuous_sections(self) -> list[tuple[list[float], list[float], float]]:
        """
        Непрерывные звенья Z_v(s) вместе с частотой согласования.

        Returns:
            list: Тройки (числитель, знаменатель, частота предыскажения).
        """
        out = [([self.L_vir, self.R_vir], [1.0 / self.omega_c, 1.0], self.omega_c)]
        for term in self.resonant:
            wh = self.omega_h(term)
            den = [1.0, term.omega_B, wh * wh]
            if self.feedback_side is FeedbackSide.GRID:
                num = [-term.K_h * term.omega_B * wh]
            else:
                num = [term.K_h * term.omega_B, 0.0]
            out.append((num, den, wh))
        return out

    def impedance(self, s: complex) -> complex:
        """
        Непрерывное значение Z_v(s).

        Args:
            s (complex): Комплексная частота.

        Returns:
            complex: Значение виртуального сопротивления, Ом.
        """
        return sum(np.polyval(num, s) / np.polyval(den, s) for num, den, _ in self.continuous_sections())


@lru_cache(maxsize=64)
def evi_filter(p: EviParams, dt: float) -> LinearFilter:
    """
    Дискретный фильтр EVI (кэшируется по параметрам и шагу).
    """
    sections = [bilinear_section(num, den, dt, w) for num, den, w in p.continuous_sections()]
    return LinearFilter(sections, dt, channels=2)


def evi_step(state: FilterState, i_fb: SpaceVector, p: EviParams, dt: float) -> tuple[FilterState, SpaceVector]:
    """
    Один шаг EVI: напряжение на виртуальном сопротивлении v_zv = Z_v(s)·i.

    Args:
        state (FilterState): Состояние фильтра (из ``evi_filter(p, dt).initial_state()``).
        i_fb (SpaceVector): Измеренный ток, А.
        p (EviParams): Параметры EVI.
        dt (float): Период дискретизации, с.

    Returns:
        tuple[FilterState, SpaceVector]: Новое состояние и v_zv, В.
    """
    state, y = evi_filter(p, dt).step(state, (i_fb.alpha, i_fb.beta))
    return state, SpaceVector(float(y[0]), float(y[1]))


# --- предварительная синхронизация ------------------------------------------------

@dataclass(frozen=True)
class PresyncParams:
    """
    Виртуальная RL-ветвь предварительной синхронизации.

    Attributes:
        L_ps (float): Индуктивность, Гн.
        R_ps (float): Сопротивление, Ом.
        enabled (bool): Включён ли контур.
    """

    L_ps: float = physical(Kind.INDUCTANCE, default=1.5e-3)
    R_ps: float = physical(Kind.IMPEDANCE, default=0.21)
    enabled: bool = False

    def __post_init__(self):
        if self.L_ps <= 0 or self.R_ps <= 0:
            raise ConfigurationError("L_ps и R_ps должны быть положительными")


@lru_cache(maxsize=16)
def presync_filter(p: PresyncParams, dt: float) -> LinearFilter:
    """Дискретная проводимость Y_ps = 1/(sL_ps + R_ps)."""
    return LinearFilter([bilinear_section([1.0], [p.L_ps, p.R_ps], dt)], dt, channels=2)


def presync_step(state: FilterState, v: SpaceVector, v_g: SpaceVector, p: PresyncParams,
                 dt: float) -> tuple[FilterState, SpaceVector]:
    """
    Виртуальный ток синхронизации i_ps = Y_ps(s)·(v − v_g).

    Args:
        state (FilterState): Состояние фильтра.
        v (SpaceVector): Напряжение генератора, В.
        v_g (SpaceVector): Напряжение сети за коммутатором, В.
        p (PresyncParams): Параметры ветви.
        dt (float): Период дискретизации, с.

    Returns:
        tuple[FilterState, SpaceVector]: Новое состояние и i_ps, А.
    """
    dv = v - v_g
    state, y = presync_filter(p, dt).step(state, (dv.alpha, dv.beta))
    return state, SpaceVector(float(y[0]), float(y[1]))


# --- регулятор звена постоянного тока ---------------------------------------------

@dataclass(frozen=True)
class DcRegParams:
    """
    Регулятор напряжения звена постоянного тока F_dc(s).

    F_dc(s) = K_pdc·(1 + 1/(sT_i))·√(ω_p/ω_z)·(s + ω_z)/(s + ω_p)

    Attributes:
        K_pdc (float): Пропорциональный коэффициент, Вт/В.
        T_i (float): Постоянная интегрирования, с.
        omega_z (float): Нуль опережающего звена, рад/с.
        omega_p (float): Полюс опережающего звена, рад/с.
        V_dc_ref (float): Задание напряжения V*_dc, В.
        enabled (bool): Формирует ли регулятор уставку P0.
    """

    K_pdc: float = 75.0
    T_i: float = 0.4
    omega_z: float = 5 * math.pi
    omega_p: float = 30 * math.pi
    V_dc_ref: float = 400.0
    enabled: bool = False

    def __post_init__(self):
        if min(self.K_pdc, self.T_i, self.omega_z, self.omega_p, self.V_dc_ref) <= 0:
            raise ConfigurationError("Параметры регулятора звена постоянного тока должны быть положительными")
        if self.omega_z >= self.omega_p:
            raise ConfigurationError("Опережающее звено требует omega_z < omega_p",
                                     omega_z=self.omega_z, omega_p=self.omega_p)

    def transfer_function(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Числитель и знаменатель F_dc(s) по убыванию степеней s.
        """
        k = self.K_pdc * math.sqrt(self.omega_p / self.omega_z)
        num = k * np.polymul([self.T_i, 1.0], [1.0, self.omega_z])
        den = np.polymul([self.T_i, 0.0], [1.0, self.omega_p])
        return num, den


@lru_cache(maxsize=16)
def dc_regulator_filter(p: DcRegParams, dt: float) -> LinearFilter:
    """Дискретный регулятор F_dc (билинейное преобразование без предыскажения)."""
    num, den = p.transfer_function()
    return LinearFilter([bilinear_section(num, den, dt)], dt, channels=1)


def dc_regulator_step(state: FilterState, v_dc: float, p: DcRegParams, dt: float) -> tuple[FilterState, float]:
    """
    Один шаг регулятора: P0 = −F_dc(s)·(V*_dc − v_dc).

    Рост P0 забирает мощность из звена постоянного тока, поэтому при
    v_dc < V*_dc регулятор уменьшает P0 и направляет мощность в звено.

    Returns:
        tuple[FilterState, float]: Новое состояние и уставка P0, Вт.
    """
    state, y = dc_regulator_filter(p, dt).step(state, v_dc - p.V_dc_ref)
    return state, float(y[0])


# --- однофазный режим -------------------------------------------------------------

def single_phase_beta(history: np.ndarray, omega0: float, dt: float) -> tuple[float, bool]:
    """
    Составляющая β однофазного сигнала: x_α(t − T0/4) с линейной интерполяцией.

    Args:
        history (np.ndarray): Отсчёты x_α, последний — текущий.
        omega0 (float): Основная частота, рад/с.
        dt (float): Период дискретизации, с.

    Returns:
        tuple[float, bool]: Задержанное значение и признак готовности. Пока
        история короче четверти периода, возвращается (0.0, False).
    """
    delay = 0.5 * math.pi / omega0 / dt
    k0 = int(math.floor(delay))
    frac = delay - k0
    if len(history) < k0 + 2:
        return 0.0, False
    newer = history[-1 - k0]
    older = history[-2 - k0]
    return float((1.0 - frac) * newer + frac * older), True


@dataclass(frozen=True)
class DelayState:
    """
    Состояние линии задержки.

    Attributes:
        buffer (np.ndarray): Последние отсчёты формы (длина, каналы), последний — текущий.
        count (int): Число принятых отсчётов (до заполнения буфера).
    """

    buffer: np.ndarray
    count: int = 0


class QuarterPeriodDelay(DiscreteBlock[DelayState]):
    """
    Задержка на четверть периода основной частоты для нескольких каналов.

    Attributes:
        omega0 (float): Основная частота, рад/с.
        channels (int): Число задерживаемых сигналов.
        length (int): Длина буфера в отсчётах.
    """

    def __init__(self, omega0: float, dt: float, channels: int = 1):
        super().__init__(dt)
        self.omega0 = omega0
        self.channels = channels
        self.length = int(math.floor(0.5 * math.pi / omega0 / dt)) + 2

    def initial_state(self, x0=None) -> DelayState:
        """
        Пустой буфер или буфер, заполненный предысторией.

        Args:
            x0: Предыстория формы (length, channels) в моменты :meth:`history_times`.
        """
        if x0 is None:
            return DelayState(np.zeros((self.length, self.channels)), 0)
        history = np.asarray(x0, float).reshape(self.length, self.channels)
        return DelayState(history.copy(), self.length)

    def history_times(self) -> np.ndarray:
        """Моменты отсчётов предыстории относительно первого шага, с (< 0)."""
        return -self.dt * np.arange(self.length, 0, -1)

    def step(self, state: DelayState, x) -> tuple[DelayState, tuple[np.ndarray, bool]]:
        """
        Принимает новый отсчёт и возвращает задержанные значения.

        Returns:
            tuple: Новое состояние и пара (значения по каналам, готовность).
        """
        buffer = np.empty_like(state.buffer)
        buffer[:-1] = state.buffer[1:]
        buffer[-1] = x
        count = min(state.count + 1, self.length)
        out = np.zeros(self.channels)
        ready = False
        for ch in range(self.channels):
            out[ch], ready = single_phase_beta(buffer[self.length - count:, ch], self.omega0, self.dt)
        return DelayState(buffer, count), (out, ready)


@lru_cache(maxsize=16)
def magnitude_detector(bandwidth: float, dt: float) -> LinearFilter:
    """Фильтр нижних частот первого порядка ω_b/(s + ω_b) для модуля напряжения."""
    return LinearFilter([bilinear_section([bandwidth], [1.0, bandwidth], dt)], dt, channels=1)
