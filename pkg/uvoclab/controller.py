"""
Полный контур управления uVOC, исполняемый раз в период дискретизации.

Порядок шага: однофазное построение β-составляющих → детектор модуля
напряжения → аварийный автомат → уставки (регулятор звена постоянного тока,
поддержка Q в аварии) → предварительная синхронизация → осциллятор → EVI →
OCL → v_c = v − v_zv + v_OL → коэффициент модуляции m.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .core import instantaneous_pq, voltage_floor
from .errors import ConfigurationError
from .fault import FaultConfig, FaultState, fault_fsm_step, ocl_compensation
from .filters import (
    DcRegParams, DelayState, EviParams, FilterState, PresyncParams, QuarterPeriodDelay,
    dc_regulator_filter, dc_regulator_step, evi_filter, evi_step, magnitude_detector,
    presync_filter, presync_step,
)
from .oscillator import OscillatorState, SvoParams, fault_gain, saturated_reference, svo_step
from .record import Event, EventKind, SpaceVector, VscRatings

logger = logging.getLogger(__name__)


class Modulation(str, Enum):
    """Масштабирование коэффициента модуляции: по заданию V*_dc или по измеренному v_dc."""

    REFERENCE = "reference"
    INSTANTANEOUS = "instantaneous"


@dataclass(frozen=True)
class ControllerConfig:
    """
    Конфигурация регулятора.

    Attributes:
        ratings (VscRatings): Номинальные данные (N, f_s, V0).
        svo (SvoParams): Параметры осциллятора и начальные уставки.
        fault (FaultConfig): Параметры прохождения аварий (R_0 уже определён).
        evi (EviParams): Эмулируемое виртуальное сопротивление.
        presync (PresyncParams): Ветвь предварительной синхронизации.
        dcreg (DcRegParams): Регулятор звена постоянного тока (содержит V*_dc).
        modulation (Modulation): Способ масштабирования m.
    """

    ratings: VscRatings
    svo: SvoParams
    fault: FaultConfig = field(default_factory=lambda: FaultConfig(enabled=False))
    evi: EviParams = field(default_factory=EviParams)
    presync: PresyncParams = field(default_factory=PresyncParams)
    dcreg: DcRegParams = field(default_factory=DcRegParams)
    modulation: Modulation = Modulation.REFERENCE

    def __post_init__(self):
        if self.svo.N != self.ratings.N:
            raise ConfigurationError("Число фаз осциллятора и номинальных данных различается",
                                     svo_N=self.svo.N, ratings_N=self.ratings.N)
        if self.fault.enabled and self.fault.R_0 is None:
            raise ConfigurationError("Для аварийного режима требуется R_0")

    @property
    def dt(self) -> float:
        """Период дискретизации регулятора, с."""
        return self.ratings.dt

    @property
    def v_floor(self) -> float:
        """Порог вырожденного напряжения ε_v, В."""
        return voltage_floor(self.ratings.V0)

    @property
    def V_dc_ref(self) -> float:
        """Задание напряжения звена постоянного тока V*_dc, В."""
        return self.dcreg.V_dc_ref

    @property
    def I_m(self) -> float:
        """Предел тока ограничителя, А (бесконечность, если аварийная логика выключена)."""
        return self.fault.I_m if self.fault.enabled else math.inf


@dataclass(frozen=True)
class ControllerState:
    """
    Полное состояние регулятора.

    Attributes:
        osc (OscillatorState): Состояние осциллятора.
        fault (FaultState): Состояние аварийного автомата.
        evi (FilterState): Состояние фильтра EVI.
        presync (FilterState): Состояние фильтра Y_ps.
        dcreg (FilterState): Состояние регулятора звена постоянного тока.
        detector (FilterState | None): Состояние детектора |v_g|; None до первого отсчёта.
        delay (DelayState | None): Буфер задержки на четверть периода (только N = 1).
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
        mu (float): Действующий коэффициент μ.
        presync_on (bool): Включена ли предварительная синхронизация.
        dcreg_on (bool): Формирует ли регулятор звена постоянного тока уставку P0.
    """

    osc: OscillatorState
    fault: FaultState
    evi: FilterState
    presync: FilterState
    dcreg: FilterState
    detector: FilterState | None
    delay: DelayState | None
    P0: float
    Q0: float
    mu: float
    presync_on: bool
    dcreg_on: bool


@dataclass(frozen=True)
class Measurements:
    """
    Измерения на начало периода дискретизации.

    Для N = 1 используются только α-составляющие, β строится задержкой.

    Attributes:
        i (SpaceVector): Ток обратной связи (сеточный или преобразователя), А.
        v_g (SpaceVector): Напряжение сети со стороны коммутатора, В.
        v_dc (float): Напряжение звена постоянного тока, В.
        v_poc (SpaceVector | None): Напряжение в точке подключения для детектора
            аварии; None — детектор использует v_g.
    """

    i: SpaceVector
    v_g: SpaceVector
    v_dc: float
    v_poc: SpaceVector | None = None


@dataclass(frozen=True)
class ControllerOutput:
    """
    Выходы и внутренние сигналы одного шага регулятора.

    Attributes:
        m (SpaceVector): Коэффициент модуляции.
        v (SpaceVector): Напряжение осциллятора в момент измерения, В.
        v_c (SpaceVector): Задание напряжения преобразователя, В.
        i_fb (SpaceVector): Ток обратной связи с учётом i_ps, А.
        i0_sat (SpaceVector): Ограниченное задание тока, А.
        v_zv (SpaceVector): Напряжение EVI, В.
        v_ol (SpaceVector): Компенсация OCL, В.
        i_ps (SpaceVector): Ток предварительной синхронизации, А.
        P (float): Мгновенная активная мощность осциллятора, Вт.
        Q (float): Мгновенная реактивная мощность осциллятора, вар.
        P0 (float): Действующая уставка P0 (вместе с инжекцией), Вт.
        Q0 (float): Действующая уставка Q0, вар.
        vg_mag (float): Отфильтрованный модуль |v_g|, В.
    """

    m: SpaceVector
    v: SpaceVector
    v_c: SpaceVector
    i_fb: SpaceVector
    i0_sat: SpaceVector
    v_zv: SpaceVector
    v_ol: SpaceVector
    i_ps: SpaceVector
    P: float
    Q: float
    P0: float
    Q0: float
    vg_mag: float


def initial_controller_state(cfg: ControllerConfig, v0: SpaceVector,
                             delay_history: np.ndarray | None = None) -> ControllerState:
    """
    Начальное состояние регулятора.

    Args:
        cfg (ControllerConfig): Конфигурация.
        v0 (SpaceVector): Начальное напряжение осциллятора, В.
        delay_history (np.ndarray | None): Предыстория (i_α, v_gα) для однофазной
            задержки формы (length, 2); None — пустой буфер.

    Returns:
        ControllerState: Состояние с нулевыми фильтрами и уставками из ``cfg.svo``.
    """
    dt = cfg.dt
    delay = None
    if cfg.ratings.N == 1:
        delay = QuarterPeriodDelay(cfg.ratings.omega0, dt, channels=2).initial_state(delay_history)
    return ControllerState(
        osc=OscillatorState(v0),
        fault=FaultState(),
        evi=evi_filter(cfg.evi, dt).initial_state(),
        presync=presync_filter(cfg.presync, dt).initial_state(),
        dcreg=dc_regulator_filter(cfg.dcreg, dt).initial_state(),
        detector=None,
        delay=delay,
        P0=cfg.svo.P0,
        Q0=cfg.svo.Q0,
        mu=cfg.svo.mu,
        presync_on=cfg.presync.enabled,
        dcreg_on=cfg.dcreg.enabled,
    )


def _single_phase(state: ControllerState, meas: Measurements, cfg: ControllerConfig):
    delay = QuarterPeriodDelay(cfg.ratings.omega0, cfg.dt, channels=2)
    buffer, (beta, _ready) = delay.step(state.delay, (meas.i.alpha, meas.v_g.alpha))
    i = SpaceVector(meas.i.alpha, float(beta[0]))
    v_g = SpaceVector(meas.v_g.alpha, float(beta[1]))
    return buffer, i, v_g


def controller_step(state: ControllerState, meas: Measurements, cfg: ControllerConfig,
                    dt: float | None = None, p0_offset: float = 0.0) -> tuple[ControllerState, ControllerOutput]:
    """
    Один период дискретизации полного контура uVOC.

    Args:
        state (ControllerState): Текущее состояние.
        meas (Measurements): Измерения на начало периода.
        cfg (ControllerConfig): Конфигурация.
        dt (float | None): Период дискретизации; по умолчанию ``cfg.dt``.
        p0_offset (float): Добавка к уставке P0 в точке суммирования (инжекция возмущения), Вт.

    Returns:
        tuple[ControllerState, ControllerOutput]: Новое состояние и выходы.

    Raises:
        DegenerateVoltageError: Если |v| осциллятора ниже порога.
        NonFiniteStateError: Если состояние осциллятора стало неконечным.
    """
    dt = cfg.dt if dt is None else dt
    N = cfg.ratings.N
    v_floor = cfg.v_floor

    delay = state.delay
    i_meas, v_g = meas.i, meas.v_g
    if N == 1:
        delay, i_meas, v_g = _single_phase(state, meas, cfg)

    detector = magnitude_detector(cfg.fault.detector_bandwidth, dt)
    vg_now = v_g.magnitude() if meas.v_poc is None or N == 1 else meas.v_poc.magnitude()
    det_state = state.detector if state.detector is not None else detector.initial_state(vg_now)
    det_state, vg_filt = detector.step(det_state, vg_now)
    vg_mag = float(vg_filt[0])

    fault = fault_fsm_step(state.fault, i_meas.magnitude(), vg_mag, cfg.fault, dt)

    dcreg = state.dcreg
    P0 = state.P0
    if state.dcreg_on:
        dcreg, P0 = dc_regulator_step(dcreg, meas.v_dc, cfg.dcreg, dt)
    P0 += p0_offset
    Q0 = state.Q0
    if fault.x_f and cfg.fault.q_support:
        Q0 = math.sqrt(max(cfg.ratings.S_rated ** 2 - P0 * P0, 0.0))
    if fault.x_f:
        fault = replace(fault, K_m=fault_gain(P0, Q0, N, cfg.fault.I_m))

    v = state.osc.v
    presync = state.presync
    i_ps = SpaceVector()
    if state.presync_on:
        presync, i_ps = presync_step(presync, v, v_g, cfg.presync, dt)
    i_fb = i_meas + i_ps

    p = replace(cfg.svo, P0=P0, Q0=Q0, mu=state.mu)
    I_m = cfg.I_m
    i0_sat = saturated_reference(v, p, fault, I_m, v_floor)
    osc = svo_step(state.osc, i_fb, p, fault, dt, cfg.fault if cfg.fault.enabled else None, v_floor)

    evi, v_zv = evi_step(state.evi, i_meas, cfg.evi, dt)
    if N == 1:
        v_zv = SpaceVector(v_zv.alpha, 0.0)

    v_ol = SpaceVector()
    if cfg.fault.enabled and fault.x_r > 0.0:
        v_ol = ocl_compensation(i0_sat, i_meas, fault.x_r, cfg.fault.R_0)

    v_c = osc.v - v_zv + v_ol
    scale = cfg.V_dc_ref if cfg.modulation is Modulation.REFERENCE else meas.v_dc
    m = v_c / scale

    P, Q = instantaneous_pq(v, i_fb, N)
    new_state = replace(
        state, osc=osc, fault=fault, evi=evi, presync=presync, dcreg=dcreg,
        detector=det_state, delay=delay,
    )
    out = ControllerOutput(m=m, v=v, v_c=v_c, i_fb=i_fb, i0_sat=i0_sat, v_zv=v_zv, v_ol=v_ol,
                           i_ps=i_ps, P=P, Q=Q, P0=P0, Q0=Q0, vg_mag=vg_mag)
    return new_state, out


def apply_controller_event(state: ControllerState, event: Event, cfg: ControllerConfig) -> ControllerState:
    """
    Применяет событие регулятора (уставки и режимы).

    Args:
        state (ControllerState): Текущее состояние.
        event (Event): Событие с ``kind.targets_plant == False``.
        cfg (ControllerConfig): Конфигурация (для начального состояния фильтров).

    Returns:
        ControllerState: Обновлённое состояние.

    Raises:
        ConfigurationError: Если событие относится к объекту или значение недопустимо.
    """
    kind = event.kind
    if kind is EventKind.SETPOINT_P:
        return replace(state, P0=float(event.value))
    if kind is EventKind.SETPOINT_Q:
        return replace(state, Q0=float(event.value))
    if kind is EventKind.MU:
        if event.value < 0:
            raise ConfigurationError("Коэффициент μ не может быть отрицательным", mu=event.value)
        return replace(state, mu=float(event.value))
    if kind is EventKind.PRESYNC_ON:
        return replace(state, presync_on=True, presync=presync_filter(cfg.presync, cfg.dt).initial_state())
    if kind is EventKind.PRESYNC_OFF:
        return replace(state, presync_on=False)
    if kind is EventKind.DCREG_ON:
        return replace(state, dcreg_on=True)
    if kind is EventKind.DCREG_OFF:
        return replace(state, dcreg_on=False)
    raise ConfigurationError(f"Событие {kind.value} не относится к регулятору", t=event.t)


class UvocController:
    """
    Регулятор uVOC с собственным состоянием.

    Обёртка над чистой функцией :func:`controller_step` для пошагового
    использования вне симулятора.

    Attributes:
        cfg (ControllerConfig): Конфигурация.
        state (ControllerState): Текущее состояние.

    Example:
        >>> ctrl = UvocController(cfg, SpaceVector(cfg.svo.V_p0, 0.0))
        >>> out = ctrl.step(Measurements(i, v_g, 400.0))
        >>> out.m
    """

    def __init__(self, cfg: ControllerConfig, v0: SpaceVector):
        self.cfg = cfg
        self.state = initial_controller_state(cfg, v0)

    def step(self, meas: Measurements) -> ControllerOutput:
        """Выполняет один шаг и сохраняет новое состояние."""
        self.state, out = controller_step(self.state, meas, self.cfg)
        return out

    def apply_event(self, event: Event) -> None:
        """Применяет событие регулятора."""
        self.state = apply_controller_event(self.state, event, self.cfg)
        logger.debug("Событие регулятора %s применено", event.kind.value)
