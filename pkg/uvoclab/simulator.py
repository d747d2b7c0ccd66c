"""
Детерминированное моделирование с фиксированным шагом: силовая часть
интегрируется RK4 с шагом 1/(f_s·substeps), регулятор исполняется раз в
период 1/f_s, его выход удерживается до следующего периода.

Модуль также извлекает установившиеся величины из записи и измеряет
частотные характеристики многотональной инжекцией в уставку P0.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from .controller import (
    ControllerState, Measurements, Modulation, apply_controller_event, controller_step,
    initial_controller_state,
)
from .core import instantaneous_pq
from .errors import NotSettledError, UvocError, WindowTooShortError
from .filters import FeedbackSide, QuarterPeriodDelay
from .plant import (
    PlantParams, PlantState, apply_event, grid_measurement, plant_rk4_step, poc_voltage,
    power_scale, steady_state_solve, stiff_node,
)
from .record import Event, SpaceVector
from .scenario import InitialMode, Scenario

logger = logging.getLogger(__name__)

TRACE_COLUMNS = (
    "t", "v_alpha", "v_beta", "ia_alpha", "ia_beta", "ig_alpha", "ig_beta", "vf_alpha", "vf_beta",
    "v_dc", "P", "Q", "V_p", "omega", "x_f", "x_r", "P0", "i_ps_mag",
)
EXTRA_COLUMNS = ("P_poc", "Q_poc", "vg_mag", "Q0", "p0_injection")


@dataclass
class Trace:
    """
    Запись моделирования с постоянным шагом.

    Attributes:
        frame (pd.DataFrame): Колонки :data:`TRACE_COLUMNS` и :data:`EXTRA_COLUMNS`.
        omega0 (float): Номинальная частота сценария, рад/с.
        events (list[str]): Журнал применённых событий и переходов аварийного режима.
        name (str): Имя сценария.
    """

    frame: pd.DataFrame
    omega0: float
    events: list[str] = field(default_factory=list)
    name: str = ""

    @property
    def t(self) -> np.ndarray:
        """Моменты записи, с."""
        return self.frame["t"].to_numpy()

    def to_csv(self, path: str | Path, extras: bool = False) -> None:
        """
        Сохраняет запись в CSV с фиксированным порядком колонок.

        Вещественные числа записываются кратчайшим представлением, однозначно
        восстанавливающим значение.

        Args:
            path (str | Path): Путь к файлу.
            extras (bool): Добавить колонки :data:`EXTRA_COLUMNS`.
        """
        columns = list(TRACE_COLUMNS) + (list(EXTRA_COLUMNS) if extras else [])
        self.frame[columns].to_csv(path, index=False)

    def fault_intervals(self) -> list[tuple[float, float | None]]:
        """
        Интервалы аварийного режима по колонке x_f.

        Returns:
            list[tuple[float, float | None]]: (вход, выход); None — авария не снята до конца записи.
        """
        x_f = self.frame["x_f"].to_numpy()
        t = self.t
        out = []
        start = None
        for k in range(len(x_f)):
            if x_f[k] and start is None:
                start = t[k]
            elif not x_f[k] and start is not None:
                out.append((start, t[k]))
                start = None
        if start is not None:
            out.append((start, None))
        return out


@dataclass(frozen=True)
class InitialStates:
    """Начальные состояния силовой части и регулятора."""

    plant: PlantState
    controller: ControllerState


def _plant_vector(z: complex, N: int) -> SpaceVector:
    return SpaceVector(z.real, 0.0 if N == 1 else z.imag)


def initial_states(s: Scenario) -> InitialStates:
    """
    Начальные состояния по режиму ``s.initial.mode``.

    * ``steady_state`` — решение цепи и осциллятора на основной частоте,
      повёрнутое на θ0 (при включённом регуляторе звена постоянного тока
      уставка P0 принимается нулевой). Для N = 1 буфер четвертьпериодной
      задержки заполняется предысторией установившегося режима.
    * ``grid_aligned`` — токи нулевые, конденсатор и осциллятор совпадают с источником.
    * ``zero`` — нулевые токи и напряжения, осциллятор на номинальной амплитуде.

    Raises:
        ConfigurationError: ``steady_state`` при разомкнутом STS.
        ConvergenceError: Если установившийся режим не найден.
    """
    cfg = s.controller
    p = s.plant
    N = p.N
    rot = cmath.exp(1j * s.initial.theta0)
    v_dc = s.V_dc0
    mode = s.initial.mode
    history = None
    if mode is InitialMode.STEADY_STATE:
        svo = cfg.svo.with_setpoints(0.0, cfg.svo.Q0) if cfg.dcreg.enabled else cfg.svo
        k_mod = v_dc / cfg.V_dc_ref if cfg.modulation is Modulation.REFERENCE else 1.0
        ss = steady_state_solve(p, svo, cfg.evi, cfg.evi.feedback_side, k_mod=k_mod)
        net = ss.network
        v0 = SpaceVector.from_complex(ss.v * rot)
        plant = PlantState(_plant_vector(net.I_a * rot, N), _plant_vector(net.I_g * rot, N),
                           _plant_vector(net.V_f * rot, N), v_dc, s.initial.theta0)
        if N == 1:
            delay = QuarterPeriodDelay(s.ratings.omega0, cfg.dt, channels=2)
            tau = delay.history_times()
            ph = np.exp(1j * net.omega * tau) * rot
            I = net.I_g if cfg.evi.feedback_side is FeedbackSide.GRID else net.I_a
            history = np.column_stack([(I * ph).real, (net.V_poc * ph).real])
        logger.debug("Начальный установившийся режим: |v| = %.6g, P = %.6g, Q = %.6g", abs(ss.v), ss.P, ss.Q)
    elif mode is InitialMode.GRID_ALIGNED:
        v_src = p.grid.V_gp * rot
        v0 = SpaceVector.from_complex(v_src)
        plant = PlantState(SpaceVector(), SpaceVector(), _plant_vector(v_src, N), v_dc, s.initial.theta0)
    else:
        v0 = SpaceVector.from_complex(s.ratings.V_p0 * rot)
        plant = PlantState(SpaceVector(), SpaceVector(), SpaceVector(), v_dc, s.initial.theta0)
    return InitialStates(plant, initial_controller_state(cfg, v0, history))


def _measurements(state: PlantState, p: PlantParams, feedback: FeedbackSide) -> Measurements:
    i = state.i_g if feedback is FeedbackSide.GRID else state.i_a
    return Measurements(i, grid_measurement(state, p), state.v_dc, poc_voltage(state, p))


def _describe(event: Event) -> str:
    if event.value is None:
        return f"t={event.t:.6g} {event.kind.value}"
    return f"t={event.t:.6g} {event.kind.value} {event.value:.6g}"


class Simulator:
    """
    Совместное моделирование силовой части и регулятора по сценарию.

    Attributes:
        scenario (Scenario): Сценарий.
        injection (Callable[[float], float] | None): Добавка к уставке P0, Вт, как функция времени.
    """

    def __init__(self, scenario: Scenario, injection: Callable[[float], float] | None = None):
        self.scenario = scenario
        self.injection = injection

    def run(self) -> Trace:
        """
        Выполняет сценарий.

        Returns:
            Trace: Запись с шагом decimation·dt_control.

        Raises:
            NonFiniteStateError: Если состояние стало неконечным (с моментом и переменной).
            DcBusCollapseError: Если v_dc упало ниже 1 В.
            DegenerateVoltageError: Если напряжение осциллятора выродилось.
        """
        s = self.scenario
        cfg = s.controller
        dt_c, dt_p = s.dt_control, s.dt_plant
        n_ctrl = int(round(s.duration / dt_c))
        n_plant = n_ctrl * s.substeps
        plant = s.plant
        init = initial_states(s)
        state, ctrl = init.plant, init.controller
        N = plant.N
        feedback = cfg.evi.feedback_side
        inject = self.injection

        schedule: dict[int, list[Event]] = {}
        for e in s.events:
            k = int(round(e.t / dt_p))
            if k >= n_plant:
                logger.debug("Событие %s вне интервала моделирования", _describe(e))
                continue
            schedule.setdefault(k, []).append(e)

        logger.info("Сценарий %s: %.4g с, шаг регулятора %.3g с, шаг силовой части %.3g с",
                    s.name, s.duration, dt_c, dt_p)
        log: list[str] = []
        rows = []
        v_a = SpaceVector()
        x_f = ctrl.fault.x_f
        kc = 0
        for kp in range(n_plant):
            t = kp * dt_p
            for e in schedule.get(kp, ()):
                if e.kind.targets_plant:
                    plant = apply_event(plant, e)
                    if stiff_node(plant, dt_p):
                        logger.info("Узел фильтра при t = %.6g с интегрируется квазистатически", t)
                    if not plant.sts_closed:
                        state = replace(state, i_g=SpaceVector())
                else:
                    ctrl = apply_controller_event(ctrl, e, cfg)
                log.append(_describe(e))
                logger.info("Событие %s", _describe(e))

            if kp % s.substeps == 0:
                u = inject(t) if inject is not None else 0.0
                try:
                    ctrl_new, out = controller_step(ctrl, _measurements(state, plant, feedback), cfg, dt_c, u)
                except UvocError as exc:
                    exc.context.setdefault("t", t)
                    raise
                omega = cmath.phase(ctrl_new.osc.v.as_complex() / out.v.as_complex()) / dt_c
                ctrl = ctrl_new
                v_a = out.m * state.v_dc
                if ctrl.fault.x_f != x_f:
                    x_f = ctrl.fault.x_f
                    msg = f"t={t:.6g} fault_{'enter' if x_f else 'exit'}"
                    log.append(msg)
                    logger.info("Аварийный режим %s при t = %.6g с", "включён" if x_f else "снят", t)
                if kc % s.decimation == 0:
                    v_poc = poc_voltage(state, plant)
                    if N == 3:
                        P_poc, Q_poc = instantaneous_pq(v_poc, state.i_g, N)
                    else:
                        P_poc, Q_poc = power_scale(N) * v_poc.alpha * state.i_g.alpha, math.nan
                    rows.append((
                        t, out.v.alpha, out.v.beta, state.i_a.alpha, state.i_a.beta,
                        state.i_g.alpha, state.i_g.beta, state.v_f.alpha, state.v_f.beta,
                        state.v_dc, out.P, out.Q, out.v.magnitude(), omega,
                        ctrl.fault.x_f, ctrl.fault.x_r, out.P0, out.i_ps.magnitude(),
                        P_poc, Q_poc, out.vg_mag, out.Q0, u,
                    ))
                kc += 1

            state = plant_rk4_step(state, v_a, plant, dt_p, t)

        frame = pd.DataFrame(rows, columns=list(TRACE_COLUMNS) + list(EXTRA_COLUMNS))
        logger.info("Сценарий %s завершён: %d записей, %d событий", s.name, len(frame), len(log))
        return Trace(frame, s.ratings.omega0, log, s.name)


def run_scenario(s: Scenario, injection: Callable[[float], float] | None = None) -> Trace:
    """
    Выполняет сценарий моделирования.

    Args:
        s (Scenario): Сценарий.
        injection (Callable[[float], float] | None): Добавка к P0 как функция времени, Вт.

    Returns:
        Trace: Запись моделирования.
    """
    return Simulator(s, injection).run()


# --- установившиеся величины ------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateSummary:
    """
    Усреднённые установившиеся величины.

    Attributes:
        P (float): Активная мощность осциллятора, Вт.
        Q (float): Реактивная мощность осциллятора, вар.
        V_p (float): Амплитуда напряжения осциллятора, В.
        omega (float): Частота по регрессии фазы, рад/с.
        v_dc (float): Напряжение звена постоянного тока, В.
        P_poc (float): Активная мощность в точке подключения, Вт.
        Q_poc (float): Реактивная мощность в точке подключения, вар.
        cycles (int): Число усреднённых периодов.
    """

    P: float
    Q: float
    V_p: float
    omega: float
    v_dc: float
    P_poc: float = math.nan
    Q_poc: float = math.nan
    cycles: int = 0

    @property
    def V(self) -> float:
        """Действующее напряжение V_p/√2, В."""
        return self.V_p / math.sqrt(2.0)

    def as_dict(self) -> dict[str, float]:
        """Величины в виде словаря (для сводных таблиц)."""
        return {"P": self.P, "Q": self.Q, "V_p": self.V_p, "omega": self.omega, "v_dc": self.v_dc,
                "P_poc": self.P_poc, "Q_poc": self.Q_poc}


def steady_state_extract(tr: Trace, window: float, t_end: float | None = None) -> SteadyStateSummary:
    """
    Усреднение по целому числу периодов основной частоты в конце записи.

    Args:
        tr (Trace): Запись.
        window (float): Длина окна, с.
        t_end (float | None): Конец окна; по умолчанию последний отсчёт.

    Returns:
        SteadyStateSummary: Средние P, Q, V_p, v_dc и частота по наклону
        развёрнутой фазы напряжения осциллятора.

    Raises:
        WindowTooShortError: Если окно короче двух периодов или выходит за запись.
    """
    period = 2.0 * math.pi / tr.omega0
    if window < 2.0 * period:
        raise WindowTooShortError("Окно усреднения короче двух периодов", window=window, period=period)
    f = tr.frame
    t = f["t"].to_numpy()
    if len(t) < 2:
        raise WindowTooShortError("Запись слишком короткая", samples=len(t))
    dt = t[1] - t[0]
    end = t[-1] + dt if t_end is None else t_end
    cycles = int(math.floor(window / period + 1e-9))
    start = end - cycles * period
    if start < t[0] - 0.5 * dt:
        raise WindowTooShortError("Окно усреднения выходит за начало записи", start=start, t0=t[0])
    mask = (t >= start - 0.5 * dt) & (t < end - 0.5 * dt)
    w = f[mask]
    if len(w) < 4:
        raise WindowTooShortError("В окне слишком мало отсчётов", samples=len(w))
    theta = np.unwrap(np.arctan2(w["v_beta"].to_numpy(), w["v_alpha"].to_numpy()))
    omega = float(np.polyfit(w["t"].to_numpy(), theta, 1)[0])
    logger.debug("Окно %.4g–%.4g с: %d периодов, %d отсчётов", start, end, cycles, len(w))
    extra = {}
    for name in ("P_poc", "Q_poc"):
        if name in w:
            extra[name] = float(w[name].mean())
    return SteadyStateSummary(
        P=float(w["P"].mean()), Q=float(w["Q"].mean()), V_p=float(w["V_p"].mean()),
        omega=omega, v_dc=float(w["v_dc"].mean()), cycles=cycles, **extra,
    )


# --- частотные характеристики --------------------------------------------------------

@dataclass(frozen=True)
class Multitone:
    """
    Многотональный сигнал Σ A·cos(2π f_k (t − t0) + φ_k), нулевой до t0.

    Attributes:
        freqs (tuple[float, ...]): Частоты тонов, Гц.
        amplitude (float): Амплитуда каждого тона.
        phases (tuple[float, ...]): Начальные фазы, рад.
        t0 (float): Момент начала, с.
    """

    freqs: tuple[float, ...]
    amplitude: float
    phases: tuple[float, ...]
    t0: float = 0.0

    def __call__(self, t: float) -> float:
        if t < self.t0:
            return 0.0
        tau = t - self.t0
        return self.amplitude * sum(math.cos(2.0 * math.pi * f * tau + ph)
                                    for f, ph in zip(self.freqs, self.phases))


def tone_frequencies(f_min: float, f_max: float, tones: int, T: float) -> np.ndarray:
    """
    Частоты тонов, попадающие точно в отсчёты ДПФ окна длины T.

    Номера отсчётов n_k = round(f_k·T) для логарифмической сетки, без повторов.

    Returns:
        np.ndarray: Частоты n_k/T, Гц.
    """
    n = np.unique(np.maximum(1, np.round(np.geomspace(f_min, f_max, tones) * T).astype(int)))
    return n / T


def multitone(freqs: Sequence[float], amplitude: float, phases: str = "schroeder", seed: int = 0,
              t0: float = 0.0) -> Multitone:
    """
    Многотональный возмущающий сигнал.

    Args:
        freqs (Sequence[float]): Частоты, Гц.
        amplitude (float): Амплитуда тона.
        phases (str): ``schroeder`` — φ_k = −πk(k−1)/K (малый пик-фактор),
            ``random`` — равномерные по seed.
        seed (int): Зерно для случайных фаз.
        t0 (float): Момент начала, с.
    """
    K = len(freqs)
    if phases == "schroeder":
        k = np.arange(1, K + 1)
        ph = -math.pi * k * (k - 1) / K
    else:
        ph = np.random.default_rng(seed).uniform(-math.pi, math.pi, K)
    return Multitone(tuple(float(f) for f in freqs), float(amplitude), tuple(float(x) for x in ph), t0)


def identify_response(t: np.ndarray, u: np.ndarray, y: np.ndarray, freqs: Sequence[float]) -> np.ndarray:
    """
    Комплексный коэффициент передачи Y(f)/U(f) проекцией на один отсчёт ДПФ.

    Окно должно содержать целое число периодов каждой частоты.

    Args:
        t (np.ndarray): Моменты отсчётов, с.
        u (np.ndarray): Вход.
        y (np.ndarray): Выход.
        freqs (Sequence[float]): Частоты, Гц.

    Returns:
        np.ndarray: Комплексные коэффициенты передачи.
    """
    t = np.asarray(t, float)
    u = np.asarray(u, float) - np.mean(u)
    y = np.asarray(y, float) - np.mean(y)
    out = np.empty(len(freqs), complex)
    for k, f in enumerate(freqs):
        e = np.exp(-2j * math.pi * f * t)
        out[k] = np.dot(y, e) / np.dot(u, e)
    return out


@dataclass(frozen=True)
class FrequencyResponse:
    """
    Измеренная частотная характеристика.

    Attributes:
        freqs (np.ndarray): Частоты, Гц.
        response (np.ndarray): Комплексные значения.
        output (str): ``loop`` или ``v_dc``.
    """

    freqs: np.ndarray
    response: np.ndarray
    output: str = "loop"

    @property
    def omega(self) -> np.ndarray:
        """Угловые частоты, рад/с."""
        return 2.0 * math.pi * np.asarray(self.freqs)

    def to_frame(self) -> pd.DataFrame:
        """Таблица omega, mag_db, phase_deg."""
        h = np.asarray(self.response)
        return pd.DataFrame({
            "omega": self.omega,
            "mag_db": 20.0 * np.log10(np.abs(h)),
            "phase_deg": np.degrees(np.angle(h)),
        })


def _check_settled(tr: Trace, t_settle: float, tol: float) -> None:
    f = tr.frame
    t = f["t"].to_numpy()
    mask = (t >= max(t_settle - 0.25, 0.0)) & (t < t_settle)
    if mask.sum() < 2:
        raise NotSettledError("Нет отсчётов для проверки установления", t_settle=t_settle)
    for name in ("v_dc", "V_p"):
        x = f.loc[mask, name].to_numpy()
        ref = max(abs(float(np.mean(x))), 1e-12)
        drift = float(np.max(x) - np.min(x)) / ref
        logger.debug("Установление %s: относительный дрейф %.3e", name, drift)
        if drift > tol:
            raise NotSettledError("Рабочая точка не установилась перед инжекцией",
                                  variable=name, drift=drift, tolerance=tol)


def measure_frequency_response(s: Scenario, freqs: Sequence[float] | None = None) -> FrequencyResponse:
    """
    Измерение частотной характеристики многотональной инжекцией в уставку P0.

    Сценарий моделируется settle секунд без возмущения, затем сигнал подаётся
    в точку суммирования P0. Первый период многотонального сигнала отбрасывается,
    второй используется для проекции на отсчёты ДПФ.

    * ``loop``: L = −R/E, где E — суммарная уставка P0, R — выход регулятора
      звена постоянного тока (E минус инжекция);
    * ``v_dc``: Δv_dc/(−ΔP0).

    Args:
        s (Scenario): Сценарий; параметры берутся из ``s.analysis``.
        freqs (Sequence[float] | None): Частоты, Гц; по умолчанию логарифмическая сетка,
            округлённая до отсчётов ДПФ окна.

    Returns:
        FrequencyResponse: Частоты и комплексные значения.

    Raises:
        NotSettledError: Если v_dc или |v| дрейфуют перед инжекцией больше ``drift_tol``.
    """
    a = s.analysis
    T = a.measure
    f = tone_frequencies(a.f_min, a.f_max, a.tones, T) if freqs is None else np.asarray(freqs, float)
    signal = multitone(f, a.amplitude * s.ratings.P_rated, a.phases, s.seed, a.settle)
    run = replace(s, duration=a.settle + 2.0 * T, decimation=1)
    tr = run_scenario(run, signal)
    _check_settled(tr, a.settle, a.drift_tol)
    frame = tr.frame
    t = frame["t"].to_numpy()
    dt = s.dt_control
    mask = (t >= a.settle + T - 0.5 * dt) & (t < a.settle + 2.0 * T - 0.5 * dt)
    tw = t[mask]
    E = frame.loc[mask, "P0"].to_numpy()
    if a.output == "loop":
        R = E - frame.loc[mask, "p0_injection"].to_numpy()
        h = -identify_response(tw, E, R, f)
    else:
        h = identify_response(tw, -E, frame.loc[mask, "v_dc"].to_numpy(), f)
    logger.info("Частотная характеристика %s: %d частот", a.output, len(f))
    return FrequencyResponse(np.asarray(f), h, a.output)
