"""
Прохождение аварий: конечный автомат аварийного режима и компенсация OCL.

Аварийный режим защёлкивается при |i| > I_T. Сброс взводится, когда
отфильтрованный модуль напряжения в точке подключения опускается до V_T,
и происходит при его возврате выше V_T, но не раньше t_hold после защёлкивания.
Если провала напряжения так и не было (бросок тока без просадки), авария
сбрасывается по возврату выше V_T спустя t_release. После сброса компенсация
OCL отключается линейно за время t_f.
"""
import math
from dataclasses import dataclass, replace

from .errors import ConfigurationError
from .record import SpaceVector
from .units import Kind, physical


@dataclass(frozen=True)
class FaultConfig:
    """
    Параметры режима прохождения аварий.

    Attributes:
        enabled (bool): Включена ли логика аварийного режима.
        I_T (float): Порог по току (амплитуда), А.
        V_T (float): Порог по напряжению (амплитуда), В.
        I_m (float): Максимальный ток (амплитуда), А.
        R_0 (float | None): Коэффициент OCL, Ом. None — вычисляется как ω_OCL·(L_a + L_g).
        omega_ocl (float): Желаемая полоса токового контура OCL, рад/с.
        t_f (float): Длительность спада x_r после сброса аварии, с.
        tau_f (float): Постоянная усиления синхронизации в аварии, с.
        q_support (bool): Поднимать Q0 до √(S² − P0²) в аварийном режиме.
        detector_bandwidth (float): Полоса фильтра модуля напряжения, рад/с.
        t_hold (float): Минимальное время удержания аварии после защёлкивания, с.
        t_release (float): Время, после которого авария сбрасывается без провала напряжения, с.
    """

    enabled: bool = True
    I_T: float = physical(Kind.CURRENT, default=math.inf)
    V_T: float = physical(Kind.VOLTAGE, default=0.0)
    I_m: float = physical(Kind.CURRENT, default=math.inf)
    R_0: float | None = physical(Kind.IMPEDANCE, default=None)
    omega_ocl: float = 2 * math.pi * 500
    t_f: float = 0.1
    tau_f: float = 0.028
    q_support: bool = True
    detector_bandwidth: float = 100.0
    t_hold: float = 0.01
    t_release: float = 0.1

    def __post_init__(self):
        if self.I_m > self.I_T:
            raise ConfigurationError("Требуется I_m ≤ I_T", I_m=self.I_m, I_T=self.I_T)
        values = (self.I_T, self.I_m, self.omega_ocl, self.t_f, self.tau_f, self.detector_bandwidth)
        if min(values) <= 0 or self.V_T < 0 or (self.R_0 is not None and self.R_0 < 0):
            raise ConfigurationError("Параметры аварийного режима должны быть положительными")
        if self.t_hold < 0 or self.t_release < self.t_hold:
            raise ConfigurationError("Требуется 0 ≤ t_hold ≤ t_release", t_hold=self.t_hold, t_release=self.t_release)

    def with_default_R0(self, L_total: float) -> "FaultConfig":
        """
        Подставляет R_0 = ω_OCL·(L_a + L_g), если R_0 не задан.

        Args:
            L_total (float): Сумма L_a + L_g, Гн.

        Returns:
            FaultConfig: Конфигурация с определённым R_0.
        """
        if self.R_0 is not None:
            return self
        return replace(self, R_0=self.omega_ocl * L_total)

    @property
    def gain_boost(self) -> float:
        """Отношение η_f/η = 1 + R_0/τ_f в аварийном режиме."""
        return 1.0 + (self.R_0 or 0.0) / self.tau_f


@dataclass(frozen=True)
class FaultState:
    """
    Состояние автомата аварийного режима.

    Attributes:
        x_f (int): Флаг аварии, 0 или 1.
        x_r (float): Вес компенсации OCL, 0…1.
        ramp_clock (float): Время от сброса аварии, с.
        K_m (float): Коэффициент насыщения тока, А/В (действует при x_f = 1).
        latch_clock (float): Время с момента защёлкивания аварии, с.
        armed (bool): Наблюдался ли провал напряжения до V_T за время аварии.
    """

    x_f: int = 0
    x_r: float = 0.0
    ramp_clock: float = 0.0
    K_m: float = 0.0
    latch_clock: float = 0.0
    armed: bool = False

    def eta_gain(self, cfg: FaultConfig | None) -> float:
        """
        Множитель η_f/η для текущего состояния.

        Args:
            cfg (FaultConfig | None): Конфигурация; None — усиление отсутствует.

        Returns:
            float: 1 + x_f·R_0/τ_f.
        """
        if cfg is None or not self.x_f:
            return 1.0
        return cfg.gain_boost


def fault_fsm_step(state: FaultState, i_mag: float, vg_mag: float, cfg: FaultConfig, dt: float) -> FaultState:
    """
    Один шаг автомата аварийного режима.

    Пока авария защёлкнута, считается время удержания и запоминается провал
    |v_g| ≤ V_T; сброс возможен только при |v_g| > V_T.

    Args:
        state (FaultState): Текущее состояние.
        i_mag (float): Мгновенный модуль тока |i|, А.
        vg_mag (float): Отфильтрованный модуль напряжения |v_g|, В.
        cfg (FaultConfig): Пороговые значения.
        dt (float): Период дискретизации, с.

    Returns:
        FaultState: Новое состояние.

    Raises:
        ValueError: Если dt ≤ 0.
    """
    if dt <= 0:
        raise ValueError("Шаг автомата должен быть положительным")
    if not cfg.enabled:
        return state
    if state.x_f == 0 and i_mag > cfg.I_T:
        return FaultState(1, 1.0, 0.0, state.K_m, latch_clock=0.0, armed=vg_mag <= cfg.V_T)
    if state.x_f == 1:
        clock = state.latch_clock + dt
        armed = state.armed or vg_mag <= cfg.V_T
        if vg_mag > cfg.V_T and clock >= cfg.t_hold and (armed or clock >= cfg.t_release):
            return FaultState(0, 1.0, 0.0, state.K_m)
        return replace(state, latch_clock=clock, armed=armed)
    if state.x_r > 0.0:
        clock = state.ramp_clock + dt
        return FaultState(0, max(0.0, 1.0 - clock / cfg.t_f), clock, state.K_m)
    return state


def ocl_compensation(i0_sat: SpaceVector, i_fb: SpaceVector, x_r: float, R_0: float) -> SpaceVector:
    """
    Последовательная компенсация ограничения тока v_OL = x_r·R_0·(i0_sat − i).

    Args:
        i0_sat (SpaceVector): Ограниченное задание тока, А.
        i_fb (SpaceVector): Измеренный ток, А.
        x_r (float): Вес компенсации.
        R_0 (float): Коэффициент OCL, Ом.

    Returns:
        SpaceVector: Добавка к напряжению v_OL, В.
    """
    k = x_r * R_0
    return SpaceVector(k * (i0_sat.alpha - i_fb.alpha), k * (i0_sat.beta - i_fb.beta))
