"""
Пространственно-векторный осциллятор (SVO) и формирование задания тока.

Состояние осциллятора — вектор напряжения v, который интегрируется по закону

    dv/dt = jω0·v + (1 − x_f)·μ·(V_p0² − |v|²)·v + η_f·(i0_sat − i)·e^{jφ},

где i0_sat — задание тока после кругового ограничителя (в нормальном режиме)
или насыщенное задание аварийного режима. При μ = 0 осциллятор работает как
сетевой ведомый (GFL), при μ > 0 — как сетеобразующий (GFM).
"""
import cmath
import math
from dataclasses import dataclass, replace

from .errors import ConfigurationError, DegenerateVoltageError, NonFiniteStateError
from .fault import FaultConfig, FaultState
from .record import SpaceVector
from .units import Kind, physical


@dataclass(frozen=True)
class SvoParams:
    """
    Параметры осциллятора.

    Attributes:
        eta (float): Коэффициент синхронизации η, Ом/с.
        mu (float): Коэффициент коррекции амплитуды μ, 1/(В²·с). μ = 0 — режим GFL.
        phi (float): Угол поворота обратной связи φ ∈ [0, π/2], рад.
        omega0 (float): Номинальная частота, рад/с.
        V_p0 (float): Номинальная амплитуда напряжения, В.
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
        N (int): Число фаз.
    """

    eta: float
    mu: float
    phi: float
    omega0: float
    V_p0: float = physical(Kind.VOLTAGE)
    P0: float = physical(Kind.POWER, default=0.0)
    Q0: float = physical(Kind.POWER, default=0.0)
    N: int = 3

    def __post_init__(self):
        if self.eta < 0:
            raise ConfigurationError("Коэффициент η не может быть отрицательным", eta=self.eta)
        if self.mu < 0:
            raise ConfigurationError("Коэффициент μ не может быть отрицательным", mu=self.mu)
        if not 0.0 <= self.phi <= 0.5 * math.pi + 1e-12:
            raise ConfigurationError("Угол φ должен лежать в [0, π/2]", phi=self.phi)
        if self.N not in (1, 3):
            raise ConfigurationError("Число фаз должно быть 1 или 3", N=self.N)
        if self.V_p0 <= 0 or self.omega0 <= 0:
            raise ConfigurationError("V_p0 и omega0 должны быть положительными")

    @property
    def grid_forming(self) -> bool:
        """True для режима GFM (μ > 0)."""
        return self.mu > 0.0

    @property
    def V0(self) -> float:
        """Номинальное действующее напряжение V_p0/√2, В."""
        return self.V_p0 / math.sqrt(2.0)

    def with_setpoints(self, P0: float, Q0: float) -> "SvoParams":
        """Копия параметров с новыми уставками мощности."""
        return replace(self, P0=P0, Q0=Q0)


@dataclass(frozen=True)
class OscillatorState:
    """
    Состояние осциллятора.

    Attributes:
        v (SpaceVector): Вектор выходного напряжения, В.
    """

    v: SpaceVector


def _check_voltage(v2: float, v_floor: float) -> None:
    if not v2 > v_floor * v_floor:
        raise DegenerateVoltageError(
            "Модуль напряжения осциллятора ниже порога", magnitude=math.sqrt(abs(v2)), floor=v_floor,
        )


def _reference(v: complex, P0: float, Q0: float, N: int, x_f: int, I_m: float) -> complex:
    v2 = v.real * v.real + v.imag * v.imag
    i0 = (2.0 / (N * v2)) * complex(P0, -Q0) * v
    if x_f:
        if P0 == 0.0 and Q0 == 0.0:
            return -1j * v * (I_m / math.sqrt(v2))
        return i0 * (I_m / abs(i0))
    m = abs(i0)
    if m > I_m:
        return i0 * (I_m / m)
    return i0


def current_reference(v: SpaceVector, P0: float, Q0: float, N: int, v_floor: float = 0.0) -> SpaceVector:
    """
    Задание тока по теории мгновенной мощности.

    Args:
        v (SpaceVector): Напряжение осциллятора, В.
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
        N (int): Число фаз.
        v_floor (float): Порог вырожденного напряжения, В.

    Returns:
        SpaceVector: i0 = (2/(N V_p²))·(v_α P0 + v_β Q0, v_β P0 − v_α Q0).

    Raises:
        DegenerateVoltageError: Если |v| ниже порога.
    """
    vc = v.as_complex()
    v2 = vc.real * vc.real + vc.imag * vc.imag
    _check_voltage(v2, v_floor)
    return SpaceVector.from_complex((2.0 / (N * v2)) * complex(P0, -Q0) * vc)


def circular_limit(i0: SpaceVector, I_m: float) -> SpaceVector:
    """
    Круговой ограничитель задания тока.

    Args:
        i0 (SpaceVector): Задание тока, А.
        I_m (float): Максимальная амплитуда тока, А.

    Returns:
        SpaceVector: i0 при |i0| ≤ I_m, иначе радиально масштабированный вектор модуля I_m.

    Raises:
        ValueError: Если I_m ≤ 0.
    """
    if I_m <= 0:
        raise ValueError("I_m должен быть положительным")
    m = i0.magnitude()
    if m <= I_m:
        return i0
    return i0 * (I_m / m)


def fault_gain(P0: float, Q0: float, N: int, I_m: float) -> float:
    """
    Коэффициент насыщения K_m = N·I_m/√(2(P0² + Q0²)), А/В.

    Возвращает бесконечность при P0 = Q0 = 0.
    """
    s = math.hypot(P0, Q0)
    if s == 0.0:
        return math.inf
    return N * I_m / (math.sqrt(2.0) * s)


def fault_mode_reference(v: SpaceVector, P0: float, Q0: float, N: int, I_m: float,
                         v_floor: float = 0.0) -> SpaceVector:
    """
    Насыщенное задание тока аварийного режима i0_sat = K_m·V·i0.

    Модуль результата всегда равен I_m, направление совпадает с i0. При
    нулевых уставках ток направлен вдоль v·e^{−jπ/2}, то есть в сеть
    выдаётся чисто реактивная мощность.

    Args:
        v (SpaceVector): Напряжение осциллятора, В.
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
        N (int): Число фаз.
        I_m (float): Максимальная амплитуда тока, А.
        v_floor (float): Порог вырожденного напряжения, В.

    Returns:
        SpaceVector: Задание тока модулем I_m.

    Raises:
        DegenerateVoltageError: Если |v| ниже порога.
    """
    vc = v.as_complex()
    _check_voltage(vc.real * vc.real + vc.imag * vc.imag, v_floor)
    return SpaceVector.from_complex(_reference(vc, P0, Q0, N, 1, I_m))


def saturated_reference(v: SpaceVector, p: SvoParams, f: FaultState, I_m: float,
                        v_floor: float = 0.0) -> SpaceVector:
    """
    Задание тока после ограничителя: аварийное при x_f = 1, иначе круговое ограничение.
    """
    vc = v.as_complex()
    _check_voltage(vc.real * vc.real + vc.imag * vc.imag, v_floor)
    return SpaceVector.from_complex(_reference(vc, p.P0, p.Q0, p.N, f.x_f, I_m))


def svo_step(osc: OscillatorState, i_fb: SpaceVector, p: SvoParams, f: FaultState, dt: float,
             cfg: FaultConfig | None = None, v_floor: float = 0.0, rotating_hold: bool = True) -> OscillatorState:
    """
    Интегрирует осциллятор на один период дискретизации методом Рунге–Кутты 4-го порядка.

    По умолчанию ток обратной связи удерживается постоянным во вращающейся
    вместе с v системе координат: на стадиях метода используется i·(v_стадии/v_k).
    В установившемся режиме это воспроизводит непрерывные соотношения
    статизма без ошибки дискретизации. При ``rotating_hold=False`` ток
    удерживается постоянным в неподвижной системе αβ (обычная фиксация
    отсчёта); тогда ток отстаёт от v в среднем на ω0·dt/2 и в P и Q
    появляется перекрёстная ошибка порядка ω0·dt/2.

    Args:
        osc (OscillatorState): Текущее состояние.
        i_fb (SpaceVector): Ток обратной связи на начало шага, А.
        p (SvoParams): Параметры осциллятора (с действующими уставками P0, Q0).
        f (FaultState): Состояние аварийного автомата.
        dt (float): Шаг интегрирования, с.
        cfg (FaultConfig | None): Параметры аварийного режима (I_m, усиление η_f).
        v_floor (float): Порог вырожденного напряжения, В.
        rotating_hold (bool): Удерживать ток во вращающейся системе координат.

    Returns:
        OscillatorState: Состояние в конце шага.

    Raises:
        DegenerateVoltageError: Если |v| опускается ниже порога.
        NonFiniteStateError: Если результат не конечен.
    """
    x_f = f.x_f
    I_m = cfg.I_m if cfg is not None and cfg.enabled else math.inf
    eta_f = p.eta * f.eta_gain(cfg)
    k_mag = (1 - x_f) * p.mu
    rot = eta_f * cmath.exp(1j * p.phi)
    jw = 1j * p.omega0
    V2ref = p.V_p0 * p.V_p0
    P0, Q0, N = p.P0, p.Q0, p.N

    vk = osc.v.as_complex()
    _check_voltage(vk.real * vk.real + vk.imag * vk.imag, v_floor)
    i_k = i_fb.as_complex()
    i_ratio = i_k / vk

    def rhs(v: complex) -> complex:
        v2 = v.real * v.real + v.imag * v.imag
        _check_voltage(v2, v_floor)
        i = i_ratio * v if rotating_hold else i_k
        e_i = _reference(v, P0, Q0, N, x_f, I_m) - i
        return jw * v + k_mag * (V2ref - v2) * v + rot * e_i

    k1 = rhs(vk)
    k2 = rhs(vk + 0.5 * dt * k1)
    k3 = rhs(vk + 0.5 * dt * k2)
    k4 = rhs(vk + dt * k3)
    v_new = vk + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not (math.isfinite(v_new.real) and math.isfinite(v_new.imag)):
        raise NonFiniteStateError("Состояние осциллятора стало неконечным", variable="v")
    return OscillatorState(SpaceVector(v_new.real, v_new.imag))
