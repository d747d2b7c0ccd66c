"""
Преобразования систем координат и алгебра мгновенной мощности.

Используется амплитудно-инвариантное преобразование Кларк (коэффициент 2/3),
поэтому модуль пространственного вектора равен амплитуде фазного напряжения,
а мгновенные мощности вычисляются с множителем N/2.
"""
import math

from .errors import DegenerateVoltageError
from .record import PolarForm, PowerError, SpaceVector

# Относительный порог модуля напряжения: ε_v = V_FLOOR_RATIO·V0
V_FLOOR_RATIO = 1e-6

_SQRT3_2 = math.sqrt(3.0) / 2.0


def voltage_floor(V0: float) -> float:
    """
    Порог ε_v, ниже которого напряжение считается вырожденным.

    Args:
        V0 (float): Номинальное действующее напряжение, В.

    Returns:
        float: ε_v = 1e-6·V0.
    """
    return V_FLOOR_RATIO * V0


def abc_to_alphabeta(a: float, b: float, c: float) -> SpaceVector:
    """
    Амплитудно-инвариантное преобразование Кларк.

    Args:
        a (float): Мгновенное значение фазы a.
        b (float): Мгновенное значение фазы b.
        c (float): Мгновенное значение фазы c.

    Returns:
        SpaceVector: Вектор (α, β). Нулевая последовательность отбрасывается.

    Example:
        >>> abc_to_alphabeta(1.0, 0.0, 0.0)
        SpaceVector(alpha=0.6666666666666666, beta=0.0)
    """
    return SpaceVector(
        (2.0 / 3.0) * (a - 0.5 * b - 0.5 * c),
        (2.0 / 3.0) * _SQRT3_2 * (b - c),
    )


def alphabeta_to_abc(v: SpaceVector) -> tuple[float, float, float]:
    """
    Обратное преобразование Кларк при нулевой составляющей нулевой последовательности.

    Args:
        v (SpaceVector): Вектор (α, β).

    Returns:
        tuple[float, float, float]: Фазные величины (a, b, c).
    """
    a = v.alpha
    b = -0.5 * v.alpha + _SQRT3_2 * v.beta
    c = -0.5 * v.alpha - _SQRT3_2 * v.beta
    return a, b, c


def polar_decompose(v: SpaceVector) -> PolarForm:
    """
    Переводит вектор в полярную форму.

    Для нулевого вектора угол принимается равным нулю.

    Args:
        v (SpaceVector): Исходный вектор.

    Returns:
        PolarForm: Амплитуда V_p = |v| и угол θ = atan2(β, α).
    """
    if v.alpha == 0.0 and v.beta == 0.0:
        return PolarForm(0.0, 0.0)
    return PolarForm(v.magnitude(), math.atan2(v.beta, v.alpha))


def polar_compose(p: PolarForm) -> SpaceVector:
    """
    Собирает вектор из полярной формы.

    Args:
        p (PolarForm): Амплитуда и угол.

    Returns:
        SpaceVector: Вектор V_p·(cos θ, sin θ).
    """
    return SpaceVector(p.magnitude * math.cos(p.angle), p.magnitude * math.sin(p.angle))


def rotate(v: SpaceVector, phi: float) -> SpaceVector:
    """
    Поворот вектора на угол φ (умножение на e^{jφ}).

    Args:
        v (SpaceVector): Исходный вектор.
        phi (float): Угол поворота, рад.

    Returns:
        SpaceVector: Повёрнутый вектор того же модуля.
    """
    c, s = math.cos(phi), math.sin(phi)
    return SpaceVector(c * v.alpha - s * v.beta, s * v.alpha + c * v.beta)


def instantaneous_pq(v: SpaceVector, i: SpaceVector, N: int) -> tuple[float, float]:
    """
    Мгновенные активная и реактивная мощности.

    Args:
        v (SpaceVector): Вектор напряжения, В.
        i (SpaceVector): Вектор тока, А.
        N (int): Число фаз.

    Returns:
        tuple[float, float]: (P, Q), где P = (N/2)(v_α i_α + v_β i_β),
        Q = (N/2)(v_β i_α − v_α i_β).
    """
    k = 0.5 * N
    P = k * (v.alpha * i.alpha + v.beta * i.beta)
    Q = k * (v.beta * i.alpha - v.alpha * i.beta)
    return P, Q


def power_error(
    v: SpaceVector,
    i: SpaceVector,
    P0: float,
    Q0: float,
    N: int,
    v_floor: float = 0.0,
) -> PowerError:
    """
    Ошибка мощности и составляющие ошибки тока.

    Args:
        v (SpaceVector): Вектор напряжения генератора, В.
        i (SpaceVector): Вектор тока обратной связи, А.
        P0 (float): Уставка активной мощности, Вт.
        Q0 (float): Уставка реактивной мощности, вар.
        N (int): Число фаз.
        v_floor (float): Порог вырожденного напряжения ε_v, В.

    Returns:
        PowerError: e_P, e_Q и e_iP = 2e_P/(N V_p²), e_iQ = −2e_Q/(N V_p²).

    Raises:
        DegenerateVoltageError: Если |v| не превышает порог.
    """
    V2 = v.alpha * v.alpha + v.beta * v.beta
    if V2 <= v_floor * v_floor or V2 == 0.0:
        raise DegenerateVoltageError(
            "Модуль напряжения ниже порога при вычислении ошибки мощности",
            magnitude=math.sqrt(V2), floor=v_floor,
        )
    P, Q = instantaneous_pq(v, i, N)
    e_P = P0 - P
    e_Q = Q0 - Q
    return PowerError(e_P, e_Q, 2.0 * e_P / (N * V2), -2.0 * e_Q / (N * V2))
