"""
Физические величины в полях конфигурации и их перевод из относительных единиц.

Поле dataclass, объявленное через :func:`physical`, в JSON-сценарии может
задаваться числом в СИ или объектом ``{"pu": x}``; перевод выполняется один
раз при загрузке по базисным величинам :class:`~uvoclab.record.VscRatings`.
"""
import dataclasses
from enum import Enum
from typing import Any

from .record import VscRatings


class Kind(str, Enum):
    """Род физической величины, определяющий базис относительных единиц."""

    IMPEDANCE = "impedance"
    INDUCTANCE = "inductance"
    CAPACITANCE = "capacitance"
    VOLTAGE = "voltage"
    CURRENT = "current"
    POWER = "power"


def physical(kind: Kind, **kwargs: Any) -> Any:
    """
    Объявляет поле dataclass с физической размерностью.

    Args:
        kind (Kind): Род величины.
        **kwargs: Аргументы :func:`dataclasses.field` (default и т.п.).

    Returns:
        dataclasses.Field: Поле с метаданными ``{"kind": kind}``.
    """
    return dataclasses.field(metadata={"kind": kind}, **kwargs)


def base_value(kind: Kind, ratings: VscRatings) -> float:
    """
    Базисное значение величины данного рода.

    Args:
        kind (Kind): Род величины.
        ratings (VscRatings): Номинальные данные.

    Returns:
        float: Базис в СИ (напряжение и ток — амплитудные значения).
    """
    if kind is Kind.IMPEDANCE:
        return ratings.z_base
    if kind is Kind.INDUCTANCE:
        return ratings.l_base
    if kind is Kind.CAPACITANCE:
        return ratings.c_base
    if kind is Kind.VOLTAGE:
        return ratings.V_p0
    if kind is Kind.CURRENT:
        return ratings.i_base_peak
    return ratings.S_rated
