"""
Иерархия исключений uVOC-Lab.

Все ошибки библиотеки наследуются от :class:`UvocError` и одновременно от
подходящего встроенного исключения (``ValueError`` или ``RuntimeError``),
поэтому вызывающий код может перехватывать их привычным образом.

Каждое исключение несёт стабильный код ``code``, словарь диагностических
значений ``context`` и код завершения CLI ``exit_code``
(2 — ошибка входных данных, 3 — численная ошибка).
"""
from typing import Any


class UvocError(Exception):
    """
    Базовое исключение uVOC-Lab.

    Attributes:
        code (str): Машиночитаемый идентификатор ошибки.
        exit_code (int): Код завершения, который вернёт CLI.
        context (dict[str, Any]): Диагностические значения (время, переменная, невязка и т.п.).
    """

    code = "uvoc_error"
    exit_code = 3

    def __init__(self, message: str, **context: Any):
        """
        Args:
            message (str): Человекочитаемое описание ошибки.
            **context: Произвольные диагностические поля.
        """
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """
        Возвращает JSON-совместимое представление ошибки.

        Returns:
            dict[str, Any]: Словарь с полями ``code``, ``message`` и ``context``.
        """
        return {
            "code": self.code,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class ConfigurationError(UvocError, ValueError):
    """Нарушение схемы сценария, неизвестный ключ или недопустимый параметр."""

    code = "configuration_error"
    exit_code = 2


class UnknownEventError(ConfigurationError):
    """Событие сценария неподдерживаемого типа."""

    code = "unknown_event"


class DegenerateVoltageError(UvocError, ValueError):
    """Модуль напряжения ниже порога ε_v там, где на него делят."""

    code = "degenerate_voltage"


class NonFiniteStateError(UvocError, RuntimeError):
    """Состояние моделирования стало NaN/Inf."""

    code = "non_finite_state"


class DcBusCollapseError(UvocError, RuntimeError):
    """Напряжение звена постоянного тока упало ниже допустимого минимума."""

    code = "dc_bus_collapse"


class ConvergenceError(UvocError, RuntimeError):
    """Метод Ньютона не сошёлся за отведённое число итераций."""

    code = "convergence_error"


class InfeasibleOperatingPointError(UvocError, ValueError):
    """Рабочая точка недостижима (отрицательное подкоренное выражение, не равновесие)."""

    code = "infeasible_operating_point"


class PoleEvaluationError(UvocError, ValueError):
    """Передаточная функция вычисляется в собственном значении матрицы A."""

    code = "pole_evaluation"


class NoCrossoverError(UvocError, ValueError):
    """В заданной полосе нет частоты среза контура."""

    code = "no_crossover"


class NotSettledError(UvocError, RuntimeError):
    """Рабочая точка не установилась до начала инжекции возмущения."""

    code = "not_settled"


class WindowTooShortError(UvocError, ValueError):
    """Окно усреднения короче двух периодов основной частоты."""

    code = "window_too_short"
