"""
Чтение JSON-сценариев и спецификаций расчёта параметров.

Каждая секция документа отображается на dataclass; неизвестные ключи
отклоняются с указанием полного пути. Поля с физической размерностью
(см. :mod:`uvoclab.units`) принимают число в СИ или ``{"pu": x}``.

Example:
    .. code-block:: python

        with ScenarioReader("fig10_fault_scr5.json", overrides=["controller.svo.mu=0"]) as reader:
            scenario = reader.read()
"""
import copy
import dataclasses
import json
import logging
import types
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Union, get_args, get_origin, get_type_hints

from .abstract import Reader
from .controller import ControllerConfig, Modulation
from .design import DesignSpec, MapSpec
from .errors import ConfigurationError, UnknownEventError
from .fault import FaultConfig
from .filters import DcRegParams, EviParams, PresyncParams
from .oscillator import SvoParams
from .plant import GridParams, PlantParams
from .record import Event, EventKind, VscRatings
from .scenario import AnalysisSpec, InitialCondition, Scenario, SweepSpec
from .units import Kind, base_value

logger = logging.getLogger(__name__)

_SCENARIO_SCALARS = ("name", "description", "duration", "substeps", "decimation", "seed")
_SECTIONS = {
    "ratings": VscRatings,
    "plant": PlantParams,
    "initial": InitialCondition,
    "analysis": AnalysisSpec,
}
_CONTROLLER_SECTIONS = {
    "svo": SvoParams,
    "fault": FaultConfig,
    "evi": EviParams,
    "presync": PresyncParams,
    "dcreg": DcRegParams,
}
_EVENT_KINDS = {
    EventKind.GRID_VOLTAGE: Kind.VOLTAGE,
    EventKind.LOAD: Kind.IMPEDANCE,
    EventKind.SHORT_CIRCUIT: Kind.IMPEDANCE,
    EventKind.DC_LOAD: Kind.POWER,
    EventKind.SETPOINT_P: Kind.POWER,
    EventKind.SETPOINT_Q: Kind.POWER,
}


def _join(path: str, name: Any) -> str:
    return f"{path}.{name}" if path else str(name)


def _unwrap_optional(tp: Any) -> tuple[Any, bool]:
    if get_origin(tp) in (Union, types.UnionType):
        args = [a for a in get_args(tp) if a is not type(None)]
        return (args[0] if len(args) == 1 else tp), len(args) < len(get_args(tp))
    return tp, False


def _per_unit(value: dict, kind: Kind | None, ratings: VscRatings | None, path: str) -> float:
    if set(value) != {"pu"}:
        raise ConfigurationError(f"Ожидался объект {{\"pu\": x}} в {path}", path=path)
    if kind is None:
        raise ConfigurationError(f"Поле {path} безразмерно и не принимает относительные единицы", path=path)
    if ratings is None:
        raise ConfigurationError(f"Для {path} нужны номинальные данные (секция ratings)", path=path)
    return _number(value["pu"], path) * base_value(kind, ratings)


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigurationError(f"Поле {path} должно быть числом", path=path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigurationError(f"Поле {path} должно быть числом, получено {value!r}", path=path)


def _convert(tp: Any, value: Any, path: str, ratings: VscRatings | None, kind: Kind | None = None) -> Any:
    if dataclasses.is_dataclass(tp) and isinstance(value, tp):
        return value
    if isinstance(value, dict) and kind is not None:
        return _per_unit(value, kind, ratings, path)
    tp, optional = _unwrap_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigurationError(f"Поле {path} не может быть null", path=path)
    if dataclasses.is_dataclass(tp):
        return build(tp, value, path, ratings)
    if tp is tuple or get_origin(tp) is tuple:
        if not isinstance(value, list):
            raise ConfigurationError(f"Поле {path} должно быть списком", path=path)
        args = get_args(tp)
        if args:
            return tuple(_convert(args[0], v, f"{path}[{i}]", ratings) for i, v in enumerate(value))
        return tuple(value)
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(value)
        except ValueError:
            allowed = ", ".join(m.value for m in tp)
            raise ConfigurationError(f"Недопустимое значение {value!r} в {path}; допустимо: {allowed}",
                                     path=path) from None
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"Поле {path} должно быть true/false", path=path)
        return value
    if tp is int:
        number = _number(value, path)
        if not number.is_integer():
            raise ConfigurationError(f"Поле {path} должно быть целым", path=path)
        return int(number)
    if tp is float:
        return _number(value, path)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"Поле {path} должно быть строкой", path=path)
        return value
    return value


def build(cls: type, data: Any, path: str, ratings: VscRatings | None,
          defaults: dict[str, Any] | None = None) -> Any:
    """
    Создаёт dataclass ``cls`` из словаря документа.

    Args:
        cls (type): Класс секции.
        data (Any): Содержимое секции (словарь).
        path (str): Путь секции через точку (для сообщений).
        ratings (VscRatings | None): Базис относительных единиц.
        defaults (dict[str, Any] | None): Значения, подставляемые при отсутствии ключа.

    Returns:
        Any: Экземпляр ``cls``.

    Raises:
        ConfigurationError: Неизвестный ключ, неверный тип или недопустимое значение.
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"Секция {path or '<корень>'} должна быть объектом", path=path)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        bad = _join(path, unknown[0])
        raise ConfigurationError(f"Неизвестный ключ {bad}", path=bad)
    hints = get_type_hints(cls)
    merged = dict(defaults or {})
    merged.update(data)
    kwargs = {
        name: _convert(hints[name], value, _join(path, name), ratings, fields[name].metadata.get("kind"))
        for name, value in merged.items()
    }
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        exc.context.setdefault("path", path)
        raise
    except TypeError as exc:
        raise ConfigurationError(f"Секция {path}: {exc}", path=path) from exc


def _section(doc: dict, key: str, path: str = "") -> dict:
    value = doc.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigurationError(f"Секция {_join(path, key)} должна быть объектом", path=_join(path, key))
    return value


def build_plant(data: dict, ratings: VscRatings, path: str = "plant") -> PlantParams:
    """
    Силовая часть; по умолчанию сеть номинальная (V_gp = √2·V0, ω_g = ω0).
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"Секция {path} должна быть объектом", path=path)
    grid = build(GridParams, _section(data, "grid", path), _join(path, "grid"), ratings,
                 defaults={"V_gp": ratings.V_p0, "omega_g": ratings.omega0})
    return build(PlantParams, {**data, "grid": grid}, path, ratings, defaults={"N": ratings.N})


def build_controller(data: dict, ratings: VscRatings, plant: PlantParams,
                     path: str = "controller") -> ControllerConfig:
    """
    Конфигурация регулятора.

    Номинальные ω0, V_p0 и N подставляются в осциллятор и EVI по умолчанию,
    R_0 вычисляется как ω_OCL·(L_a + L_g), если не задан.
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"Секция {path} должна быть объектом", path=path)
    allowed = set(_CONTROLLER_SECTIONS) | {"modulation"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        bad = _join(path, unknown[0])
        raise ConfigurationError(f"Неизвестный ключ {bad}", path=bad)
    if "svo" not in data:
        raise ConfigurationError(f"Отсутствует секция {path}.svo", path=_join(path, "svo"))
    svo = build(SvoParams, data["svo"], _join(path, "svo"), ratings,
                defaults={"omega0": ratings.omega0, "V_p0": ratings.V_p0, "N": ratings.N})
    kwargs: dict[str, Any] = {"ratings": ratings, "svo": svo}
    if "fault" in data:
        fault = build(FaultConfig, data["fault"], _join(path, "fault"), ratings)
        kwargs["fault"] = fault.with_default_R0(plant.L_a + plant.L_g)
    if "evi" in data:
        kwargs["evi"] = build(EviParams, data["evi"], _join(path, "evi"), ratings,
                              defaults={"omega0": ratings.omega0})
    else:
        kwargs["evi"] = EviParams(omega0=ratings.omega0)
    for key in ("presync", "dcreg"):
        if key in data:
            kwargs[key] = build(_CONTROLLER_SECTIONS[key], data[key], _join(path, key), ratings)
    if "modulation" in data:
        kwargs["modulation"] = _convert(Modulation, data["modulation"], _join(path, "modulation"), ratings)
    try:
        return ControllerConfig(**kwargs)
    except ConfigurationError as exc:
        exc.context.setdefault("path", path)
        raise


def build_event(data: Any, ratings: VscRatings, path: str) -> Event:
    """
    Событие ``{"t": ..., "kind": ..., "value": ...}``.

    Raises:
        UnknownEventError: Если тип события не поддерживается.
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"Событие {path} должно быть объектом", path=path)
    unknown = sorted(set(data) - {"t", "kind", "value"})
    if unknown:
        raise ConfigurationError(f"Неизвестный ключ {_join(path, unknown[0])}", path=_join(path, unknown[0]))
    if "t" not in data or "kind" not in data:
        raise ConfigurationError(f"Событие {path} должно содержать t и kind", path=path)
    try:
        kind = EventKind(data["kind"])
    except ValueError:
        raise UnknownEventError(f"Неизвестный тип события {data['kind']!r}", path=path) from None
    value = data.get("value")
    if isinstance(value, dict):
        value = _per_unit(value, _EVENT_KINDS.get(kind), ratings, _join(path, "value"))
    elif value is not None:
        value = _number(value, _join(path, "value"))
    return Event(_number(data["t"], _join(path, "t")), kind, value)


def check_path(dotted: str) -> None:
    """
    Проверяет путь параметра сценария по схеме.

    Допустимы скалярные поля верхнего уровня (``duration``, ``seed`` и т.д.),
    ``events``/``sweeps`` целиком и листья секций. Для физических величин
    допускается окончание ``.pu``.

    Raises:
        ConfigurationError: Если путь не существует.
    """
    parts = dotted.split(".")
    head, rest = parts[0], parts[1:]
    if head in _SCENARIO_SCALARS or head in ("events", "sweeps"):
        if rest:
            raise ConfigurationError(f"Неизвестный путь {dotted}", path=dotted)
        return
    if head == "controller":
        if not rest:
            return
        if rest[0] == "modulation" and len(rest) == 1:
            return
        if rest[0] not in _CONTROLLER_SECTIONS:
            raise ConfigurationError(f"Неизвестный путь {dotted}", path=dotted)
        _check_fields(_CONTROLLER_SECTIONS[rest[0]], rest[1:], dotted)
        return
    if head not in _SECTIONS:
        raise ConfigurationError(f"Неизвестный путь {dotted}", path=dotted)
    _check_fields(_SECTIONS[head], rest, dotted)


def _check_fields(cls: type, parts: list[str], dotted: str) -> None:
    hints = get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for i, part in enumerate(parts):
        if part not in fields:
            raise ConfigurationError(f"Неизвестный путь {dotted}", path=dotted)
        tp, _ = _unwrap_optional(hints[part])
        tail = parts[i + 1:]
        if dataclasses.is_dataclass(tp):
            cls, hints = tp, get_type_hints(tp)
            fields = {f.name: f for f in dataclasses.fields(tp)}
            continue
        if not tail or (tail == ["pu"] and fields[part].metadata.get("kind") is not None):
            return
        raise ConfigurationError(f"Неизвестный путь {dotted}", path=dotted)


def set_path(doc: dict, dotted: str, value: Any) -> dict:
    """
    Возвращает копию документа с заменённым значением по пути.

    Raises:
        ConfigurationError: Если путь не существует в схеме.
    """
    check_path(dotted)
    out = copy.deepcopy(doc)
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value
    return out


def parse_override(text: str) -> tuple[str, Any]:
    """
    Разбирает ``путь=значение``; значение читается как JSON, иначе как строка.

    Raises:
        ConfigurationError: Если нет знака ``=`` или путь пуст.
    """
    path, sep, raw = text.partition("=")
    path = path.strip()
    if not sep or not path:
        raise ConfigurationError(f"Переопределение должно иметь вид путь=значение: {text!r}", override=text)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(doc: dict, overrides: Iterable[str]) -> dict:
    """Применяет переопределения ``путь=значение`` к исходному документу."""
    for text in overrides:
        path, value = parse_override(text)
        doc = set_path(doc, path, value)
        logger.debug("Переопределение %s = %r", path, value)
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    """
    Строит сценарий из JSON-документа.

    Args:
        doc (dict): Документ сценария.

    Returns:
        Scenario: Сценарий с величинами в СИ.

    Raises:
        ConfigurationError: При любом нарушении схемы.
    """
    if not isinstance(doc, dict):
        raise ConfigurationError("Сценарий должен быть объектом JSON")
    allowed = set(_SCENARIO_SCALARS) | set(_SECTIONS) | {"controller", "events", "sweeps"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigurationError(f"Неизвестный ключ {unknown[0]}", path=unknown[0])
    for key in ("name", "ratings", "plant", "controller"):
        if key not in doc:
            raise ConfigurationError(f"Отсутствует обязательный ключ {key}", path=key)

    ratings = build(VscRatings, doc["ratings"], "ratings", None)
    plant = build_plant(doc["plant"], ratings)
    controller = build_controller(doc["controller"], ratings, plant)
    initial = build(InitialCondition, _section(doc, "initial"), "initial", ratings)
    analysis = build(AnalysisSpec, _section(doc, "analysis"), "analysis", ratings)

    raw_events = doc.get("events") or []
    if not isinstance(raw_events, list):
        raise ConfigurationError("Секция events должна быть списком", path="events")
    events = [build_event(e, ratings, f"events[{i}]") for i, e in enumerate(raw_events)]
    events.sort(key=lambda e: e.t)

    raw_sweeps = doc.get("sweeps") or []
    if not isinstance(raw_sweeps, list):
        raise ConfigurationError("Секция sweeps должна быть списком", path="sweeps")
    sweeps = tuple(build(SweepSpec, s, f"sweeps[{i}]", None) for i, s in enumerate(raw_sweeps))
    for sw in sweeps:
        check_path(sw.param)

    hints = get_type_hints(Scenario)
    scalars = {key: _convert(hints[key], doc[key], key, ratings) for key in _SCENARIO_SCALARS if key in doc}
    return Scenario(ratings=ratings, plant=plant, controller=controller, initial=initial,
                    events=tuple(events), sweeps=sweeps, analysis=analysis, **scalars)


def _load_json(file) -> dict:
    try:
        return json.load(file)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Некорректный JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


class ScenarioReader(Reader[Scenario]):
    """
    Чтение сценария моделирования из JSON-файла.

    Attributes:
        filepath (Path): Путь к файлу сценария.
        overrides (tuple[str, ...]): Переопределения ``путь=значение``.
    """

    def __init__(self, filepath: str | Path, overrides: Iterable[str] = ()):
        super().__init__(filepath)
        self.overrides = tuple(overrides)

    def __enter__(self):
        try:
            return super().__enter__()
        except FileNotFoundError as exc:
            raise ConfigurationError(f"Файл не найден: {self.filepath}", path=str(self.filepath)) from exc

    def raw(self) -> dict:
        """
        Исходный документ с применёнными переопределениями.

        Returns:
            dict: Документ JSON.
        """
        if self.file is None:
            raise ValueError("Файл не открыт: используйте ScenarioReader в блоке with")
        self.file.seek(0)
        return apply_overrides(_load_json(self.file), self.overrides)

    def read(self) -> Scenario:
        """
        Читает и проверяет сценарий.

        Returns:
            Scenario: Сценарий с величинами в СИ.

        Raises:
            ConfigurationError: При нарушении схемы или неизвестном пути переопределения.
        """
        scenario = scenario_from_dict(self.raw())
        logger.debug("Сценарий %s прочитан из %s", scenario.name, self.filepath)
        return scenario


def load_scenario(path: str | Path, overrides: Iterable[str] = ()) -> Scenario:
    """Открывает файл сценария и читает его."""
    with ScenarioReader(path, overrides) as reader:
        return reader.read()


def load_raw(path: str | Path) -> dict:
    """Исходный JSON-документ сценария без переопределений."""
    with ScenarioReader(path) as reader:
        return reader.raw()


@dataclass(frozen=True)
class DesignInput:
    """
    Содержимое спецификации расчёта параметров.

    Attributes:
        spec (DesignSpec): Требования к статическим характеристикам.
        plant (PlantParams | None): Силовая часть для карты мощностей.
        map (MapSpec): Сетка карты мощностей.
        evi (EviParams | None): Виртуальное сопротивление для карты мощностей.
    """

    spec: DesignSpec
    plant: PlantParams | None = None
    map: MapSpec = field(default_factory=MapSpec)
    evi: EviParams | None = None


def design_from_dict(doc: dict) -> DesignInput:
    """
    Строит спецификацию расчёта из JSON-документа.

    ``delta_V_max`` в относительных единицах умножается на действующее V0.
    """
    if not isinstance(doc, dict):
        raise ConfigurationError("Спецификация должна быть объектом JSON")
    allowed = {"name", "description", "ratings", "delta_V_max", "delta_omega_max", "phi", "plant", "map", "evi"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigurationError(f"Неизвестный ключ {unknown[0]}", path=unknown[0])
    for key in ("ratings", "delta_V_max", "delta_omega_max"):
        if key not in doc:
            raise ConfigurationError(f"Отсутствует обязательный ключ {key}", path=key)
    ratings = build(VscRatings, doc["ratings"], "ratings", None)
    dV = doc["delta_V_max"]
    if isinstance(dV, dict):
        if set(dV) != {"pu"}:
            raise ConfigurationError("Ожидался объект {\"pu\": x} в delta_V_max", path="delta_V_max")
        dV = _number(dV["pu"], "delta_V_max") * ratings.V0
    kwargs = {
        "ratings": ratings,
        "delta_V_max": _number(dV, "delta_V_max"),
        "delta_omega_max": _number(doc["delta_omega_max"], "delta_omega_max"),
    }
    if "phi" in doc:
        kwargs["phi"] = _number(doc["phi"], "phi")
    spec = DesignSpec(**kwargs)
    plant = build_plant(doc["plant"], ratings) if doc.get("plant") is not None else None
    map_spec = build(MapSpec, _section(doc, "map"), "map", ratings)
    evi = None
    if doc.get("evi") is not None:
        evi = build(EviParams, doc["evi"], "evi", ratings, defaults={"omega0": ratings.omega0})
    return DesignInput(spec, plant, map_spec, evi)


class DesignSpecReader(Reader[DesignInput]):
    """Чтение спецификации расчёта параметров из JSON-файла."""

    def __enter__(self):
        try:
            return super().__enter__()
        except FileNotFoundError as exc:
            raise ConfigurationError(f"Файл не найден: {self.filepath}", path=str(self.filepath)) from exc

    def read(self) -> DesignInput:
        """
        Returns:
            DesignInput: Требования и необязательные параметры карты мощностей.
        """
        if self.file is None:
            raise ValueError("Файл не открыт: используйте DesignSpecReader в блоке with")
        return design_from_dict(_load_json(self.file))


def load_design(path: str | Path) -> DesignInput:
    """Открывает файл спецификации и читает его."""
    with DesignSpecReader(path) as reader:
        return reader.read()
