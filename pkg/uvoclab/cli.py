"""
Командная строка uVOC-Lab (click).

Команды: simulate, design, linearize, eigs, bode, margins, powermap, sweep.

Любая ошибка библиотеки завершает программу с кодом ``exit_code`` исключения
(2 — входные данные, 3 — численная ошибка) и выводит в stderr объект JSON
``{"code", "message", "context"}``.

Example:
    .. code-block:: bash

        python -m uvoclab simulate uvoclab/scenarios/fig10_fault_scr5.json --out runs/fig10
        python -m uvoclab eigs uvoclab/scenarios/table3_gfm_stiff.json --rvir-sweep 0.5%,1.15%,4.9%
        python -m uvoclab margins uvoclab/scenarios/sec7a_single_phase_rectifier.json
"""
import functools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

import click
import numpy as np
import pandas as pd

from .design import design_report, power_limit_map
from .errors import ConfigurationError, ConvergenceError, UvocError
from .manifest import RunManifest, write_frame, write_text
from .plotting import plot_bode, plot_power_map, plot_trace, write_plot_script
from .scenario import Scenario
from .scenario_reader import load_design, load_raw, load_scenario, parse_override, scenario_from_dict, set_path
from .simulator import (
    EXTRA_COLUMNS, TRACE_COLUMNS, Trace, measure_frequency_response, run_scenario, steady_state_extract,
)
from .smallsignal import (
    FaultMode, GridCondition, LinearModel, SmallSignalParams, bode as bode_frame, dc_loop_gain, eigenvalues,
    equilibrium_solve, fault_setpoints, linearize, margins as loop_margins,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Доля несошедшихся узлов карты мощностей, при которой команда завершается с ошибкой.
POWERMAP_FAIL_FRACTION = 0.05

SCENARIO_PATH = click.Path(dir_okay=False, path_type=Path)
OUT_DIR = click.Path(file_okay=False, path_type=Path)


def _fail(exc: UvocError) -> None:
    click.echo(json.dumps(exc.to_dict(), ensure_ascii=False, sort_keys=True), err=True)
    sys.exit(exc.exit_code)


def handle_errors(func):
    """Переводит исключения библиотеки в код завершения и JSON в stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except UvocError as exc:
            _fail(exc)

    return wrapper


def worker_limit(requested: int | None = None) -> int:
    """
    Число процессов для переборов: не больше UVOC_THREADS и числа процессоров.

    Raises:
        ConfigurationError: Если UVOC_THREADS не является положительным целым.
    """
    cap = os.cpu_count() or 1
    env = os.environ.get("UVOC_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigurationError("UVOC_THREADS должна быть целым числом", UVOC_THREADS=env) from None
        if cap < 1:
            raise ConfigurationError("UVOC_THREADS должна быть положительной", UVOC_THREADS=env)
    return max(1, min(requested or cap, cap))


def parse_rvir_list(text: str, z_base: float) -> list[tuple[str, float]]:
    """
    Разбор списка виртуальных сопротивлений ``0.5%,1.15%,4.9%``.

    Значения с ``%`` задаются в процентах от Z_base, остальные — в омах.

    Returns:
        list[tuple[str, float]]: (исходная запись, сопротивление в омах).
    """
    out = []
    for item in (x.strip() for x in text.split(",")):
        if not item:
            continue
        try:
            value = float(item[:-1]) / 100.0 * z_base if item.endswith("%") else float(item)
        except ValueError:
            raise click.BadParameter(f"Некорректное значение R_vir: {item!r}", param_hint="--rvir-sweep") from None
        if value < 0:
            raise click.BadParameter("R_vir не может быть отрицательным", param_hint="--rvir-sweep")
        out.append((item, value))
    if not out:
        raise click.BadParameter("Пустой список", param_hint="--rvir-sweep")
    return out


def parse_values(text: str) -> list[Any]:
    """
    Значения перебора: JSON-массив или список через запятую (каждый элемент — JSON или строка).
    """
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise click.BadParameter(f"Некорректный JSON: {exc.msg}", param_hint="--values") from None
        return list(values)
    return [parse_override(f"v={item.strip()}")[1] for item in text.split(",") if item.strip()]


def linear_model(s: Scenario, mode: str = "normal", R_vir: float | None = None) -> LinearModel:
    """
    Равновесие и линеаризация сценария.

    В аварийном режиме уставки заменяются на аварийные (с поддержкой Q).
    """
    p = SmallSignalParams.from_scenario(s, R_vir)
    grid = GridCondition.from_scenario(s)
    fault = None
    P0, Q0 = s.controller.svo.P0, s.controller.svo.Q0
    if mode == "fault":
        P0, Q0 = fault_setpoints(s.controller)
        fault = FaultMode.from_config(s.controller, P0, Q0)
    op = equilibrium_solve(p, grid, fault, P0, Q0)
    return linearize(op, p, fault)


def _eigs_frame(lam: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"re": lam.real, "im": lam.imag})


def _echo_frame(df: pd.DataFrame) -> None:
    click.echo(df.to_string(index=False, float_format=lambda x: f"{x:.6g}"))


@click.group(context_settings=dict(help_option_names=["-h", "--help"]))
@click.option("--verbose", "-v", is_flag=True, help="Подробный журнал (DEBUG).")
def main(verbose: bool) -> None:
    """
    uVOC-Lab: моделирование, выбор параметров и малосигнальный анализ
    преобразователя с унифицированным виртуальным осциллятором.
    """
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format=LOG_FORMAT)


@main.command()
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--out", "out_dir", type=OUT_DIR, default=Path("out"), show_default=True, help="Каталог результатов.")
@click.option("--override", "overrides", multiple=True, metavar="ПУТЬ=ЗНАЧЕНИЕ", help="Переопределение параметра.")
@click.option("--plot", is_flag=True, help="Сохранить PNG временных диаграмм.")
@click.option("--extras", is_flag=True, help="Добавить в запись мощности в точке подключения.")
@handle_errors
def simulate(scenario: Path, out_dir: Path, overrides: tuple[str, ...], plot: bool, extras: bool) -> None:
    """
    Моделирование сценария во временной области.

    Записывает trace.csv, events.txt, plot_trace.py и manifest.json.
    """
    s = load_scenario(scenario, overrides)
    tr = run_scenario(s)
    manifest = RunManifest("simulate", str(scenario), str(out_dir),
                           dict(parse_override(o) for o in overrides))
    _write_trace(tr, out_dir, "trace.csv", extras, manifest)
    lines = list(tr.events)
    for start, end in tr.fault_intervals():
        end_text = "не снята" if end is None else f"{end:.6f} с"
        lines.append(f"авария: вход {start:.6f} с, выход {end_text}")
    manifest.record(write_text(out_dir / "events.txt", "\n".join(lines) + "\n"))
    manifest.record(write_plot_script(out_dir / "plot_trace.py", "trace.csv", "trace", s.name))
    if plot:
        manifest.record(plot_trace(tr.frame, out_dir / "trace.png", s.name))
    manifest.write()
    click.echo(f"Сценарий {s.name}: {len(tr.frame)} строк, t_end = {tr.t[-1]:.6g} с")
    for line in lines:
        click.echo(f"  {line}")


def _write_trace(tr: Trace, out_dir: Path, name: str, extras: bool, manifest: RunManifest | None = None) -> Path:
    columns = list(TRACE_COLUMNS) + (list(EXTRA_COLUMNS) if extras else [])
    path = write_frame(out_dir / name, tr.frame[columns])
    if manifest is not None:
        manifest.record(path)
    return path


@main.command()
@click.argument("spec", type=SCENARIO_PATH)
@click.option("--out", "out_dir", type=OUT_DIR, default=None, help="Каталог для design.csv.")
@handle_errors
def design(spec: Path, out_dir: Path | None) -> None:
    """Выбор η и μ по допустимым отклонениям напряжения и частоты."""
    d = load_design(spec)
    report = design_report(d.spec)
    click.echo(f"eta: {report.eta:.6g}")
    click.echo(f"mu: {report.mu:.6g}")
    click.echo(f"V_max: {report.V_max:.6g}")
    click.echo(f"V_min: {report.V_min:.6g}")
    click.echo(f"omega_residual: {report.omega_residual:.3e}")
    click.echo(f"voltage_residual: {report.voltage_residual:.3e}")
    if out_dir is not None:
        manifest = RunManifest("design", str(spec), str(out_dir))
        manifest.record(write_frame(out_dir / "design.csv", report.to_frame()))
        manifest.write()


@main.command(name="linearize")
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--out", "out_dir", type=OUT_DIR, default=Path("out"), show_default=True)
@click.option("--mode", type=click.Choice(["normal", "fault"]), default="normal", show_default=True)
@click.option("--override", "overrides", multiple=True, metavar="ПУТЬ=ЗНАЧЕНИЕ")
@handle_errors
def linearize_cmd(scenario: Path, out_dir: Path, mode: str, overrides: tuple[str, ...]) -> None:
    """Рабочая точка и матрицы A, B малосигнальной модели."""
    s = load_scenario(scenario, overrides)
    m = linear_model(s, mode)
    A, B = m.to_frames()
    manifest = RunManifest("linearize", str(scenario), str(out_dir), dict(parse_override(o) for o in overrides))
    manifest.record(write_frame(out_dir / "A.csv", A.reset_index(names="state")))
    manifest.record(write_frame(out_dir / "B.csv", B.reset_index(names="state")))
    manifest.record(write_frame(out_dir / "operating_point.csv", m.op.to_frame()))
    manifest.write()
    _echo_frame(m.op.to_frame())


@main.command()
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--rvir-sweep", default=None, help="Список R_vir: проценты Z_base (0.5%) или омы.")
@click.option("--full", is_flag=True, help="Спектр полной матрицы A вместо A11.")
@click.option("--out", "out_dir", type=OUT_DIR, default=None)
@click.option("--override", "overrides", multiple=True, metavar="ПУТЬ=ЗНАЧЕНИЕ")
@handle_errors
def eigs(scenario: Path, rvir_sweep: str | None, full: bool, out_dir: Path | None,
         overrides: tuple[str, ...]) -> None:
    """Собственные значения линеаризованной модели (по умолчанию блока A11)."""
    s = load_scenario(scenario, overrides)
    block = "A" if full else "A11"
    cases = parse_rvir_list(rvir_sweep, s.ratings.z_base) if rvir_sweep else [("", None)]
    manifest = RunManifest("eigs", str(scenario), str(out_dir or ""), dict(parse_override(o) for o in overrides))
    for label, r_vir in cases:
        df = _eigs_frame(eigenvalues(linear_model(s, R_vir=r_vir), block))
        if label:
            click.echo(f"R_vir = {label} ({r_vir:.4g} Ом)")
        _echo_frame(df)
        if out_dir is not None:
            name = f"eigs_rvir_{label.replace('%', 'pct')}.csv" if label else "eigs.csv"
            manifest.record(write_frame(out_dir / name, df))
    if out_dir is not None:
        manifest.write()


@main.command()
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--wmin", type=float, default=0.1, show_default=True, help="Нижняя частота, рад/с.")
@click.option("--wmax", type=float, default=1e4, show_default=True, help="Верхняя частота, рад/с.")
@click.option("--points", type=click.IntRange(min=2), default=400, show_default=True)
@click.option("--measured", is_flag=True, help="Добавить измерение многотональной инжекцией.")
@click.option("--out", "out_dir", type=OUT_DIR, default=Path("out"), show_default=True)
@click.option("--override", "overrides", multiple=True, metavar="ПУТЬ=ЗНАЧЕНИЕ")
@handle_errors
def bode(scenario: Path, wmin: float, wmax: float, points: int, measured: bool, out_dir: Path,
         overrides: tuple[str, ...]) -> None:
    """Контурное усиление F_dc·G_OL регулятора звена постоянного тока."""
    if not 0 < wmin < wmax:
        raise click.BadParameter("Требуется 0 < wmin < wmax", param_hint="--wmin/--wmax")
    s = load_scenario(scenario, overrides)
    loop = dc_loop_gain(linear_model(s), s.controller.dcreg)
    df = bode_frame(loop, np.geomspace(wmin, wmax, points))
    manifest = RunManifest("bode", str(scenario), str(out_dir), dict(parse_override(o) for o in overrides))
    manifest.record(write_frame(out_dir / "bode.csv", df))
    manifest.record(write_plot_script(out_dir / "plot_bode.py", "bode.csv", "bode", s.name))
    frames = {"модель": df}
    if measured:
        fr = measure_frequency_response(s).to_frame()
        manifest.record(write_frame(out_dir / "bode_measured.csv", fr))
        frames["измерение"] = fr
        _echo_frame(fr)
    manifest.record(plot_bode(frames, out_dir / "bode.png", s.name))
    manifest.write()
    click.echo(f"Записано {len(df)} точек в {out_dir / 'bode.csv'}")


@main.command()
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--wmin", type=float, default=0.1, show_default=True)
@click.option("--wmax", type=float, default=1e4, show_default=True)
@click.option("--override", "overrides", multiple=True, metavar="ПУТЬ=ЗНАЧЕНИЕ")
@handle_errors
def margins(scenario: Path, wmin: float, wmax: float, overrides: tuple[str, ...]) -> None:
    """Запасы устойчивости контура звена постоянного тока."""
    s = load_scenario(scenario, overrides)
    report = loop_margins(dc_loop_gain(linear_model(s), s.controller.dcreg), wmin, wmax)
    for line in report.lines():
        click.echo(line)


@main.command()
@click.argument("spec", type=SCENARIO_PATH)
@click.option("--v-points", type=click.IntRange(min=1), default=None, help="Узлов по напряжению.")
@click.option("--w-points", type=click.IntRange(min=1), default=None, help="Узлов по частоте.")
@click.option("--out", "out_dir", type=OUT_DIR, default=Path("out"), show_default=True)
@click.option("--plot", is_flag=True, help="Сохранить PNG карты.")
@handle_errors
def powermap(spec: Path, v_points: int | None, w_points: int | None, out_dir: Path, plot: bool) -> None:
    """Карта мощностей в точке подключения по сетке напряжения и частоты сети."""
    d = load_design(spec)
    m = d.map
    if v_points is not None:
        m = replace(m, v_points=v_points)
    if w_points is not None:
        m = replace(m, w_points=w_points)
    df = power_limit_map(d.spec, d.plant, m, d.evi)
    manifest = RunManifest("powermap", str(spec), str(out_dir))
    manifest.record(write_frame(out_dir / "powermap.csv", df))
    if plot:
        manifest.record(plot_power_map(df, out_dir / "powermap.png", d.spec.ratings.P_rated))
    manifest.write()
    failed = int((~df["converged"]).sum())
    ok = df[df["converged"]]
    click.echo(f"Узлов: {len(df)}, не сошлось: {failed}")
    if len(ok):
        click.echo(f"max|P| = {ok['P_poc'].abs().max():.6g} Вт, max|Q| = {ok['Q_poc'].abs().max():.6g} вар")
    if failed > POWERMAP_FAIL_FRACTION * len(df):
        raise ConvergenceError("Слишком много несошедшихся узлов карты мощностей",
                               failed=failed, total=len(df))


def sweep_point(doc: dict, index: int, out_dir: str, window: float) -> dict[str, float]:
    """
    Один вариант перебора: моделирование, запись и установившиеся величины.

    Выполняется в отдельном процессе.
    """
    s = scenario_from_dict(doc)
    tr = run_scenario(s)
    _write_trace(tr, Path(out_dir), f"trace_{index:03d}.csv", True)
    summary = steady_state_extract(tr, window)
    return {"index": index, **summary.as_dict()}


@main.command()
@click.argument("scenario", type=SCENARIO_PATH)
@click.option("--param", default=None, help="Путь параметра через точку; без него — секция sweeps.")
@click.option("--values", default=None, help="Значения через запятую или JSON-массив.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Число процессов.")
@click.option("--window", type=float, default=0.1, show_default=True, help="Окно усреднения, с.")
@click.option("--out", "out_dir", type=OUT_DIR, default=Path("out"), show_default=True)
@handle_errors
def sweep(scenario: Path, param: str | None, values: str | None, workers: int | None, window: float,
          out_dir: Path) -> None:
    """Перебор значения параметра сценария с записью сводки установившихся величин."""
    doc = load_raw(scenario)
    if param is not None:
        if values is None:
            raise click.BadParameter("Для --param требуется --values", param_hint="--values")
        plan = [(param, v) for v in parse_values(values)]
    else:
        specs = scenario_from_dict(doc).sweeps
        if not specs:
            raise ConfigurationError("В сценарии нет секции sweeps, а --param не задан", path="sweeps")
        plan = [(sw.param, v) for sw in specs for v in sw.values]
    docs = [set_path(doc, p, v) for p, v in plan]
    for d in docs:
        scenario_from_dict(d)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = worker_limit(workers)
    logger.info("Перебор: %d вариантов, %d процессов", len(docs), n)
    with ProcessPoolExecutor(max_workers=n) as pool:
        futures = [pool.submit(sweep_point, d, i, str(out_dir), window) for i, d in enumerate(docs)]
        rows = [f.result() for f in futures]
    summary = pd.DataFrame(rows)
    summary.insert(1, "param", [p for p, _ in plan])
    summary.insert(2, "value", [json.dumps(v, sort_keys=True) for _, v in plan])
    manifest = RunManifest("sweep", str(scenario), str(out_dir))
    for i in range(len(docs)):
        manifest.record(out_dir / f"trace_{i:03d}.csv")
    manifest.record(write_frame(out_dir / "sweep_summary.csv", summary))
    manifest.write()
    _echo_frame(summary)


if __name__ == "__main__":
    main()
