"""
Графики результатов: временные диаграммы, логарифмические характеристики
и карта ограничения мощности.

Кроме изображений модуль генерирует самостоятельные скрипты построения,
которые кладутся рядом с CSV и строят те же графики без установки пакета.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .manifest import atomic_write, write_text  # noqa: E402


def plot_trace(frame: pd.DataFrame, path: str | Path, title: str = "") -> Path:
    """
    Временные диаграммы основных величин.

    Строит четыре графика: мощности P и Q, амплитуда |v|, частота ω и
    напряжение звена постоянного тока; флаг аварии x_f закрашивается.

    Args:
        frame (pd.DataFrame): Запись моделирования.
        path (str | Path): Путь к PNG.
        title (str): Заголовок.

    Returns:
        Path: Путь к изображению.
    """
    t = frame["t"].to_numpy()
    fig, axes = plt.subplots(4, 1, figsize=(10, 10), sharex=True)
    axes[0].plot(t, frame["P"], label="P")
    axes[0].plot(t, frame["Q"], label="Q")
    axes[0].set_ylabel("Мощность, Вт / вар")
    axes[0].legend()
    axes[1].plot(t, frame["V_p"])
    axes[1].set_ylabel("|v|, В")
    axes[2].plot(t, frame["omega"])
    axes[2].set_ylabel("ω, рад/с")
    axes[3].plot(t, frame["v_dc"])
    axes[3].set_ylabel("v_dc, В")
    axes[3].set_xlabel("t, с")
    fault = frame["x_f"].to_numpy() > 0
    if fault.any():
        for ax in axes:
            ax.fill_between(t, 0, 1, where=fault, color="tab:red", alpha=0.15,
                            transform=ax.get_xaxis_transform())
    for ax in axes:
        ax.grid(True)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_bode(frames: dict[str, pd.DataFrame], path: str | Path, title: str = "") -> Path:
    """
    Логарифмические амплитудная и фазовая характеристики.

    Args:
        frames (dict[str, pd.DataFrame]): Подпись → таблица omega, mag_db, phase_deg.
        path (str | Path): Путь к PNG.
        title (str): Заголовок.
    """
    fig, (ax_m, ax_p) = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
    for label, df in frames.items():
        style = "o" if len(df) < 50 else "-"
        ax_m.semilogx(df["omega"], df["mag_db"], style, label=label)
        ax_p.semilogx(df["omega"], df["phase_deg"], style, label=label)
    ax_m.axhline(0.0, color="k", linewidth=0.8)
    ax_m.set_ylabel("|L|, дБ")
    ax_p.set_ylabel("arg L, град")
    ax_p.set_xlabel("ω, рад/с")
    ax_m.legend()
    for ax in (ax_m, ax_p):
        ax.grid(True, which="both")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_power_map(frame: pd.DataFrame, path: str | Path, P_rated: float | None = None) -> Path:
    """
    Карта мощностей P и Q по сетке (V_g, ω_g).

    Несошедшиеся узлы не отображаются.

    Args:
        frame (pd.DataFrame): Результат ``power_limit_map``.
        path (str | Path): Путь к PNG.
        P_rated (float | None): Номинальная мощность для нормировки шкалы.
    """
    ok = frame[frame["converged"]]
    scale = P_rated or 1.0
    fig, axes = plt.subplots(1, 2, figsize=(12, 5))
    for ax, col in zip(axes, ("P_poc", "Q_poc")):
        pivot = ok.pivot_table(index="V_g", columns="omega_g", values=col)
        mesh = ax.pcolormesh(pivot.columns.to_numpy(), pivot.index.to_numpy(),
                             pivot.to_numpy() / scale, shading="auto", cmap="coolwarm")
        fig.colorbar(mesh, ax=ax, label=f"{col}" + (", о.е." if P_rated else ""))
        ax.set_xlabel("ω_g, рад/с")
        ax.set_ylabel("V_g, В")
        ax.set_title(col)
    fig.tight_layout()
    return _save(fig, path)


def _save(fig: plt.Figure, path: str | Path) -> Path:
    try:
        return atomic_write(path, lambda p: fig.savefig(p, dpi=120, format="png"))
    finally:
        plt.close(fig)


_TRACE_SCRIPT = '''"""Построение временных диаграмм из {csv}."""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

here = Path(__file__).resolve().parent
df = pd.read_csv(here / "{csv}")
fig, axes = plt.subplots(4, 1, figsize=(10, 10), sharex=True)
for ax, cols in zip(axes, (("P", "Q"), ("V_p",), ("omega",), ("v_dc",))):
    for c in cols:
        ax.plot(df["t"], df[c], label=c)
    ax.legend()
    ax.grid(True)
axes[-1].set_xlabel("t, s")
fig.suptitle("{title}")
fig.tight_layout()
if len(sys.argv) > 1:
    fig.savefig(sys.argv[1])
else:
    plt.show()
'''

_BODE_SCRIPT = '''"""Построение логарифмических характеристик из {csv}."""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

here = Path(__file__).resolve().parent
df = pd.read_csv(here / "{csv}")
fig, (ax_m, ax_p) = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
ax_m.semilogx(df["omega"], df["mag_db"])
ax_p.semilogx(df["omega"], df["phase_deg"])
ax_m.set_ylabel("dB")
ax_p.set_ylabel("deg")
ax_p.set_xlabel("rad/s")
for ax in (ax_m, ax_p):
    ax.grid(True, which="both")
fig.suptitle("{title}")
fig.tight_layout()
if len(sys.argv) > 1:
    fig.savefig(sys.argv[1])
else:
    plt.show()
'''


def write_plot_script(path: str | Path, csv_name: str, kind: str = "trace", title: str = "") -> Path:
    """
    Генерирует самостоятельный скрипт построения графика рядом с CSV.

    Args:
        path (str | Path): Путь к скрипту.
        csv_name (str): Имя CSV в том же каталоге.
        kind (str): ``trace`` или ``bode``.
        title (str): Заголовок графика.

    Returns:
        Path: Путь к скрипту.

    Raises:
        ValueError: Для неизвестного вида графика.
    """
    templates = {"trace": _TRACE_SCRIPT, "bode": _BODE_SCRIPT}
    if kind not in templates:
        raise ValueError(f"Неизвестный вид графика: {kind}")
    safe_title = title.replace('"', "'")
    return write_text(path, templates[kind].format(csv=csv_name, title=safe_title))
