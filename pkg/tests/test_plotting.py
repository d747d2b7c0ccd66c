import numpy as np
import pandas as pd
import pytest

from uvoclab.plotting import plot_bode, plot_power_map, plot_trace, write_plot_script

PNG_MAGIC = b"\x89PNG"


def _trace() -> pd.DataFrame:
    t = np.linspace(0.0, 0.1, 200)
    return pd.DataFrame({
        "t": t,
        "P": 5000.0 * np.ones_like(t),
        "Q": np.zeros_like(t),
        "V_p": 169.7 * np.ones_like(t),
        "omega": 376.99 * np.ones_like(t),
        "v_dc": 400.0 * np.ones_like(t),
        "x_f": (t > 0.05).astype(int),
    })


def test_plot_trace(tmp_path):
    path = plot_trace(_trace(), tmp_path / "trace.png", title="trace")
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_plot_bode(tmp_path):
    w = np.logspace(-1, 3, 100)
    model = pd.DataFrame({"omega": w, "mag_db": -20 * np.log10(w), "phase_deg": -90.0 * np.ones_like(w)})
    measured = model.iloc[::10].reset_index(drop=True)
    path = plot_bode({"model": model, "measured": measured}, tmp_path / "bode.png")
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_plot_power_map(tmp_path):
    V, W = np.meshgrid(np.linspace(114, 126, 5), np.linspace(374, 380, 4), indexing="ij")
    frame = pd.DataFrame({"V_g": V.ravel(), "omega_g": W.ravel(), "P_poc": W.ravel() - 377.0,
                          "Q_poc": V.ravel() - 120.0, "converged": True})
    frame.loc[0, "converged"] = False
    path = plot_power_map(frame, tmp_path / "map.png", P_rated=9000.0)
    assert path.read_bytes()[:4] == PNG_MAGIC


@pytest.mark.parametrize("kind", ["trace", "bode"])
def test_plot_script(tmp_path, kind):
    path = write_plot_script(tmp_path / "plot.py", "data.csv", kind, title='a "quoted" title')
    text = path.read_text(encoding="utf-8")
    assert 'here / "data.csv"' in text
    assert "a 'quoted' title" in text
    compile(text, str(path), "exec")


def test_plot_script_unknown_kind(tmp_path):
    with pytest.raises(ValueError):
        write_plot_script(tmp_path / "plot.py", "data.csv", "nyquist")
