import json

import pandas as pd
import pytest

from uvoclab import __version__
from uvoclab.manifest import RunManifest, atomic_write, file_sha256, write_frame, write_text


def test_file_sha256(tmp_path):
    path = tmp_path / "abc.txt"
    path.write_bytes(b"abc")
    assert file_sha256(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_manifest_record_and_verify(tmp_path):
    m = RunManifest("simulate", "scenario.json", str(tmp_path), overrides={"duration": 0.1})
    m.record(write_text(tmp_path / "run.txt", "x\n"))
    m.record(write_frame(tmp_path / "trace.csv", pd.DataFrame({"t": [0.0, 1.0], "P": [1.0, 2.0]})))
    assert set(m.files) == {"run.txt", "trace.csv"}
    assert m.verify()

    path = m.write()
    loaded = RunManifest.load(path)
    assert loaded == m
    assert loaded.version == __version__
    assert json.loads(path.read_text(encoding="utf-8"))["command"] == "simulate"

    (tmp_path / "run.txt").write_text("tampered\n", encoding="utf-8")
    assert not loaded.verify()


def test_manifest_detects_missing_file(tmp_path):
    m = RunManifest("eigs", "s.json", str(tmp_path))
    m.record(write_text(tmp_path / "eigs.csv", "re,im\n"))
    (tmp_path / "eigs.csv").unlink()
    assert not m.verify()


def test_atomic_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "out.csv"

    def failing(path):
        path.write_text("partial", encoding="utf-8")
        raise RuntimeError("прервано")

    with pytest.raises(RuntimeError):
        atomic_write(target, failing)
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_write_frame_without_index(tmp_path):
    path = write_frame(tmp_path / "sub" / "f.csv", pd.DataFrame({"a": [1, 2]}))
    assert path.read_text(encoding="utf-8") == "a\n1\n2\n"
