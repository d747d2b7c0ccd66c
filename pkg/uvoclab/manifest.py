"""
Манифест запуска CLI: команда, входной файл, переопределения и список
записанных файлов с их SHA-256.

Файлы записываются атомарно: во временный файл рядом с целевым и затем
переименованием, поэтому прерванный запуск не оставляет частично
записанных результатов.
"""
import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import pandas as pd

from . import __version__


def file_sha256(path: str | Path) -> str:
    """
    SHA-256 содержимого файла.

    Args:
        path (str | Path): Путь к файлу.

    Returns:
        str: Шестнадцатеричный дайджест.
    """
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path: str | Path, writer: Callable[[Path], None]) -> Path:
    """
    Атомарная запись файла.

    Args:
        path (str | Path): Целевой путь.
        writer (Callable[[Path], None]): Функция, записывающая содержимое по переданному пути.

    Returns:
        Path: Целевой путь.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_text(path: str | Path, text: str) -> Path:
    """Атомарная запись текста (UTF-8, перевод строки ``\\n``)."""
    return atomic_write(path, lambda p: p.write_text(text, encoding="utf-8", newline="\n"))


def write_frame(path: str | Path, frame: pd.DataFrame) -> Path:
    """Атомарная запись таблицы в CSV без индекса."""
    return atomic_write(path, lambda p: frame.to_csv(p, index=False, lineterminator="\n"))


@dataclass
class RunManifest:
    """
    Описание запуска команды.

    Attributes:
        command (str): Имя команды CLI.
        input_path (str): Путь к сценарию или спецификации.
        out_dir (str): Каталог результатов.
        overrides (dict[str, Any]): Переопределения ``путь → значение``.
        files (dict[str, str]): Имя записанного файла → SHA-256.
        version (str): Версия пакета.
    """

    command: str
    input_path: str
    out_dir: str
    overrides: dict[str, Any] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)
    version: str = __version__

    def record(self, path: str | Path) -> None:
        """Добавляет записанный файл в манифест."""
        path = Path(path)
        self.files[path.name] = file_sha256(path)

    def verify(self) -> bool:
        """True, если хеши всех записанных файлов совпадают с содержимым на диске."""
        base = Path(self.out_dir)
        return all((base / name).is_file() and file_sha256(base / name) == digest
                   for name, digest in self.files.items())

    def to_json(self) -> str:
        """JSON с отсортированными ключами."""
        return json.dumps(asdict(self), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(self, name: str = "manifest.json") -> Path:
        """Записывает манифест в каталог результатов."""
        return write_text(Path(self.out_dir) / name, self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        """Читает манифест из JSON."""
        with open(path, encoding="utf-8") as f:
            return cls(**json.load(f))
