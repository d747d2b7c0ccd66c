from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Generic, TypeVar

import numpy as np

T = TypeVar("T")
S = TypeVar("S")


class Reader(ABC, Generic[T]):
    """
    Абстрактный базовый класс для чтения входных документов (сценариев, спецификаций).

    Предоставляет общий интерфейс и базовую логику открытия/закрытия файлов,
    а также поддержку контекстного менеджера (with-блоков).

    Attributes:
        filepath (Path): Путь к файлу, из которого читается документ.
        file (file object or None): Открытый файловый дескриптор или None, если файл закрыт.
    """

    def __init__(self, filepath: str | Path):
        """
        Инициализирует Reader с указанным путём к файлу.

        Args:
            filepath (str | Path): Путь к файлу в виде строки или объекта pathlib.Path.
        """
        self.filepath = Path(filepath)
        self.file = None

    @abstractmethod
    def read(self) -> T:
        """
        Читает и разбирает документ.

        Returns:
            T: Разобранный объект предметной области.

        Raises:
            NotImplementedError: Если метод не переопределён в подклассе.
        """
        pass

    def close(self):
        """
        Закрывает открытый файл, если он ещё не закрыт.
        """
        if self.file and not self.file.closed:
            self.file.close()
            self.file = None

    def __enter__(self):
        """
        Открывает файл в режиме чтения (UTF-8) и возвращает экземпляр Reader.

        Returns:
            Reader: Текущий экземпляр после открытия файла.
        """
        self.file = open(self.filepath, "r", encoding="utf-8")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """
        Закрывает файл при выходе из with-блока, независимо от исключения.
        """
        self.close()


class DiscreteBlock(ABC, Generic[S]):
    """
    Абстрактный дискретный блок регулятора, исполняемый раз в период дискретизации.

    Блок не хранит изменяемого состояния: состояние создаётся методом
    :meth:`initial_state` и передаётся явно в :meth:`step`, что делает шаг
    регулятора детерминированной чистой функцией.

    Attributes:
        dt (float): Период дискретизации, с.
    """

    def __init__(self, dt: float):
        """
        Args:
            dt (float): Период дискретизации, с. Должен быть положительным.

        Raises:
            ValueError: Если dt ≤ 0.
        """
        if dt <= 0:
            raise ValueError("Период дискретизации должен быть положительным")
        self.dt = dt

    @abstractmethod
    def initial_state(self, x0: Any = None) -> S:
        """
        Создаёт начальное состояние блока.

        Args:
            x0: Необязательное начальное входное значение, для которого блок
                стартует в установившемся режиме.

        Returns:
            S: Объект состояния.
        """
        pass

    @abstractmethod
    def step(self, state: S, x: Any) -> tuple[S, Any]:
        """
        Выполняет один шаг блока.

        Args:
            state (S): Текущее состояние.
            x: Входной отсчёт.

        Returns:
            tuple[S, Any]: Новое состояние и выходной отсчёт.
        """
        pass

    def frequency_response(self, omega: np.ndarray) -> np.ndarray:
        """
        Частотная характеристика дискретного блока на частотах ω.

        Args:
            omega (np.ndarray): Угловые частоты, рад/с.

        Returns:
            np.ndarray: Комплексные значения H(e^{jωT}).

        Raises:
            NotImplementedError: Если блок нелинейный или не поддерживает расчёт.
        """
        raise NotImplementedError(f"{type(self).__name__} не имеет частотной характеристики")
