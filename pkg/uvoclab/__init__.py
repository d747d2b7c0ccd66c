"""
uVOC-Lab — библиотека моделирования и анализа преобразователей с
унифицированным виртуальным осциллятором (uVOC): регулятор, усреднённая
модель силовой части, выбор параметров и малосигнальный анализ.
"""
# Метаданные пакета
__version__ = "1.0.0"
__author__ = "uVOC-Lab team"
__license__ = "MIT"

# Ошибки и записи
from .errors import UvocError, ConfigurationError
from .record import SpaceVector, VscRatings, Event, EventKind, DroopPoint

# Регулятор и силовая часть
from .oscillator import SvoParams
from .controller import ControllerConfig, controller_step
from .plant import PlantParams

# Сценарии и моделирование
from .scenario import Scenario
from .scenario_reader import ScenarioReader, load_scenario, load_design
from .simulator import Trace, run_scenario, steady_state_extract, measure_frequency_response

# Анализ
from .design import DesignSpec, design_eta_mu, power_limit_map
from .smallsignal import (
    SmallSignalParams, OperatingPoint, LinearModel, equilibrium_solve, linearize, eigenvalues,
    transfer_function, margins,
)
