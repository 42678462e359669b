"""
Configuration management for gbbn solvers and benchmarks.
"""

import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional

from .interfaces import GBBNError


class ConfigurationError(GBBNError):
    """Raised when configuration validation fails."""
    pass


class Algorithm(Enum):
    """Available descent methods."""
    SDMO = "sdmo"
    GBB = "gbb"
    GBBN = "gbbn"


class InitialStepRule(Enum):
    """How the trial step of each line search is chosen."""
    BB = "bb"                  # BB step every iteration, look-ahead pair at k = 0
    UNIT_START = "unit_start"  # alpha = 1 at k = 0, BB afterwards
    UNIT = "unit"              # alpha = 1 every iteration


class SecantRule(Enum):
    """Which gradient difference feeds the BB step."""
    WEIGHTED = "weighted"
    DIRECTION = "direction"
    LITERAL = "literal"


class OutputFormat(Enum):
    """Report file formats."""
    CSV = "csv"
    JSON = "json"


class EtaGroup(Enum):
    """Problem groups sharing a recommended normalization constant."""
    ETA3 = "eta3"
    ETA40 = "eta40"


@dataclass
class LineSearchConfig:
    """Parameters of the Armijo and max-type nonmonotone line searches."""
    sigma: float = 1e-4
    delta: float = 0.5
    memory_M: int = 4
    max_backtracks: int = 60

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate line search parameters.

        Raises:
            ConfigurationError: If validation fails
        """
        if not 0 < self.sigma < 1:
            raise ConfigurationError(f"Sigma must lie in (0, 1), got {self.sigma}")

        if not 0 < self.delta < 1:
            raise ConfigurationError(f"Delta must lie in (0, 1), got {self.delta}")

        if not isinstance(self.memory_M, int) or self.memory_M < 1:
            raise ConfigurationError("Memory size M must be a positive integer")

        if not isinstance(self.max_backtracks, int) or self.max_backtracks < 1:
            raise ConfigurationError("Max backtracks must be a positive integer")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'sigma': self.sigma,
            'delta': self.delta,
            'memory_M': self.memory_M,
            'max_backtracks': self.max_backtracks,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LineSearchConfig':
        """Create LineSearchConfig from dictionary."""
        return cls(**data)


@dataclass
class DualConfig:
    """Frank-Wolfe settings for the simplex dual subproblem."""
    tol: float = 1e-12
    max_iter: Optional[int] = None
    away_steps: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate dual solver settings.

        Raises:
            ConfigurationError: If validation fails
        """
        if not self.tol > 0:
            raise ConfigurationError(f"Dual tolerance must be positive, got {self.tol}")

        if self.max_iter is not None and (not isinstance(self.max_iter, int) or self.max_iter < 0):
            raise ConfigurationError("Dual max_iter must be a nonnegative integer or None")

        if not isinstance(self.away_steps, bool):
            raise ConfigurationError("Away steps must be a boolean")

    def iteration_cap(self, m: int) -> int:
        """Iteration cap for an m-objective dual, 50 m + 100 unless set."""
        return self.max_iter if self.max_iter is not None else 50 * m + 100

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {'tol': self.tol, 'max_iter': self.max_iter, 'away_steps': self.away_steps}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DualConfig':
        """Create DualConfig from dictionary."""
        return cls(**data)


@dataclass
class SolverConfig:
    """Parameters shared by the SDMO, GBB and GBBN loops."""
    eps: float = 1e-8
    max_iter: int = 500
    alpha_min: float = 1e-3
    alpha_max: float = 1e3
    eta: Optional[float] = None  # None: problem default; 0: plain normalization
    ls: LineSearchConfig = field(default_factory=LineSearchConfig)
    dual: DualConfig = field(default_factory=DualConfig)
    initial_step: InitialStepRule = InitialStepRule.BB
    secant: SecantRule = SecantRule.WEIGHTED
    respect_box: bool = True
    record_trace: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate solver parameters.

        Raises:
            ConfigurationError: If validation fails
        """
        if not self.eps > 0:
            raise ConfigurationError(f"Eps must be positive, got {self.eps}")

        if not isinstance(self.max_iter, int) or self.max_iter < 0:
            raise ConfigurationError("Max iterations must be a nonnegative integer")

        if not 0 < self.alpha_min < self.alpha_max:
            raise ConfigurationError(
                f"Step bounds must satisfy 0 < alpha_min < alpha_max, "
                f"got {self.alpha_min} and {self.alpha_max}"
            )

        if self.eta is not None and self.eta < 0:
            raise ConfigurationError(f"Eta must be nonnegative, got {self.eta}")

        if not isinstance(self.ls, LineSearchConfig):
            raise ConfigurationError("Line search settings must be a LineSearchConfig instance")
        self.ls.validate()

        if not isinstance(self.dual, DualConfig):
            raise ConfigurationError("Dual settings must be a DualConfig instance")
        self.dual.validate()

        if not isinstance(self.initial_step, InitialStepRule):
            raise ConfigurationError("Initial step must be an InitialStepRule enum")

        if not isinstance(self.secant, SecantRule):
            raise ConfigurationError("Secant must be a SecantRule enum")

    def with_overrides(self, **kwargs) -> 'SolverConfig':
        """Return a validated copy with some fields replaced."""
        return replace(self, **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'eps': self.eps,
            'max_iter': self.max_iter,
            'alpha_min': self.alpha_min,
            'alpha_max': self.alpha_max,
            'eta': self.eta,
            'ls': self.ls.to_dict(),
            'dual': self.dual.to_dict(),
            'initial_step': self.initial_step.value,
            'secant': self.secant.value,
            'respect_box': self.respect_box,
            'record_trace': self.record_trace,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SolverConfig':
        """Create SolverConfig from dictionary."""
        data = dict(data)
        if 'ls' in data:
            data['ls'] = LineSearchConfig.from_dict(data['ls'])
        if 'dual' in data:
            data['dual'] = DualConfig.from_dict(data['dual'])
        if 'initial_step' in data:
            data['initial_step'] = InitialStepRule(data['initial_step'])
        if 'secant' in data:
            data['secant'] = SecantRule(data['secant'])
        return cls(**data)


def _default_problems() -> List[str]:
    from .problems import problem_names
    return list(problem_names())


def _default_algorithms() -> List[str]:
    return [algorithm.value for algorithm in Algorithm]


@dataclass
class BenchConfig:
    """Settings of a benchmark sweep."""
    problems: List[str] = field(default_factory=_default_problems)
    algorithms: List[str] = field(default_factory=_default_algorithms)
    runs: int = 200
    seed: int = 0
    eta_override: Optional[float] = None
    output_dir: str = "results"
    format: OutputFormat = OutputFormat.CSV
    workers: int = 1
    include_time: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate the sweep settings.

        Raises:
            ConfigurationError: If validation fails
        """
        from .problems import problem_names

        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigurationError("Runs must be a positive integer")

        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError("Seed must be a nonnegative integer")

        if not self.problems:
            raise ConfigurationError("At least one problem is required")

        known = set(problem_names())
        unknown = [name for name in self.problems if name not in known]
        if unknown:
            raise ConfigurationError(f"Unknown problems: {', '.join(unknown)}")

        if not self.algorithms:
            raise ConfigurationError("At least one algorithm is required")

        valid_algorithms = set(_default_algorithms())
        for name in self.algorithms:
            if name not in valid_algorithms:
                raise ConfigurationError(f"Unknown algorithm: {name}")

        if self.eta_override is not None and self.eta_override < 0:
            raise ConfigurationError("Eta override must be nonnegative")

        if not isinstance(self.format, OutputFormat):
            raise ConfigurationError("Format must be an OutputFormat enum")

        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigurationError("Workers must be a positive integer")

        if not isinstance(self.solver, SolverConfig):
            raise ConfigurationError("Solver settings must be a SolverConfig instance")
        self.solver.validate()

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'problems': list(self.problems),
            'algorithms': list(self.algorithms),
            'runs': self.runs,
            'seed': self.seed,
            'eta_override': self.eta_override,
            'output_dir': self.output_dir,
            'format': self.format.value,
            'workers': self.workers,
            'include_time': self.include_time,
            'solver': self.solver.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BenchConfig':
        """Create BenchConfig from dictionary."""
        data = dict(data)
        if 'format' in data:
            data['format'] = OutputFormat(data['format'])
        if 'solver' in data:
            data['solver'] = SolverConfig.from_dict(data['solver'])
        return cls(**data)

    def save_to_file(self, file_path: str) -> None:
        """
        Save the sweep configuration to a JSON file.

        Args:
            file_path: Path to save the configuration file
        """
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_from_file(cls, file_path: str) -> 'BenchConfig':
        """
        Load a sweep configuration from a JSON file.

        Args:
            file_path: Path to the configuration file

        Returns:
            BenchConfig instance

        Raises:
            ConfigurationError: If the file cannot be read or is invalid
        """
        if not os.path.exists(file_path):
            raise ConfigurationError(f"Configuration file not found: {file_path}")

        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Invalid JSON in configuration file {file_path}: {e}")

        try:
            return cls.from_dict(data)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid configuration in {file_path}: {e}")


@dataclass
class AppConfig:
    """Application-wide settings of the command line tool."""

    default_output_dir: str = "results"
    log_level: str = "INFO"
    float_format: str = ".10g"
    sampler_version: str = "pcg64-crc32-v1"

    # Gradient check defaults
    gradient_check_trials: int = 20
    gradient_check_seed: int = 7
    gradient_check_tol: float = 1e-5


# Global configuration instance
config = AppConfig()


def get_config() -> AppConfig:
    """Get the global configuration instance."""
    return config


def update_config(**kwargs) -> None:
    """Update configuration values."""
    global config
    for key, value in kwargs.items():
        if hasattr(config, key):
            setattr(config, key, value)
        else:
            raise ValueError(f"Unknown configuration key: {key}")


def reset_config() -> None:
    """Reset configuration to defaults."""
    global config
    config = AppConfig()
