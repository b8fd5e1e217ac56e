"""
PLDA model, training configuration and training log types.
File: src/services/plda/models.py
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import ConfigError, InvariantError

DEFAULT_ALPHA = 1.7
DEFAULT_ITERATIONS = 10
DEFAULT_VARIANCE_FLOOR = 1e-8


def _frozen(values, shape_rank: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != shape_rank:
        raise InvariantError(f"{name} must be {shape_rank}-d, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvariantError(f"{name} has non-finite entries")
    array.setflags(write=False)
    return array


def _check_covariance(matrix: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > 1e-8 * scale:
        raise InvariantError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(matrix).min() <= 0.0:
        raise InvariantError(f"{name} is not positive definite")


@dataclass(frozen=True)
class PldaModel:
    """
    Simplified Gaussian PLDA: x = mu + F h + e, e ~ N(0, sigma_w).

    sigma_b is the residual covariance of the between-class model; single
    objective training sets it equal to sigma_w.
    """

    mu: np.ndarray
    F: np.ndarray
    sigma_w: np.ndarray
    sigma_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu, 1, "mu"))
        object.__setattr__(self, "F", _frozen(self.F, 2, "F"))
        object.__setattr__(self, "sigma_w", _frozen(self.sigma_w, 2, "sigma_w"))
        object.__setattr__(self, "sigma_b", _frozen(self.sigma_b, 2, "sigma_b"))

        d = self.mu.shape[0]
        if self.F.shape[0] != d:
            raise InvariantError(f"F has {self.F.shape[0]} rows, expected {d}")
        if self.F.shape[1] > d:
            raise InvariantError(f"Rank {self.F.shape[1]} exceeds dimension {d}")
        for name in ("sigma_w", "sigma_b"):
            matrix = getattr(self, name)
            if matrix.shape != (d, d):
                raise InvariantError(f"{name} has shape {matrix.shape}, expected {(d, d)}")
            _check_covariance(matrix, name)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    @property
    def r(self) -> int:
        return self.F.shape[1]


class SelectionStrategy(str, Enum):
    """Between-class vector selection enum."""
    NEAREST = "nearest"
    RANDOM = "random"


class TrainingMode(str, Enum):
    """Training objective enum."""
    SO = "so"
    MO = "mo"


@dataclass(frozen=True)
class TrainConfig:
    """PLDA training options."""

    rank: int
    alpha: float = DEFAULT_ALPHA
    iterations: int = DEFAULT_ITERATIONS
    selection: SelectionStrategy = SelectionStrategy.NEAREST
    seed: int = 0
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    ablate_between: bool = False

    def validate(self, dim: Optional[int] = None) -> None:
        """
        Check option ranges.

        Args:
            dim: Data dimension the rank must fit in, when known

        Raises:
            ConfigError: If an option is out of range
        """
        if self.rank < 1:
            raise ConfigError(f"rank must be positive, got {self.rank}")
        if dim is not None and self.rank > dim:
            raise ConfigError(f"rank {self.rank} exceeds data dimension {dim}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.variance_floor > 0:
            raise ConfigError(f"variance_floor must be positive, got {self.variance_floor}")
        SelectionStrategy(self.selection)


@dataclass(frozen=True)
class SpeakerBetweenSet:
    """Between-class vectors of one speaker, as row indices into the stacked set."""

    speaker_id: str
    own: Tuple[int, ...]
    impostors: Tuple[int, ...]

    @property
    def s_i(self) -> int:
        return len(self.own)

    @property
    def s_j(self) -> int:
        return len(self.impostors)

    @property
    def s_k(self) -> int:
        return self.s_i + self.s_j

    @property
    def indices(self) -> Tuple[int, ...]:
        """All y_sk rows: own vectors first, then the selected impostors."""
        return self.own + self.impostors


@dataclass(frozen=True)
class BetweenClassAssignment:
    strategy: SelectionStrategy
    speakers: Tuple[SpeakerBetweenSet, ...]

    def __len__(self) -> int:
        return len(self.speakers)


@dataclass(frozen=True)
class LogEntry:
    iteration: int
    f_value: float
    g_value: Optional[float] = None
    combined: Optional[float] = None


@dataclass
class TrainingLog:
    """One entry per completed EM iteration."""

    entries: List[LogEntry] = field(default_factory=list)

    def append(self, entry: LogEntry) -> None:
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def f_values(self) -> List[float]:
        return [entry.f_value for entry in self.entries]


@dataclass(frozen=True)
class IterationSnapshot:
    """State after the M-step of one iteration."""

    iteration: int
    F: np.ndarray
    sigma_w: np.ndarray
    sigma_b: Optional[np.ndarray]
    h: np.ndarray
    g: Optional[np.ndarray]
