"""
Scoring data types.
File: src/services/scoring/models.py
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from core.exceptions import InvariantError


class KernelMode(str, Enum):
    """Total covariance used in the Q term."""
    BETWEEN = "between"
    WITHIN = "within"


class EnrollPooling(str, Enum):
    """Enrollment pooling enum."""
    MEAN_RENORM = "mean"
    SCORE_AVERAGE = "avg-score"


@dataclass(frozen=True)
class ScoringKernel:
    """Precomputed quadratic forms of the two-covariance score."""

    Q: np.ndarray
    P: np.ndarray
    mu: np.ndarray
    mode: KernelMode

    def __post_init__(self):
        for name in ("Q", "P", "mu"):
            array = np.array(getattr(self, name), dtype=np.float64, copy=True)
            if not np.all(np.isfinite(array)):
                raise InvariantError(f"Kernel matrix {name} has non-finite entries")
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "mode", KernelMode(self.mode))
        d = self.mu.shape[0]
        if self.Q.shape != (d, d) or self.P.shape != (d, d):
            raise InvariantError(f"Kernel matrices must be {d} x {d}")

    @property
    def d(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class ScoreList:
    """Scores aligned 1:1 with a list of (model, segment) trials."""

    model_ids: Tuple[str, ...]
    segment_ids: Tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "model_ids", tuple(self.model_ids))
        object.__setattr__(self, "segment_ids", tuple(self.segment_ids))
        scores = np.array(self.scores, dtype=np.float64, copy=True).reshape(-1)
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if not len(self.model_ids) == len(self.segment_ids) == scores.shape[0]:
            raise InvariantError("model_ids, segment_ids and scores must have equal lengths")
        if len(set(self.keys)) != len(self.model_ids):
            raise InvariantError("Score list has duplicate (model_id, segment_id) pairs")

    @classmethod
    def from_keys(cls, keys: Sequence[Tuple[str, str]], scores: Iterable[float]) -> "ScoreList":
        return cls(
            model_ids=tuple(k[0] for k in keys),
            segment_ids=tuple(k[1] for k in keys),
            scores=np.fromiter(scores, dtype=np.float64)
        )

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def keys(self) -> List[Tuple[str, str]]:
        return list(zip(self.model_ids, self.segment_ids))

    def by_key(self) -> Dict[Tuple[str, str], float]:
        return {key: float(score) for key, score in zip(self.keys, self.scores)}
