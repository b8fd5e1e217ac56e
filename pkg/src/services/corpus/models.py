"""
Corpus data model: labeled vector sets and trial lists.
File: src/services/corpus/models.py
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import InvariantError


def _frozen_array(values, ndim: int) -> np.ndarray:
    """Copy values into a read-only float64 array of the given rank."""
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise InvariantError(f"Expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SpeakerGroup:
    """All vectors of one speaker, in file order."""

    speaker_id: str
    vectors: np.ndarray
    segment_ids: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vectors", _frozen_array(self.vectors, 2))
        object.__setattr__(self, "segment_ids", tuple(str(s) for s in self.segment_ids))
        if self.vectors.shape[0] < 1:
            raise InvariantError(f"Speaker {self.speaker_id} has no vectors")
        if len(self.segment_ids) != self.vectors.shape[0]:
            raise InvariantError(
                f"Speaker {self.speaker_id}: {len(self.segment_ids)} segment ids "
                f"for {self.vectors.shape[0]} vectors"
            )
        if len(set(self.segment_ids)) != len(self.segment_ids):
            raise InvariantError(f"Speaker {self.speaker_id} has duplicate segment ids")

    @property
    def count(self) -> int:
        """Number of sessions (sI)."""
        return self.vectors.shape[0]

    @property
    def mean(self) -> np.ndarray:
        """Per-speaker mean vector."""
        return self.vectors.mean(axis=0)


@dataclass(frozen=True)
class LabeledVectorSet:
    """
    Speaker-labeled collection of fixed-dimension vectors.

    Immutable after construction, safe to share between workers.
    """

    dim: int
    speakers: Tuple[SpeakerGroup, ...]

    def __post_init__(self):
        object.__setattr__(self, "speakers", tuple(self.speakers))
        if self.dim < 1:
            raise InvariantError(f"Vector dimension must be positive, got {self.dim}")
        seen = set()
        for group in self.speakers:
            if group.vectors.shape[1] != self.dim:
                raise InvariantError(
                    f"Speaker {group.speaker_id} has vectors of length "
                    f"{group.vectors.shape[1]}, expected {self.dim}"
                )
            if group.speaker_id in seen:
                raise InvariantError(f"Duplicate speaker id: {group.speaker_id}")
            seen.add(group.speaker_id)

    @classmethod
    def from_arrays(
        cls,
        vectors: np.ndarray,
        speaker_ids: Sequence[str],
        segment_ids: Optional[Sequence[str]] = None
    ) -> "LabeledVectorSet":
        """
        Build a set from row vectors and per-row labels.

        Speakers keep their first-appearance order, rows keep their order
        within each speaker.

        Args:
            vectors: Array of shape (n, dim)
            speaker_ids: Speaker id of every row
            segment_ids: Segment id of every row (default: "<speaker>_<k>")

        Returns:
            LabeledVectorSet: The grouped set
        """
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] == 0:
            raise InvariantError("Expected a non-empty (n, dim) array of vectors")
        if len(speaker_ids) != vectors.shape[0]:
            raise InvariantError("One speaker id per vector is required")

        rows: Dict[str, List[int]] = {}
        for index, speaker_id in enumerate(speaker_ids):
            rows.setdefault(str(speaker_id), []).append(index)

        groups = []
        for speaker_id, indices in rows.items():
            if segment_ids is None:
                segments = [f"{speaker_id}_{k}" for k in range(len(indices))]
            else:
                segments = [segment_ids[i] for i in indices]
            groups.append(SpeakerGroup(speaker_id, vectors[indices], tuple(segments)))
        return cls(dim=vectors.shape[1], speakers=tuple(groups))

    @property
    def n_speakers(self) -> int:
        return len(self.speakers)

    @property
    def n_vectors(self) -> int:
        return sum(group.count for group in self.speakers)

    @property
    def speaker_ids(self) -> Tuple[str, ...]:
        return tuple(group.speaker_id for group in self.speakers)

    @property
    def counts(self) -> np.ndarray:
        """Sessions per speaker, in speaker order."""
        return np.array([group.count for group in self.speakers], dtype=np.int64)

    def stacked(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Stack all vectors speaker by speaker.

        Returns:
            Tuple[np.ndarray, np.ndarray]: (n, dim) matrix and the speaker
            index of every row; rows of one speaker are contiguous
        """
        matrix = np.vstack([group.vectors for group in self.speakers])
        labels = np.repeat(np.arange(self.n_speakers), self.counts)
        return matrix, labels

    def group(self, speaker_id: str) -> SpeakerGroup:
        for group in self.speakers:
            if group.speaker_id == speaker_id:
                return group
        raise KeyError(speaker_id)

    def segment_index(self) -> Dict[str, np.ndarray]:
        """
        Map every segment id to its vector.

        Raises:
            InvariantError: If a segment id is used by two speakers
        """
        index: Dict[str, np.ndarray] = {}
        for group in self.speakers:
            for segment_id, vector in zip(group.segment_ids, group.vectors):
                if segment_id in index:
                    raise InvariantError(f"Segment id {segment_id} is used by several speakers")
                index[segment_id] = vector
        return index

    def with_vectors(self, matrix: np.ndarray) -> "LabeledVectorSet":
        """
        Return a set with the same labels and replaced vectors.

        Args:
            matrix: New vectors in stacked() row order; the column count may differ

        Returns:
            LabeledVectorSet: Relabeled copy
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != self.n_vectors:
            raise InvariantError(
                f"Expected {self.n_vectors} rows, got array of shape {matrix.shape}"
            )
        groups = []
        start = 0
        for group in self.speakers:
            stop = start + group.count
            groups.append(SpeakerGroup(group.speaker_id, matrix[start:stop], group.segment_ids))
            start = stop
        return LabeledVectorSet(dim=matrix.shape[1], speakers=tuple(groups))

    def subset(self, speaker_ids: Iterable[str]) -> "LabeledVectorSet":
        """Return the set restricted to the given speakers, in set order."""
        wanted = set(speaker_ids)
        return LabeledVectorSet(
            dim=self.dim,
            speakers=tuple(g for g in self.speakers if g.speaker_id in wanted)
        )


class TrialLabel(str, Enum):
    """Trial label enum."""
    TARGET = "target"
    NONTARGET = "nontarget"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Trial:
    model_id: str
    segment_id: str
    label: TrialLabel = TrialLabel.UNKNOWN


@dataclass(frozen=True)
class TrialList:
    """Ordered list of unique (model, segment) trials."""

    entries: Tuple[Trial, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for trial in self.entries:
            if not isinstance(trial.label, TrialLabel):
                raise InvariantError(f"Invalid trial label: {trial.label!r}")
            key = (trial.model_id, trial.segment_id)
            if key in seen:
                raise InvariantError(f"Duplicate trial: {trial.model_id},{trial.segment_id}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def keys(self) -> List[Tuple[str, str]]:
        return [(t.model_id, t.segment_id) for t in self.entries]

    @property
    def labels(self) -> List[TrialLabel]:
        return [t.label for t in self.entries]

    @property
    def has_unknown(self) -> bool:
        return any(t.label is TrialLabel.UNKNOWN for t in self.entries)

    def take(self, indices: Iterable[int]) -> "TrialList":
        return TrialList(tuple(self.entries[i] for i in indices))
