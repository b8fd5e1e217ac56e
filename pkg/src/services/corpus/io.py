"""
Reading and writing vector and trial files.
File: src/services/corpus/io.py
"""

import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from core.exceptions import CorpusFormatError
from core.logging import get_logger
from .models import LabeledVectorSet, SpeakerGroup, Trial, TrialLabel, TrialList

logger = get_logger(__name__)

PathLike = Union[str, Path]

TRIALS_HEADER = ["model_id", "segment_id", "label"]


class VectorFormat(str, Enum):
    """Vector file format enum."""
    CSV = "csv"
    JSONL = "jsonl"

    @classmethod
    def from_path(cls, path: PathLike) -> "VectorFormat":
        """Guess the format from the file suffix (csv unless .jsonl/.json)."""
        suffix = Path(path).suffix.lower()
        return cls.JSONL if suffix in (".jsonl", ".json") else cls.CSV


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (lossless for float64)."""
    return format(float(value), ".17g")


class _VectorCollector:
    """Accumulates parsed rows and checks set invariants with line numbers."""

    def __init__(self, path: PathLike, dim: Optional[int] = None):
        self.path = str(path)
        self.expected_dim = dim
        self.dim: Optional[int] = dim
        self.rows: Dict[str, List[Tuple[str, List[float]]]] = {}
        self.seen = set()

    def add(self, line: int, speaker_id: str, segment_id: str, values: List[float]) -> None:
        if not speaker_id:
            raise CorpusFormatError("empty speaker_id", self.path, line)
        if not segment_id:
            raise CorpusFormatError("empty segment_id", self.path, line)
        if not values:
            raise CorpusFormatError("vector has no values", self.path, line)
        if not all(math.isfinite(v) for v in values):
            raise CorpusFormatError("vector has non-finite values", self.path, line)
        if self.dim is None:
            self.dim = len(values)
        elif len(values) != self.dim:
            raise CorpusFormatError(
                f"dimension mismatch: expected dim {self.dim}, got {len(values)} values",
                self.path,
                line
            )
        key = (speaker_id, segment_id)
        if key in self.seen:
            raise CorpusFormatError(
                f"duplicate (speaker_id, segment_id): ({speaker_id}, {segment_id})",
                self.path,
                line
            )
        self.seen.add(key)
        self.rows.setdefault(speaker_id, []).append((segment_id, values))

    def build(self) -> LabeledVectorSet:
        if not self.rows:
            raise CorpusFormatError("no vectors", self.path)
        groups = []
        for speaker_id, rows in self.rows.items():
            groups.append(SpeakerGroup(
                speaker_id=speaker_id,
                vectors=np.array([values for _, values in rows], dtype=np.float64),
                segment_ids=tuple(segment for segment, _ in rows)
            ))
        return LabeledVectorSet(dim=self.dim, speakers=tuple(groups))


def _parse_float(token: str, path: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise CorpusFormatError(f"not a number: {token!r}", path, line) from None


def _load_vectors_csv(path: PathLike, collector: _VectorCollector) -> None:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise CorpusFormatError("no vectors", str(path))
        if len(header) < 3 or header[0] != "speaker_id" or header[1] != "segment_id":
            raise CorpusFormatError(
                "header must be speaker_id,segment_id,v0,...", str(path), 1
            )
        header_dim = len(header) - 2
        if collector.expected_dim is not None and header_dim != collector.expected_dim:
            raise CorpusFormatError(
                f"dimension mismatch: header has {header_dim} value columns, "
                f"expected dim {collector.expected_dim}",
                str(path),
                1
            )
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 3:
                raise CorpusFormatError("malformed row", str(path), line)
            values = [_parse_float(cell, str(path), line) for cell in row[2:]]
            if len(values) != header_dim:
                raise CorpusFormatError(
                    f"dimension mismatch: expected dim {header_dim}, got {len(values)} values",
                    str(path),
                    line
                )
            collector.add(line, row[0].strip(), row[1].strip(), values)


def _load_vectors_jsonl(path: PathLike, collector: _VectorCollector) -> None:
    with open(path, encoding="utf-8") as handle:
        for line, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                speaker_id = str(record["speaker_id"])
                segment_id = str(record["segment_id"])
                values = [float(v) for v in record["vector"]]
            except (ValueError, KeyError, TypeError) as e:
                raise CorpusFormatError(f"malformed record: {e}", str(path), line) from None
            collector.add(line, speaker_id, segment_id, values)


def load_vectors(
    path: PathLike,
    fmt: Optional[Union[VectorFormat, str]] = None,
    dim: Optional[int] = None
) -> LabeledVectorSet:
    """
    Load a labeled vector set.

    Args:
        path: Vector file
        fmt: csv or jsonl (default: guessed from the suffix)
        dim: Expected vector dimension, e.g. the input dim of a trained model

    Returns:
        LabeledVectorSet: Vectors grouped by speaker, file order kept within speakers

    Raises:
        CorpusFormatError: On malformed rows, dimension mismatches, duplicate
            (speaker_id, segment_id) pairs or an empty file
    """
    fmt = VectorFormat(fmt) if fmt is not None else VectorFormat.from_path(path)
    collector = _VectorCollector(path, dim)
    if fmt is VectorFormat.CSV:
        _load_vectors_csv(path, collector)
    else:
        _load_vectors_jsonl(path, collector)
    vectors = collector.build()
    logger.info(
        f"Loaded vectors from {path}:\n"
        f"Speakers: {vectors.n_speakers}, vectors: {vectors.n_vectors}, dim: {vectors.dim}"
    )
    return vectors


def save_vectors(
    vectors: LabeledVectorSet,
    path: PathLike,
    fmt: Optional[Union[VectorFormat, str]] = None
) -> None:
    """
    Write a labeled vector set, speaker by speaker.

    Args:
        vectors: Set to write
        path: Output file
        fmt: csv or jsonl (default: guessed from the suffix)
    """
    fmt = VectorFormat(fmt) if fmt is not None else VectorFormat.from_path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        if fmt is VectorFormat.CSV:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["speaker_id", "segment_id"] + [f"v{k}" for k in range(vectors.dim)])
            for group in vectors.speakers:
                for segment_id, vector in zip(group.segment_ids, group.vectors):
                    writer.writerow(
                        [group.speaker_id, segment_id] + [format_float(v) for v in vector]
                    )
        else:
            for group in vectors.speakers:
                for segment_id, vector in zip(group.segment_ids, group.vectors):
                    record = {
                        "speaker_id": group.speaker_id,
                        "segment_id": segment_id,
                        "vector": [float(v) for v in vector]
                    }
                    handle.write(json.dumps(record) + "\n")
    logger.info(f"Wrote {vectors.n_vectors} vectors to {path}")


def load_trials(path: PathLike) -> TrialList:
    """
    Load a trial list.

    Args:
        path: CSV file with header model_id,segment_id,label

    Returns:
        TrialList: Trials in file order

    Raises:
        CorpusFormatError: On a bad header, unknown label token or duplicate trial
    """
    entries = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRIALS_HEADER:
            raise CorpusFormatError("header must be model_id,segment_id,label", str(path), 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise CorpusFormatError("expected 3 columns", str(path), line)
            model_id, segment_id, token = (cell.strip() for cell in row)
            try:
                label = TrialLabel(token.lower())
            except ValueError:
                raise CorpusFormatError(f"unrecognized label {token!r}", str(path), line) from None
            key = (model_id, segment_id)
            if key in seen:
                raise CorpusFormatError(
                    f"duplicate trial ({model_id}, {segment_id})", str(path), line
                )
            seen.add(key)
            entries.append(Trial(model_id, segment_id, label))
    logger.info(f"Loaded {len(entries)} trials from {path}")
    return TrialList(tuple(entries))


def save_trials(trials: TrialList, path: PathLike) -> None:
    """Write a trial list as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRIALS_HEADER)
        for trial in trials:
            writer.writerow([trial.model_id, trial.segment_id, trial.label.value])
