"""
Scores file reading and writing.
File: src/services/scoring/io.py
"""

import csv
import math
from pathlib import Path
from typing import List, Tuple, Union

from core.exceptions import CorpusFormatError
from core.logging import get_logger
from services.corpus.io import format_float
from .models import ScoreList

logger = get_logger(__name__)

SCORES_HEADER = ["model_id", "segment_id", "score"]


def save_scores(scores: ScoreList, path: Union[str, Path]) -> None:
    """Write scores as CSV with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SCORES_HEADER)
        for (model_id, segment_id), score in zip(scores.keys, scores.scores):
            writer.writerow([model_id, segment_id, format_float(score)])
    logger.info(f"Wrote {len(scores)} scores to {path}")


def load_scores(path: Union[str, Path]) -> ScoreList:
    """
    Read a scores CSV.

    Raises:
        CorpusFormatError: On a bad header, a non-numeric score or a duplicate pair
    """
    keys: List[Tuple[str, str]] = []
    values: List[float] = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != SCORES_HEADER:
            raise CorpusFormatError("header must be model_id,segment_id,score", str(path), 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise CorpusFormatError("expected 3 columns", str(path), line)
            model_id, segment_id, token = (cell.strip() for cell in row)
            try:
                score = float(token)
            except ValueError:
                raise CorpusFormatError(f"not a number: {token!r}", str(path), line) from None
            if math.isnan(score):
                raise CorpusFormatError("score is NaN", str(path), line)
            key = (model_id, segment_id)
            if key in seen:
                raise CorpusFormatError(f"duplicate score ({model_id}, {segment_id})", str(path), line)
            seen.add(key)
            keys.append(key)
            values.append(score)
    logger.info(f"Loaded {len(keys)} scores from {path}")
    return ScoreList.from_keys(keys, values)
