"""
Multi-target blacklist detection metrics (Top-S and Top-1 EER).
File: src/services/metrics/mce.py
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import MetricError
from core.logging import get_logger
from services.corpus.models import TrialLabel, TrialList
from services.scoring.models import ScoreList
from .detection import det_curve, eer_from_points

logger = get_logger(__name__)


def _check(score_matrix: np.ndarray, is_blacklist: Sequence[bool]):
    matrix = np.asarray(score_matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise MetricError("Score matrix must be a nonempty trials x blacklist-speakers array")
    labels = np.asarray(is_blacklist, dtype=bool)
    if labels.shape != (matrix.shape[0],):
        raise MetricError(f"Expected {matrix.shape[0]} blacklist flags, got {labels.shape[0]}")
    if not labels.any():
        raise MetricError("No blacklist trials")
    if labels.all():
        raise MetricError("No background trials")
    return matrix, labels


def top_s_eer(score_matrix: np.ndarray, is_blacklist: Sequence[bool]) -> float:
    """
    EER of the max-over-blacklist detection score.

    Args:
        score_matrix: Scores, one row per test trial, one column per blacklist speaker
        is_blacklist: Whether each trial comes from a blacklist speaker

    Returns:
        float: Top-S EER in [0, 1]
    """
    matrix, labels = _check(score_matrix, is_blacklist)
    detection = matrix.max(axis=1)
    return eer_from_points(det_curve(detection[labels], detection[~labels]))


def top_1_eer(
    score_matrix: np.ndarray,
    is_blacklist: Sequence[bool],
    true_speaker_index: Sequence[Optional[int]]
) -> float:
    """
    EER of the max-score detector conditioned on correct identification.

    A blacklist trial whose best column (first on ties) is not its true
    speaker is a miss at every threshold and never a false alarm.

    Args:
        score_matrix: Scores, one row per test trial, one column per blacklist speaker
        is_blacklist: Whether each trial comes from a blacklist speaker
        true_speaker_index: Column of the true speaker for blacklist trials
            (ignored for background trials)

    Returns:
        float: Top-1 EER in [0, 1]

    Raises:
        MetricError: If a blacklist trial has no valid identity
    """
    matrix, labels = _check(score_matrix, is_blacklist)
    if len(true_speaker_index) != matrix.shape[0]:
        raise MetricError(
            f"Expected {matrix.shape[0]} speaker indices, got {len(true_speaker_index)}"
        )
    detection = matrix.max(axis=1)
    identified = matrix.argmax(axis=1)

    correct = []
    forced = 0
    for row in np.flatnonzero(labels):
        truth = true_speaker_index[row]
        if truth is None or not 0 <= int(truth) < matrix.shape[1]:
            raise MetricError(f"Blacklist trial {row} has no valid true speaker index")
        if identified[row] == int(truth):
            correct.append(detection[row])
        else:
            forced += 1
    return eer_from_points(det_curve(correct, detection[~labels], forced_misses=forced))


@dataclass(frozen=True)
class BlacklistMatrix:
    """Trials arranged as test segments x blacklist models."""

    model_ids: Tuple[str, ...]
    segment_ids: Tuple[str, ...]
    scores: np.ndarray
    is_blacklist: np.ndarray
    true_index: Tuple[Optional[int], ...]


@dataclass(frozen=True)
class BlacklistSummary:
    segments: int
    blacklist_speakers: int
    blacklist_segments: int
    top_s_eer: float
    top_1_eer: float


def blacklist_matrix(scores: ScoreList, trials: TrialList) -> BlacklistMatrix:
    """
    Arrange labeled trials as a score matrix with one column per model.

    Every model of the trial list is a blacklist speaker and every segment
    must be tried against every model. A segment with a target trial comes
    from the blacklist speaker of that model; a segment without one is background.

    Raises:
        MetricError: On unknown labels, missing or unscored pairs, or a
            segment with more than one target model
    """
    if trials.has_unknown:
        raise MetricError("Trial list has unknown labels; metrics need target/nontarget labels")
    model_ids = tuple(dict.fromkeys(t.model_id for t in trials))
    segment_ids = tuple(dict.fromkeys(t.segment_id for t in trials))
    column = {model_id: k for k, model_id in enumerate(model_ids)}
    row = {segment_id: k for k, segment_id in enumerate(segment_ids)}

    matrix = np.full((len(segment_ids), len(model_ids)), np.nan)
    true_index: List[Optional[int]] = [None] * len(segment_ids)
    lookup = scores.by_key()
    unscored = []
    for trial in trials:
        key = (trial.model_id, trial.segment_id)
        if key not in lookup:
            unscored.append(f"{trial.model_id},{trial.segment_id}")
            continue
        i, j = row[trial.segment_id], column[trial.model_id]
        matrix[i, j] = lookup[key]
        if trial.label is TrialLabel.TARGET:
            if true_index[i] is not None:
                raise MetricError(f"Segment {trial.segment_id} is a target of more than one model")
            true_index[i] = j
    if unscored:
        raise MetricError(f"{len(unscored)} trial(s) have no score: {'; '.join(unscored[:10])}")

    gaps = np.argwhere(np.isnan(matrix))
    if gaps.size:
        shown = "; ".join(f"{model_ids[j]},{segment_ids[i]}" for i, j in gaps[:10])
        raise MetricError(f"{len(gaps)} model/segment pair(s) missing from the trials: {shown}")

    is_blacklist = np.array([index is not None for index in true_index], dtype=bool)
    return BlacklistMatrix(model_ids, segment_ids, matrix, is_blacklist, tuple(true_index))


def evaluate_blacklist(scores: ScoreList, trials: TrialList) -> BlacklistSummary:
    """
    Top-S and Top-1 EER of a complete model x segment trial grid.

    Args:
        scores: Scores, aligned to trials by key
        trials: Labeled trials; their models form the blacklist

    Returns:
        BlacklistSummary: Counts and both metrics
    """
    grid = blacklist_matrix(scores, trials)
    summary = BlacklistSummary(
        segments=len(grid.segment_ids),
        blacklist_speakers=len(grid.model_ids),
        blacklist_segments=int(grid.is_blacklist.sum()),
        top_s_eer=top_s_eer(grid.scores, grid.is_blacklist),
        top_1_eer=top_1_eer(grid.scores, grid.is_blacklist, grid.true_index)
    )
    logger.info(
        f"Evaluated blacklist detection:\n"
        f"Models: {summary.blacklist_speakers}, segments: {summary.segments} "
        f"({summary.blacklist_segments} blacklisted)\n"
        f"Top-S EER: {summary.top_s_eer:.4%}, Top-1 EER: {summary.top_1_eer:.4%}"
    )
    return summary
