"""
Detection metrics: DET points, EER and minimum detection cost.
File: src/services/metrics/detection.py

Decision rule: accept iff score >= threshold.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigError, MetricError
from core.logging import get_logger
from services.corpus.models import TrialLabel, TrialList
from services.scoring.models import ScoreList

logger = get_logger(__name__)


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    p_miss: float
    p_fa: float


@dataclass(frozen=True)
class DcfParams:
    """Weights of the detection cost miss_weight * p_miss + fa_weight * p_fa."""

    fa_weight: float = 100.0
    miss_weight: float = 1.0

    def validate(self) -> None:
        if not self.fa_weight > 0:
            raise ConfigError(f"fa_weight must be positive, got {self.fa_weight}")
        if not self.miss_weight > 0:
            raise ConfigError(f"miss_weight must be positive, got {self.miss_weight}")


@dataclass(frozen=True)
class DetectionSummary:
    trials: int
    targets: int
    nontargets: int
    eer: float
    min_dcf: float
    params: DcfParams


def split_by_label(scores: ScoreList, trials: TrialList) -> Tuple[np.ndarray, np.ndarray]:
    """
    Align scores to trials by (model, segment) and split them by label.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Target scores and nontarget scores

    Raises:
        MetricError: On unknown labels, unscored trials or a missing class
    """
    if trials.has_unknown:
        raise MetricError("Trial list has unknown labels; metrics need target/nontarget labels")
    lookup = scores.by_key()
    targets: List[float] = []
    nontargets: List[float] = []
    missing = []
    for trial in trials:
        key = (trial.model_id, trial.segment_id)
        if key not in lookup:
            missing.append(f"{trial.model_id},{trial.segment_id}")
            continue
        if trial.label is TrialLabel.TARGET:
            targets.append(lookup[key])
        else:
            nontargets.append(lookup[key])
    if missing:
        raise MetricError(
            f"{len(missing)} trial(s) have no score: {'; '.join(missing[:10])}"
        )
    return np.array(targets), np.array(nontargets)


def det_curve(
    target_scores: Sequence[float],
    nontarget_scores: Sequence[float],
    forced_misses: int = 0
) -> List[DetPoint]:
    """
    DET points at every distinct score and at +inf.

    p_miss counts targets below the threshold plus forced misses, over
    targets plus forced misses; p_fa counts nontargets at or above it.

    Args:
        target_scores: Scores of target trials
        nontarget_scores: Scores of nontarget trials
        forced_misses: Target trials missed at every threshold

    Returns:
        List[DetPoint]: Points in ascending threshold order

    Raises:
        MetricError: If there are no targets or no nontargets
    """
    tar = np.sort(np.asarray(target_scores, dtype=np.float64))
    non = np.sort(np.asarray(nontarget_scores, dtype=np.float64))
    n_tar = tar.size + forced_misses
    if n_tar == 0:
        raise MetricError("No target trials")
    if non.size == 0:
        raise MetricError("No nontarget trials")

    thresholds = np.append(np.unique(np.concatenate([tar, non])), np.inf)
    misses = np.searchsorted(tar, thresholds, side="left") + forced_misses
    false_alarms = non.size - np.searchsorted(non, thresholds, side="left")
    p_miss = misses / n_tar
    p_fa = false_alarms / non.size
    return [DetPoint(float(t), float(m), float(f)) for t, m, f in zip(thresholds, p_miss, p_fa)]


def eer_from_points(points: Sequence[DetPoint]) -> float:
    """
    Equal error rate by linear interpolation between the bracketing points.

    An exact crossing point is returned as is.
    """
    previous = None
    for point in points:
        gap = point.p_miss - point.p_fa
        if gap >= 0.0:
            if gap == 0.0 or previous is None:
                return point.p_miss
            prev_gap = previous.p_miss - previous.p_fa
            t = -prev_gap / (gap - prev_gap)
            return previous.p_miss + t * (point.p_miss - previous.p_miss)
        previous = point
    raise MetricError("DET curve never crosses p_miss = p_fa")


def min_cost(points: Sequence[DetPoint], params: DcfParams) -> float:
    return min(params.miss_weight * p.p_miss + params.fa_weight * p.p_fa for p in points)


def det_points(scores: ScoreList, trials: TrialList) -> List[DetPoint]:
    """DET points of a labeled score list."""
    return det_curve(*split_by_label(scores, trials))


def eer(scores: ScoreList, trials: TrialList) -> float:
    """Equal error rate in [0, 1]."""
    return eer_from_points(det_points(scores, trials))


def min_dcf(scores: ScoreList, trials: TrialList, params: DcfParams = DcfParams()) -> float:
    """Minimum over DET points of miss_weight * p_miss + fa_weight * p_fa, unnormalized."""
    params.validate()
    return min_cost(det_points(scores, trials), params)


def evaluate(scores: ScoreList, trials: TrialList, params: DcfParams = DcfParams()) -> DetectionSummary:
    """
    Compute EER and minDCF in one pass over the DET curve.

    Args:
        scores: Scores, aligned to trials by key
        trials: Labeled trials
        params: Cost weights

    Returns:
        DetectionSummary: Counts and metrics
    """
    params.validate()
    targets, nontargets = split_by_label(scores, trials)
    points = det_curve(targets, nontargets)
    summary = DetectionSummary(
        trials=len(trials),
        targets=targets.size,
        nontargets=nontargets.size,
        eer=eer_from_points(points),
        min_dcf=min_cost(points, params),
        params=params
    )
    logger.info(
        f"Evaluated scores:\n"
        f"Targets: {summary.targets}, nontargets: {summary.nontargets}, "
        f"EER: {summary.eer:.6g}, minDCF: {summary.min_dcf:.6g}"
    )
    return summary
