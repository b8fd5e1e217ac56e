"""
Symmetric score normalization (s-norm) with adaptive cohorts.
File: src/services/scoring/normalization.py
"""

from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigError, InvariantError, NumericalError, UnresolvedIdError
from core.logging import get_logger
from services.corpus.models import LabeledVectorSet
from .kernel import score_matrix
from .models import ScoreList, ScoringKernel
from .trials import pool_vectors

logger = get_logger(__name__)

DEFAULT_COHORT_SIZE = 200


def _cohort_stats(scores: Mapping[str, np.ndarray], key: str, side: str) -> Tuple[float, float]:
    if key not in scores:
        raise UnresolvedIdError(f"{side} cohort", [key])
    values = np.asarray(scores[key], dtype=np.float64)
    if values.size < 2:
        raise InvariantError(f"{side} {key} has {values.size} cohort scores, need at least 2")
    std = float(np.std(values))
    if std == 0.0:
        raise NumericalError(f"Zero cohort score variance for {side} {key}")
    return float(np.mean(values)), std


def snorm(
    raw: ScoreList,
    cohort_model_scores: Mapping[str, np.ndarray],
    cohort_test_scores: Mapping[str, np.ndarray]
) -> ScoreList:
    """
    Normalize scores as 0.5 [(s - m1)/s1 + (s - m2)/s2].

    (m1, s1) are the mean and population standard deviation of the model's
    cohort scores, (m2, s2) those of the test segment's.

    Args:
        raw: Raw scores
        cohort_model_scores: Cohort scores per model id
        cohort_test_scores: Cohort scores per segment id

    Returns:
        ScoreList: Normalized scores, same trial order

    Raises:
        NumericalError: If a cohort has zero variance (names the id)
        UnresolvedIdError: If an id has no cohort scores
    """
    model_stats: Dict[str, Tuple[float, float]] = {}
    test_stats: Dict[str, Tuple[float, float]] = {}
    normalized = np.empty(len(raw))
    for k, (model_id, segment_id) in enumerate(raw.keys):
        if model_id not in model_stats:
            model_stats[model_id] = _cohort_stats(cohort_model_scores, model_id, "model")
        if segment_id not in test_stats:
            test_stats[segment_id] = _cohort_stats(cohort_test_scores, segment_id, "segment")
        m1, s1 = model_stats[model_id]
        m2, s2 = test_stats[segment_id]
        score = raw.scores[k]
        normalized[k] = 0.5 * ((score - m1) / s1 + (score - m2) / s2)
    return ScoreList(raw.model_ids, raw.segment_ids, normalized)


def cohort_vectors(
    cohort: LabeledVectorSet,
    renormalize: bool = True
) -> Tuple[Tuple[str, ...], np.ndarray]:
    """Pool each cohort speaker into one vector, speakers sorted by id."""
    groups = sorted(cohort.speakers, key=lambda g: g.speaker_id)
    return (
        tuple(g.speaker_id for g in groups),
        np.array([pool_vectors(g.vectors, renormalize) for g in groups])
    )


def cohort_scores(
    kernel: ScoringKernel,
    ids: Sequence[str],
    vectors: np.ndarray,
    cohort: LabeledVectorSet,
    top_n: int = DEFAULT_COHORT_SIZE,
    renormalize: bool = True
) -> Dict[str, np.ndarray]:
    """
    Score vectors against the pooled cohort and keep the top_n highest scores.

    Ties among cohort scores are broken by cohort speaker id order.

    Args:
        kernel: Scoring kernel
        ids: Id of every row of vectors
        vectors: Pooled enrollment or test vectors, one per row
        cohort: Cohort set (typically the training speakers)
        top_n: Cohort size per id
        renormalize: Length-normalize pooled cohort means

    Returns:
        Dict[str, np.ndarray]: Selected cohort scores per id, descending
    """
    if top_n < 2:
        raise ConfigError(f"Cohort size must be at least 2, got {top_n}")
    if len(ids) == 0:
        return {}
    _, pooled = cohort_vectors(cohort, renormalize)
    matrix = score_matrix(kernel, np.asarray(vectors), pooled)
    selected = {}
    for row, key in enumerate(ids):
        order = np.argsort(-matrix[row], kind="stable")[:top_n]
        selected[key] = matrix[row, order]
    return selected


def adaptive_snorm(
    kernel: ScoringKernel,
    raw: ScoreList,
    models: LabeledVectorSet,
    tests: LabeledVectorSet,
    cohort: LabeledVectorSet,
    top_n: int = DEFAULT_COHORT_SIZE,
    renormalize: bool = True
) -> ScoreList:
    """
    s-norm with the top_n nearest cohort scores on both trial sides.

    The enrollment side uses each model's pooled vector, the test side each
    segment's vector.
    """
    model_ids = sorted(set(raw.model_ids))
    segment_ids = sorted(set(raw.segment_ids))
    groups = {g.speaker_id: g for g in models.speakers}
    missing = [m for m in model_ids if m not in groups]
    if missing:
        raise UnresolvedIdError("model", missing)
    segments = tests.segment_index()
    missing = [s for s in segment_ids if s not in segments]
    if missing:
        raise UnresolvedIdError("segment", missing)

    model_vectors = np.array([pool_vectors(groups[m].vectors, renormalize) for m in model_ids])
    test_vectors = np.array([segments[s] for s in segment_ids])
    model_cohorts = cohort_scores(kernel, model_ids, model_vectors, cohort, top_n, renormalize)
    test_cohorts = cohort_scores(kernel, segment_ids, test_vectors, cohort, top_n, renormalize)
    logger.info(
        f"Applying adaptive s-norm:\n"
        f"Cohort speakers: {cohort.n_speakers}, top-n: {top_n}"
    )
    return snorm(raw, model_cohorts, test_cohorts)
