"""
Batch trial scoring with multi-session enrollment.
File: src/services/scoring/trials.py
"""

from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from core.exceptions import UnresolvedIdError
from core.logging import get_logger
from services.corpus.models import LabeledVectorSet, TrialList
from services.preprocess.lda import length_normalize
from .kernel import score_matrix
from .models import EnrollPooling, ScoreList, ScoringKernel

logger = get_logger(__name__)


def pool_vectors(vectors: np.ndarray, renormalize: bool = True) -> np.ndarray:
    """
    Pool a model's enrollment vectors into one vector.

    A single vector is returned unchanged; several are averaged and, when
    renormalize is set, length-normalized.
    """
    vectors = np.atleast_2d(vectors)
    if vectors.shape[0] == 1:
        return vectors[0].copy()
    pooled = vectors.mean(axis=0)
    return length_normalize(pooled) if renormalize else pooled


def pooled_models(
    models: LabeledVectorSet,
    model_ids: Sequence[str],
    renormalize: bool = True
) -> np.ndarray:
    """Pooled enrollment vectors of the given models, one row each."""
    groups = {g.speaker_id: g for g in models.speakers}
    return np.array([pool_vectors(groups[m].vectors, renormalize) for m in model_ids])


def resolve_trials(
    models: LabeledVectorSet,
    tests: LabeledVectorSet,
    trials: TrialList
) -> Tuple[List[str], List[str], Dict[str, np.ndarray]]:
    """
    Check that every trial id resolves.

    Returns:
        Tuple: Sorted unique model ids, sorted unique segment ids, and the
        segment-to-vector index of the test set

    Raises:
        UnresolvedIdError: Listing missing model ids, or else missing segment ids
    """
    segments = tests.segment_index()
    known_models = set(models.speaker_ids)
    model_ids = sorted({t.model_id for t in trials})
    segment_ids = sorted({t.segment_id for t in trials})

    missing_models = [m for m in model_ids if m not in known_models]
    if missing_models:
        logger.error(f"Trials reference {len(missing_models)} unknown models")
        raise UnresolvedIdError("model", missing_models)
    missing_segments = [s for s in segment_ids if s not in segments]
    if missing_segments:
        logger.error(f"Trials reference {len(missing_segments)} unknown segments")
        raise UnresolvedIdError("segment", missing_segments)
    return model_ids, segment_ids, segments


def score_trials(
    kernel: ScoringKernel,
    models: LabeledVectorSet,
    tests: LabeledVectorSet,
    trials: TrialList,
    enroll_pooling: Union[EnrollPooling, str] = EnrollPooling.MEAN_RENORM,
    renormalize: bool = True
) -> ScoreList:
    """
    Score a trial list.

    The score matrix is computed over sorted unique model and segment ids,
    so a trial's score does not depend on the order of the trial list.

    Args:
        kernel: Scoring kernel
        models: Enrollment set, one speaker group per model id
        tests: Test set, looked up by segment id
        trials: Trials to score
        enroll_pooling: mean (pool then score) or avg-score (score then average)
        renormalize: Length-normalize pooled enrollment means

    Returns:
        ScoreList: Scores in trial order

    Raises:
        UnresolvedIdError: If a trial id is missing from models or tests
    """
    enroll_pooling = EnrollPooling(enroll_pooling)
    model_ids, segment_ids, segments = resolve_trials(models, tests, trials)
    if not len(trials):
        return ScoreList((), (), np.zeros(0))
    test_matrix = np.array([segments[s] for s in segment_ids])

    if enroll_pooling is EnrollPooling.MEAN_RENORM:
        matrix = score_matrix(kernel, pooled_models(models, model_ids, renormalize), test_matrix)
    else:
        by_id = {g.speaker_id: g.vectors for g in models.speakers}
        groups = [by_id[m] for m in model_ids]
        every = score_matrix(kernel, np.vstack(groups), test_matrix)
        bounds = np.cumsum([0] + [g.shape[0] for g in groups])
        matrix = np.array([
            every[bounds[k]:bounds[k + 1]].mean(axis=0) for k in range(len(groups))
        ])

    model_row = {m: k for k, m in enumerate(model_ids)}
    segment_col = {s: k for k, s in enumerate(segment_ids)}
    scores = [matrix[model_row[t.model_id], segment_col[t.segment_id]] for t in trials]
    logger.info(
        f"Scored trials:\n"
        f"Trials: {len(trials)}, models: {len(model_ids)}, segments: {len(segment_ids)}, "
        f"kernel: {kernel.mode.value}, pooling: {enroll_pooling.value}"
    )
    return ScoreList.from_keys(trials.keys, scores)
