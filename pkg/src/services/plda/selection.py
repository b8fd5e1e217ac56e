"""
Between-class vector selection for multi-objective training.
File: src/services/plda/selection.py
"""

from typing import List, Union

import numpy as np

from core.exceptions import ConfigError, SelectionError
from core.logging import get_logger
from core.rng import make_rng
from services.corpus.models import LabeledVectorSet
from .models import BetweenClassAssignment, SelectionStrategy, SpeakerBetweenSet

logger = get_logger(__name__)


def _nearest(matrix: np.ndarray, candidates: np.ndarray, anchor: np.ndarray, count: int) -> np.ndarray:
    products = matrix[candidates] @ anchor
    # stable sort keeps ascending candidate index among equal products
    order = np.argsort(-products, kind="stable")
    return candidates[order[:count]]


def select_between_class(
    vectors: LabeledVectorSet,
    strategy: Union[SelectionStrategy, str],
    seed: int = 0
) -> BetweenClassAssignment:
    """
    Pick sI impostor vectors for every speaker.

    nearest: the sI vectors of other speakers with the largest inner product
    with the speaker's mean vector. random: sI vectors of other speakers
    drawn uniformly without replacement, speakers visited in set order.

    Args:
        vectors: Training set (as fed to PLDA)
        strategy: nearest or random
        seed: Generator seed for random selection

    Returns:
        BetweenClassAssignment: Row indices into vectors.stacked()

    Raises:
        ConfigError: If the set has fewer than 2 speakers
        SelectionError: If a speaker has fewer candidates than vectors
    """
    strategy = SelectionStrategy(strategy)
    if vectors.n_speakers < 2:
        raise ConfigError(
            f"Between-class selection needs at least 2 speakers, got {vectors.n_speakers}"
        )

    matrix, labels = vectors.stacked()
    rng = make_rng(seed) if strategy is SelectionStrategy.RANDOM else None
    speakers: List[SpeakerBetweenSet] = []
    for index, group in enumerate(vectors.speakers):
        own = np.flatnonzero(labels == index)
        candidates = np.flatnonzero(labels != index)
        if candidates.size < group.count:
            raise SelectionError(
                f"Speaker {group.speaker_id} has {group.count} vectors but only "
                f"{candidates.size} between-class candidates"
            )
        if strategy is SelectionStrategy.NEAREST:
            chosen = _nearest(matrix, candidates, matrix[own].mean(axis=0), group.count)
        else:
            chosen = rng.choice(candidates, size=group.count, replace=False)
        speakers.append(SpeakerBetweenSet(
            speaker_id=group.speaker_id,
            own=tuple(int(i) for i in own),
            impostors=tuple(int(i) for i in chosen)
        ))

    logger.info(
        f"Selected between-class vectors:\n"
        f"Strategy: {strategy.value}, speakers: {len(speakers)}"
    )
    return BetweenClassAssignment(strategy=strategy, speakers=tuple(speakers))
