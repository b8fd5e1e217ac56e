"""
Single- and multi-objective EM training of sGPLDA.
File: src/services/plda/trainer.py
"""

from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from core.exceptions import BracketError, ConfigError, NumericalError
from core.logging import get_logger
from services.corpus.models import LabeledVectorSet
from .em import (
    FactorStats,
    factor_posteriors,
    floor_covariance,
    group_sums,
    log_objective,
    mstep_covariances,
    mstep_F,
    posterior_factors,
)
from .models import (
    BetweenClassAssignment,
    IterationSnapshot,
    LogEntry,
    PldaModel,
    SelectionStrategy,
    TrainConfig,
    TrainingLog,
    TrainingMode,
)
from .selection import select_between_class

logger = get_logger(__name__)

IterationCallback = Callable[[IterationSnapshot], None]


class PldaTrainer:
    """EM driver over one training set."""

    def __init__(self, vectors: LabeledVectorSet, cfg: TrainConfig):
        """
        Prepare centered training data.

        Args:
            vectors: Training set, already preprocessed
            cfg: Training options

        Raises:
            ConfigError: On invalid options or fewer than 2 speakers
        """
        cfg.validate(vectors.dim)
        if vectors.n_speakers < 2:
            raise ConfigError(f"Training needs at least 2 speakers, got {vectors.n_speakers}")

        self.vectors = vectors
        self.cfg = cfg
        matrix, _ = vectors.stacked()
        self.mu = matrix.mean(axis=0)
        self.centered = matrix - self.mu
        self.counts = vectors.counts
        self.sums = group_sums(self.centered, self.counts)

    def initialize(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Start from the principal directions of the total covariance.

        Returns:
            Tuple[np.ndarray, np.ndarray]: F (top-r eigenvectors scaled by the
            square roots of their eigenvalues) and half the total covariance
        """
        total = self.centered.T @ self.centered / self.centered.shape[0]
        total = (total + total.T) / 2.0
        eigenvalues, eigenvectors = linalg.eigh(total)
        order = np.argsort(-eigenvalues, kind="stable")[:self.cfg.rank]
        directions = eigenvectors[:, order]
        for k in range(directions.shape[1]):
            pivot = int(np.argmax(np.abs(directions[:, k])))
            if directions[pivot, k] < 0:
                directions[:, k] = -directions[:, k]
        F = directions * np.sqrt(np.maximum(eigenvalues[order], 0.0))
        sigma = floor_covariance(total / 2.0, self.cfg.variance_floor)
        return F, sigma

    def _between_stats(self, assignment: BetweenClassAssignment) -> Tuple[np.ndarray, np.ndarray]:
        rows = np.concatenate([np.array(s.indices, dtype=np.int64) for s in assignment.speakers])
        counts = np.array([s.s_k for s in assignment.speakers], dtype=np.int64)
        return self.centered[rows], counts

    def train(
        self,
        mode: TrainingMode,
        on_iteration: Optional[IterationCallback] = None
    ) -> Tuple[PldaModel, TrainingLog]:
        """
        Run a fixed number of EM iterations.

        Args:
            mode: so or mo
            on_iteration: Called with the state after every M-step

        Returns:
            Tuple[PldaModel, TrainingLog]: Trained model and per-iteration objectives

        Raises:
            NumericalError: If an update fails; the message names the iteration
        """
        mode = TrainingMode(mode)
        cfg = self.cfg
        multi = mode is TrainingMode.MO

        between_centered = between_counts = between_sums = None
        if multi:
            assignment = select_between_class(self.vectors, cfg.selection, cfg.seed)
            between_centered, between_counts = self._between_stats(assignment)
            between_sums = group_sums(between_centered, between_counts)

        F, sigma_w = self.initialize()
        sigma_b = sigma_w.copy()
        log = TrainingLog()
        rank = cfg.rank

        logger.info(
            f"Starting {mode.value.upper()} training:\n"
            f"Speakers: {self.vectors.n_speakers}, vectors: {self.centered.shape[0]}, "
            f"dim: {self.vectors.dim}, rank: {rank}, iterations: {cfg.iterations}"
            + (f"\nAlpha: {cfg.alpha}, selection: {SelectionStrategy(cfg.selection).value}" if multi else "")
        )

        for iteration in range(1, cfg.iterations + 1):
            try:
                h, h_covariances = factor_posteriors(F, sigma_w, self.sums, self.counts)
                within = FactorStats(self.centered, self.counts, h, h_covariances)
                between = None
                if multi:
                    if cfg.ablate_between:
                        g = np.zeros((between_counts.shape[0], rank))
                    else:
                        # g enters the updates as a point estimate
                        g = posterior_factors(F, sigma_b, between_sums, between_counts)
                    between = FactorStats(between_centered, between_counts, g)

                F = mstep_F(within, between, cfg.alpha, iteration=iteration)
                sigma_w, new_sigma_b = mstep_covariances(within, between, F, cfg.variance_floor)
                sigma_b = new_sigma_b if multi else sigma_w

                f_value = log_objective(within, F, sigma_w)
                g_value = combined = None
                if multi:
                    g_value = log_objective(between, F, sigma_b)
                    combined = cfg.alpha * f_value - g_value
            except NumericalError as e:
                logger.error(f"{mode.value.upper()} training failed at iteration {iteration}: {e}")
                if isinstance(e, BracketError):
                    raise
                raise type(e)(f"Iteration {iteration}: {e}") from e

            log.append(LogEntry(iteration, f_value, g_value, combined))
            logger.info(
                f"EM iteration {iteration}/{cfg.iterations}:\n"
                f"f: {f_value:.10g}"
                + (f", g: {g_value:.10g}, combined: {combined:.10g}" if multi else "")
            )
            if on_iteration is not None:
                on_iteration(IterationSnapshot(
                    iteration=iteration,
                    F=F.copy(),
                    sigma_w=sigma_w.copy(),
                    sigma_b=sigma_b.copy() if multi else None,
                    h=h.copy(),
                    g=between.factors.copy() if multi else None
                ))

        model = PldaModel(mu=self.mu, F=F, sigma_w=sigma_w, sigma_b=sigma_b)
        return model, log


def train_so(
    vectors: LabeledVectorSet,
    cfg: TrainConfig,
    on_iteration: Optional[IterationCallback] = None
) -> Tuple[PldaModel, TrainingLog]:
    """
    Single-objective EM: alternate h, F and sigma_w updates.

    The returned model has sigma_b equal to sigma_w.
    """
    return PldaTrainer(vectors, cfg).train(TrainingMode.SO, on_iteration)


def train_mo(
    vectors: LabeledVectorSet,
    cfg: TrainConfig,
    on_iteration: Optional[IterationCallback] = None
) -> Tuple[PldaModel, TrainingLog]:
    """
    Multi-objective EM with a shared speaker space balanced by cfg.alpha.

    Between-class vectors are selected once, before the first iteration.
    """
    return PldaTrainer(vectors, cfg).train(TrainingMode.MO, on_iteration)


def train(
    vectors: LabeledVectorSet,
    cfg: TrainConfig,
    mode: TrainingMode,
    on_iteration: Optional[IterationCallback] = None
) -> Tuple[PldaModel, TrainingLog]:
    return PldaTrainer(vectors, cfg).train(mode, on_iteration)
