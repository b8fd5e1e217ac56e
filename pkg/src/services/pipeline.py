"""
Verification backend: length normalization, LDA, PLDA and scoring.
File: src/services/pipeline.py
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

from core.logging import get_logger
from services.corpus.models import LabeledVectorSet, TrialList
from services.plda.models import PldaModel, TrainConfig, TrainingLog, TrainingMode
from services.plda.storage import load_model, read_manifest, save_model
from services.plda.trainer import IterationCallback, train
from services.preprocess.lda import LdaTransform, apply_transform, fit_lda, length_normalize_set
from services.scoring.kernel import build_kernel
from services.scoring.models import EnrollPooling, KernelMode, ScoreList
from services.scoring.normalization import DEFAULT_COHORT_SIZE, adaptive_snorm
from services.scoring.trials import score_trials

logger = get_logger(__name__)


@dataclass(frozen=True)
class Backend:
    """A trained model with the preprocessing that feeds it."""

    model: PldaModel
    lda: Optional[LdaTransform] = None
    length_norm: bool = True
    alpha: Optional[float] = None

    @property
    def input_dim(self) -> int:
        """Dimension of the raw vectors the backend accepts."""
        return self.lda.mean.shape[0] if self.lda is not None else self.model.d

    def transform(self, vectors: LabeledVectorSet) -> LabeledVectorSet:
        """Map raw vectors into the PLDA space."""
        if self.length_norm:
            vectors = length_normalize_set(vectors)
        if self.lda is not None:
            vectors = apply_transform(self.lda, vectors, renormalize=self.length_norm)
        return vectors

    def score(
        self,
        enroll: LabeledVectorSet,
        test: LabeledVectorSet,
        trials: TrialList,
        kernel_mode: Union[KernelMode, str] = KernelMode.BETWEEN,
        pooling: Union[EnrollPooling, str] = EnrollPooling.MEAN_RENORM,
        cohort: Optional[LabeledVectorSet] = None,
        cohort_size: int = DEFAULT_COHORT_SIZE
    ) -> ScoreList:
        """
        Score raw enrollment and test vectors, with optional adaptive s-norm.

        Args:
            enroll: Raw enrollment vectors, one speaker group per model id
            test: Raw test vectors
            trials: Trials to score
            kernel_mode: between or within
            pooling: mean or avg-score
            cohort: Raw cohort vectors enabling s-norm
            cohort_size: Top cohort scores kept per id

        Returns:
            ScoreList: Scores in trial order
        """
        kernel = build_kernel(self.model, kernel_mode)
        enroll_t = self.transform(enroll)
        test_t = self.transform(test)
        scores = score_trials(kernel, enroll_t, test_t, trials, pooling, renormalize=self.length_norm)
        if cohort is not None:
            scores = adaptive_snorm(
                kernel,
                scores,
                enroll_t,
                test_t,
                self.transform(cohort),
                cohort_size,
                renormalize=self.length_norm
            )
        return scores

    def save(self, path: Union[str, Path]) -> None:
        save_model(self.model, self.lda, path, alpha=self.alpha, length_norm=self.length_norm)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Backend":
        model, lda = load_model(path)
        manifest = read_manifest(path)
        return cls(
            model=model,
            lda=lda,
            length_norm=bool(manifest.get("length_norm", True)),
            alpha=manifest.get("alpha")
        )


def fit_backend(
    train_set: LabeledVectorSet,
    cfg: TrainConfig,
    mode: Union[TrainingMode, str],
    lda_dim: Optional[int] = None,
    length_norm: bool = True,
    on_iteration: Optional[IterationCallback] = None
) -> Tuple[Backend, TrainingLog]:
    """
    Fit preprocessing and PLDA on raw training vectors.

    Order: length-normalize, fit and apply LDA, length-normalize again, train.

    Args:
        train_set: Raw training vectors
        cfg: PLDA training options
        mode: so or mo
        lda_dim: LDA output dimension, or None to skip LDA
        length_norm: Length-normalize before LDA and after it
        on_iteration: Training progress callback

    Returns:
        Tuple[Backend, TrainingLog]: Fitted backend and training log
    """
    mode = TrainingMode(mode)
    vectors = length_normalize_set(train_set) if length_norm else train_set
    lda = None
    if lda_dim is not None:
        lda = fit_lda(vectors, lda_dim)
        vectors = apply_transform(lda, vectors, renormalize=length_norm)

    model, log = train(vectors, cfg, mode, on_iteration)
    backend = Backend(
        model=model,
        lda=lda,
        length_norm=length_norm,
        alpha=cfg.alpha if mode is TrainingMode.MO else None
    )
    logger.info(
        f"Fitted {mode.value.upper()} backend:\n"
        f"Input dim: {train_set.dim}, PLDA dim: {model.d}, rank: {model.r}, "
        f"lda: {lda is not None}, length norm: {length_norm}"
    )
    return backend, log
