"""
Synthetic corpora sampled from the sGPLDA generative model.
File: src/services/corpus/synthetic.py
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from core.exceptions import ConfigError
from core.logging import get_logger
from core.rng import make_rng
from services.plda.models import DEFAULT_VARIANCE_FLOOR, PldaModel
from .models import LabeledVectorSet, SpeakerGroup, Trial, TrialLabel, TrialList

logger = get_logger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    n_speakers: int
    sessions_per_speaker: int
    dim: int
    rank: int
    noise_scale: float = 1.0
    seed: int = 0
    n_clusters: int = 0
    cluster_spread: float = 1.0

    def validate(self) -> None:
        """
        Check generator options.

        Raises:
            ConfigError: If an option is out of range
        """
        for name in ("n_speakers", "sessions_per_speaker", "dim", "rank"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.rank > self.dim:
            raise ConfigError(f"rank {self.rank} exceeds dim {self.dim}")
        if not self.noise_scale >= 0:
            raise ConfigError(f"noise_scale must be non-negative, got {self.noise_scale}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n_clusters < 0:
            raise ConfigError(f"n_clusters must be non-negative, got {self.n_clusters}")
        if not 0 < self.cluster_spread <= 1:
            raise ConfigError(f"cluster_spread must be in (0, 1], got {self.cluster_spread}")


@dataclass(frozen=True)
class VerificationTask:
    """Training data plus a held-out enrollment/test/trials split."""

    train: LabeledVectorSet
    enroll: LabeledVectorSet
    test: LabeledVectorSet
    trials: TrialList
    truth: PldaModel


class _SpeakerSampler:
    """Draws speakers in a fixed order from one generator."""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = make_rng(cfg.seed)
        self.F = self.rng.standard_normal((cfg.dim, cfg.rank))
        self.centers = None
        if cfg.n_clusters > 0:
            self.centers = self.rng.standard_normal((cfg.n_clusters, cfg.rank))
        self.drawn = 0

    def factor(self) -> np.ndarray:
        z = self.rng.standard_normal(self.cfg.rank)
        if self.centers is None:
            return z
        center = self.centers[self.drawn % self.cfg.n_clusters]
        rho = self.cfg.cluster_spread
        return np.sqrt(1.0 - rho ** 2) * center + rho * z

    def sessions(self, h: np.ndarray, count: int) -> np.ndarray:
        noise = self.rng.standard_normal((count, self.cfg.dim)) * self.cfg.noise_scale
        return (self.F @ h)[np.newaxis, :] + noise

    def speaker(self, count: int) -> np.ndarray:
        h = self.factor()
        self.drawn += 1
        return self.sessions(h, count)

    def truth(self) -> PldaModel:
        variance = max(self.cfg.noise_scale ** 2, DEFAULT_VARIANCE_FLOOR)
        sigma = variance * np.eye(self.cfg.dim)
        return PldaModel(mu=np.zeros(self.cfg.dim), F=self.F, sigma_w=sigma, sigma_b=sigma)


def _speaker_id(prefix: str, index: int) -> str:
    return f"{prefix}{index:05d}"


def generate_synthetic(cfg: SynthConfig) -> Tuple[LabeledVectorSet, PldaModel]:
    """
    Sample a labeled set from x = mu + F h_s + e with mu = 0.

    F has standard normal entries, h_s ~ N(0, I) (or the clustered variant),
    e ~ N(0, noise_scale^2 I). Deterministic given cfg.

    Args:
        cfg: Generator options

    Returns:
        Tuple[LabeledVectorSet, PldaModel]: Data and ground-truth model
    """
    cfg.validate()
    sampler = _SpeakerSampler(cfg)
    groups = []
    for s in range(cfg.n_speakers):
        speaker_id = _speaker_id("spk", s)
        vectors = sampler.speaker(cfg.sessions_per_speaker)
        groups.append(SpeakerGroup(
            speaker_id,
            vectors,
            tuple(f"{speaker_id}_{i}" for i in range(cfg.sessions_per_speaker))
        ))
    logger.info(
        f"Generated synthetic set:\n"
        f"Speakers: {cfg.n_speakers}, sessions: {cfg.sessions_per_speaker}, "
        f"dim: {cfg.dim}, rank: {cfg.rank}, seed: {cfg.seed}"
    )
    return LabeledVectorSet(dim=cfg.dim, speakers=tuple(groups)), sampler.truth()


def generate_verification_task(
    cfg: SynthConfig,
    n_eval_speakers: int,
    enroll_sessions: int = 5,
    test_sessions: int = 2
) -> VerificationTask:
    """
    Sample training data and a held-out verification task sharing one F.

    The training part is identical to generate_synthetic(cfg). Held-out
    speakers are drawn afterwards; each gets a model "m<k>" enrolled from
    enroll_sessions vectors and test_sessions test segments. Every model is
    tried against every test segment.

    Args:
        cfg: Generator options for the training speakers
        n_eval_speakers: Number of held-out speakers (at least 2)
        enroll_sessions: Enrollment vectors per model
        test_sessions: Test segments per held-out speaker

    Returns:
        VerificationTask: Train, enroll, test sets, trials and ground truth
    """
    cfg.validate()
    if n_eval_speakers < 2:
        raise ConfigError(f"n_eval_speakers must be at least 2, got {n_eval_speakers}")
    if enroll_sessions < 1 or test_sessions < 1:
        raise ConfigError("enroll_sessions and test_sessions must be positive")

    sampler = _SpeakerSampler(cfg)
    train_groups = []
    for s in range(cfg.n_speakers):
        speaker_id = _speaker_id("spk", s)
        vectors = sampler.speaker(cfg.sessions_per_speaker)
        train_groups.append(SpeakerGroup(
            speaker_id,
            vectors,
            tuple(f"{speaker_id}_{i}" for i in range(cfg.sessions_per_speaker))
        ))

    enroll_groups = []
    test_groups = []
    for k in range(n_eval_speakers):
        vectors = sampler.speaker(enroll_sessions + test_sessions)
        model_id = _speaker_id("m", k)
        speaker_id = _speaker_id("eval", k)
        enroll_groups.append(SpeakerGroup(
            model_id,
            vectors[:enroll_sessions],
            tuple(f"{model_id}_e{i}" for i in range(enroll_sessions))
        ))
        test_groups.append(SpeakerGroup(
            speaker_id,
            vectors[enroll_sessions:],
            tuple(f"{speaker_id}_t{i}" for i in range(test_sessions))
        ))

    entries: List[Trial] = []
    for k, model in enumerate(enroll_groups):
        for j, test_group in enumerate(test_groups):
            label = TrialLabel.TARGET if j == k else TrialLabel.NONTARGET
            for segment_id in test_group.segment_ids:
                entries.append(Trial(model.speaker_id, segment_id, label))

    logger.info(
        f"Generated verification task:\n"
        f"Train speakers: {cfg.n_speakers}, eval speakers: {n_eval_speakers}, "
        f"trials: {len(entries)}"
    )
    return VerificationTask(
        train=LabeledVectorSet(dim=cfg.dim, speakers=tuple(train_groups)),
        enroll=LabeledVectorSet(dim=cfg.dim, speakers=tuple(enroll_groups)),
        test=LabeledVectorSet(dim=cfg.dim, speakers=tuple(test_groups)),
        trials=TrialList(tuple(entries)),
        truth=sampler.truth()
    )


def split_trials(
    trials: TrialList,
    seed: int,
    progress_fraction: float = 0.4
) -> Tuple[TrialList, TrialList]:
    """
    Randomly partition trials into progress and evaluation subsets.

    Args:
        trials: Trials to split
        seed: Generator seed
        progress_fraction: Share of trials in the progress subset

    Returns:
        Tuple[TrialList, TrialList]: (progress, evaluation), each in input order
    """
    if not 0 < progress_fraction < 1:
        raise ConfigError(f"progress_fraction must be in (0, 1), got {progress_fraction}")
    n_progress = int(round(progress_fraction * len(trials)))
    order = make_rng(seed).permutation(len(trials))
    progress = np.sort(order[:n_progress])
    evaluation = np.sort(order[n_progress:])
    return trials.take(progress.tolist()), trials.take(evaluation.tolist())
