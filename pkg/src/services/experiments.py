"""
Parameter sweeps and the synthetic SO / MO comparison benchmark.
File: src/services/experiments.py
"""

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

from core.exceptions import ConfigError
from core.logging import get_logger
from services.corpus.models import LabeledVectorSet, TrialList
from services.corpus.synthetic import SynthConfig, generate_verification_task, split_trials
from services.metrics.detection import DcfParams, evaluate
from services.metrics.mce import evaluate_blacklist
from services.pipeline import fit_backend
from services.plda.models import SelectionStrategy, TrainConfig, TrainingMode

logger = get_logger(__name__)

SWEEP_PARAMS = ("alpha", "rank")


@dataclass(frozen=True)
class SweepRow:
    param: float
    eer: float
    min_dcf: float


def parse_range(text: str, integer: bool = False) -> List[float]:
    """
    Expand an inclusive lo:hi:step range.

    Values are lo + k*step for k = 0 .. floor((hi - lo)/step + 1e-9),
    rounded to 10 decimals (to integers for integer ranges).

    Raises:
        ConfigError: If the text is malformed or the range is empty
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"Range must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"Range must be numeric lo:hi:step, got {text!r}") from None
    if not step > 0:
        raise ConfigError(f"Range step must be positive, got {step:g}")
    if hi < lo:
        raise ConfigError(f"Empty range {text!r}")
    count = int((hi - lo) / step + 1e-9) + 1
    values = [lo + k * step for k in range(count)]
    if integer:
        return [float(int(round(v))) for v in values]
    return [round(v, 10) for v in values]


def run_sweep(
    train_set: LabeledVectorSet,
    enroll: LabeledVectorSet,
    test: LabeledVectorSet,
    trials: TrialList,
    base: TrainConfig,
    mode: TrainingMode,
    param: str,
    values: Sequence[float],
    lda_dim: Optional[int] = None,
    params: DcfParams = DcfParams(),
    on_row: Optional[Callable[[SweepRow], None]] = None
) -> List[SweepRow]:
    """
    Train and evaluate one backend per grid value.

    Args:
        train_set: Raw training vectors
        enroll: Raw enrollment vectors
        test: Raw test vectors
        trials: Labeled evaluation trials
        base: Training options; param is overridden per row
        mode: so or mo
        param: alpha or rank
        values: Grid values
        lda_dim: LDA output dimension, or None
        params: Cost weights
        on_row: Called with every finished row

    Returns:
        List[SweepRow]: One row per value, in grid order
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"Unknown sweep parameter {param!r}")
    rows = []
    for value in values:
        cfg = replace(base, alpha=float(value)) if param == "alpha" else replace(base, rank=int(value))
        backend, _ = fit_backend(train_set, cfg, mode, lda_dim=lda_dim)
        summary = evaluate(backend.score(enroll, test, trials), trials, params)
        row = SweepRow(param=value, eer=summary.eer, min_dcf=summary.min_dcf)
        logger.info(f"Sweep point {param}={value:g}:\nEER: {row.eer:.6g}, minDCF: {row.min_dcf:.6g}")
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


@dataclass(frozen=True)
class BenchmarkConfig:
    """Clustered synthetic task shared by all compared systems."""

    n_speakers: int = 200
    sessions: int = 5
    dim: int = 50
    rank: int = 10
    noise_scale: float = 2.0
    n_clusters: int = 20
    cluster_spread: float = 0.3
    n_eval_speakers: int = 100
    enroll_sessions: int = 5
    test_sessions: int = 2
    alpha: float = 1.7
    iterations: int = 10
    progress_fraction: float = 0.4


@dataclass(frozen=True)
class SystemResult:
    system: str
    seed: int
    progress_eer: float
    progress_min_dcf: float
    eval_eer: float
    eval_min_dcf: float
    top_s_eer: float
    top_1_eer: float


def blacklist_trials(trials: TrialList) -> TrialList:
    """
    Trials of the first half of the models, in trial order.

    Those models act as the blacklist; test segments of the other speakers
    are background.
    """
    model_ids = list(dict.fromkeys(t.model_id for t in trials))
    blacklist = set(model_ids[:len(model_ids) // 2])
    return trials.take(k for k, t in enumerate(trials) if t.model_id in blacklist)


SYSTEMS: Tuple[Tuple[str, TrainingMode, SelectionStrategy], ...] = (
    ("so", TrainingMode.SO, SelectionStrategy.NEAREST),
    ("mo-random", TrainingMode.MO, SelectionStrategy.RANDOM),
    ("mo-nearest", TrainingMode.MO, SelectionStrategy.NEAREST),
)


def run_benchmark(
    cfg: BenchmarkConfig,
    seeds: Sequence[int],
    params: DcfParams = DcfParams()
) -> List[SystemResult]:
    """
    Compare SO, MO-random and MO-nearest on clustered synthetic tasks.

    Every seed draws a new task and a new progress/evaluation split; the
    three systems share both. Top-S and Top-1 EER treat the first half of
    the held-out models as a blacklist.

    Args:
        cfg: Task and training options
        seeds: One run per seed
        params: Cost weights

    Returns:
        List[SystemResult]: One result per (seed, system)

    Raises:
        ConfigError: If fewer than 2 held-out speakers leave no background
    """
    if cfg.n_eval_speakers < 2:
        raise ConfigError(
            f"Benchmark needs at least 2 held-out speakers, got {cfg.n_eval_speakers}"
        )
    results = []
    for seed in seeds:
        task = generate_verification_task(
            SynthConfig(
                n_speakers=cfg.n_speakers,
                sessions_per_speaker=cfg.sessions,
                dim=cfg.dim,
                rank=cfg.rank,
                noise_scale=cfg.noise_scale,
                seed=seed,
                n_clusters=cfg.n_clusters,
                cluster_spread=cfg.cluster_spread
            ),
            n_eval_speakers=cfg.n_eval_speakers,
            enroll_sessions=cfg.enroll_sessions,
            test_sessions=cfg.test_sessions
        )
        progress, evaluation = split_trials(task.trials, seed, cfg.progress_fraction)
        watch = blacklist_trials(task.trials)
        for name, mode, selection in SYSTEMS:
            train_cfg = TrainConfig(
                rank=cfg.rank,
                alpha=cfg.alpha,
                iterations=cfg.iterations,
                selection=selection,
                seed=seed
            )
            backend, _ = fit_backend(task.train, train_cfg, mode)
            scores = backend.score(task.enroll, task.test, task.trials)
            on_progress = evaluate(scores, progress, params)
            on_eval = evaluate(scores, evaluation, params)
            on_watch = evaluate_blacklist(scores, watch)
            result = SystemResult(
                system=name,
                seed=seed,
                progress_eer=on_progress.eer,
                progress_min_dcf=on_progress.min_dcf,
                eval_eer=on_eval.eer,
                eval_min_dcf=on_eval.min_dcf,
                top_s_eer=on_watch.top_s_eer,
                top_1_eer=on_watch.top_1_eer
            )
            logger.info(
                f"Benchmark seed {seed}, system {name}:\n"
                f"Progress EER: {result.progress_eer:.4%}, evaluation EER: {result.eval_eer:.4%}\n"
                f"Top-S EER: {result.top_s_eer:.4%}, Top-1 EER: {result.top_1_eer:.4%}"
            )
            results.append(result)
    return results
