"""
train: fit length norm, LDA and PLDA on a vectors file.
File: src/cli/handlers/train.py
"""

import argparse
import csv
import sys

from core.logging import get_logger
from services.corpus.io import format_float, load_vectors
from services.pipeline import fit_backend
from services.plda.models import (
    DEFAULT_ALPHA,
    DEFAULT_ITERATIONS,
    DEFAULT_VARIANCE_FLOOR,
    SelectionStrategy,
    TrainConfig,
    TrainingLog,
    TrainingMode,
)
from ..parser import add_subcommand, positive_int, seed_type
from ..utils.messages import TRAIN_DONE

logger = get_logger(__name__)

LOG_HEADER = ["iteration", "f", "g", "combined"]


def add_training_options(sub: argparse.ArgumentParser) -> None:
    """Options shared by train and sweep."""
    sub.add_argument("--mode", choices=[m.value for m in TrainingMode], default=TrainingMode.SO.value)
    sub.add_argument("--rank", type=int, help="speaker space rank")
    sub.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="balance factor (mo)")
    sub.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    sub.add_argument("--select", choices=[s.value for s in SelectionStrategy],
                     default=SelectionStrategy.NEAREST.value, help="between-class selection (mo)")
    sub.add_argument("--seed", type=seed_type, default=0)
    sub.add_argument("--lda-dim", type=positive_int, help="LDA output dimension (default: no LDA)")
    sub.add_argument("--variance-floor", type=float, default=DEFAULT_VARIANCE_FLOOR)
    sub.add_argument("--no-length-norm", action="store_true",
                     help="skip length normalization before and after LDA")


def train_config(args: argparse.Namespace) -> TrainConfig:
    cfg = TrainConfig(
        rank=args.rank,
        alpha=args.alpha,
        iterations=args.iterations,
        selection=SelectionStrategy(args.select),
        seed=args.seed,
        variance_floor=args.variance_floor
    )
    cfg.validate()
    return cfg


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "train",
        "Train an SO or MO sGPLDA backend",
        handle,
        required=("vectors", "rank", "model_out")
    )
    sub.add_argument("--vectors", help="training vectors file")
    add_training_options(sub)
    sub.add_argument("--model-out", help="model file to write")
    sub.add_argument("--log-out", help="training log csv (iteration,f,g,combined)")


def write_training_log(log: TrainingLog, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for entry in log.entries:
            writer.writerow([
                entry.iteration,
                format_float(entry.f_value),
                format_float(entry.g_value) if entry.g_value is not None else "",
                format_float(entry.combined) if entry.combined is not None else "",
            ])


def handle(args: argparse.Namespace) -> int:
    cfg = train_config(args)
    mode = TrainingMode(args.mode)
    vectors = load_vectors(args.vectors)
    backend, log = fit_backend(
        vectors,
        cfg,
        mode,
        lda_dim=args.lda_dim,
        length_norm=not args.no_length_norm
    )
    backend.save(args.model_out)
    if args.log_out:
        write_training_log(log, args.log_out)
    sys.stdout.write(TRAIN_DONE.format(
        mode=mode.value, d=backend.model.d, r=backend.model.r, path=args.model_out
    ))
    return 0
