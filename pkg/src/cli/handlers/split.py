"""
split: partition a trial list into progress and evaluation subsets.
File: src/cli/handlers/split.py
"""

import argparse
import sys

from services.corpus.io import load_trials, save_trials
from services.corpus.synthetic import split_trials
from ..parser import add_subcommand, seed_type
from ..utils.messages import SPLIT_DONE


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "split",
        "Split trials into progress and evaluation subsets",
        handle,
        required=("trials", "progress_out", "eval_out")
    )
    sub.add_argument("--trials", help="trials file")
    sub.add_argument("--seed", type=seed_type, default=0)
    sub.add_argument("--progress-fraction", type=float, default=0.4)
    sub.add_argument("--progress-out", help="progress subset file")
    sub.add_argument("--eval-out", help="evaluation subset file")


def handle(args: argparse.Namespace) -> int:
    trials = load_trials(args.trials)
    progress, evaluation = split_trials(trials, args.seed, args.progress_fraction)
    save_trials(progress, args.progress_out)
    save_trials(evaluation, args.eval_out)
    sys.stdout.write(SPLIT_DONE.format(progress=len(progress), evaluation=len(evaluation)))
    return 0
