"""
sweep: train and evaluate over a grid of alpha or rank values.
File: src/cli/handlers/sweep.py
"""

import argparse
import csv
import os
import sys
from dataclasses import replace

from core.exceptions import UsageError
from core.logging import get_logger
from services.corpus.io import format_float, load_trials, load_vectors
from services.experiments import SweepRow, parse_range, run_sweep
from services.plda.models import TrainingMode
from .evaluate import add_cost_options, cost_params
from .train import add_training_options, train_config
from ..parser import add_subcommand
from ..utils.messages import SWEEP_DONE

logger = get_logger(__name__)

SWEEP_HEADER = ["param", "eer", "min_dcf"]


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "sweep",
        "Sweep alpha or rank and report EER and minDCF per value",
        handle,
        required=("train", "enroll", "test", "trials", "out")
    )
    sub.add_argument("--train", help="training vectors file")
    sub.add_argument("--enroll", help="enrollment vectors file")
    sub.add_argument("--test", help="test vectors file")
    sub.add_argument("--trials", help="labeled trials file")
    sub.add_argument("--out", help="sweep csv to write")
    sub.add_argument("--alpha-range", metavar="LO:HI:STEP", help="sweep alpha (implies --mode mo)")
    sub.add_argument("--rank-range", metavar="LO:HI:STEP", help="sweep the speaker space rank")
    add_training_options(sub)
    add_cost_options(sub)


def _param_value(value: float, param: str) -> str:
    return str(int(value)) if param == "rank" else format_float(value)


def handle(args: argparse.Namespace) -> int:
    if (args.alpha_range is None) == (args.rank_range is None):
        raise UsageError("exactly one of --alpha-range and --rank-range is required")

    if args.alpha_range is not None:
        param, values = "alpha", parse_range(args.alpha_range)
        mode = TrainingMode.MO
    else:
        param, values = "rank", parse_range(args.rank_range, integer=True)
        mode = TrainingMode(args.mode)

    if args.rank is None:
        if param != "rank":
            raise UsageError("the following arguments are required: --rank")
        args.rank = int(values[0])
    base = train_config(args)
    for value in values:
        if param == "alpha":
            replace(base, alpha=value).validate()
        else:
            replace(base, rank=int(value)).validate()
    params = cost_params(args)

    train_set = load_vectors(args.train)
    enroll = load_vectors(args.enroll)
    test = load_vectors(args.test)
    trials = load_trials(args.trials)

    # --out is replaced only after every grid point succeeds
    partial = args.out + ".partial"
    with open(partial, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)

        def write_row(row: SweepRow) -> None:
            writer.writerow([
                _param_value(row.param, param),
                format_float(row.eer),
                format_float(row.min_dcf),
            ])
            handle.flush()

        rows = run_sweep(
            train_set, enroll, test, trials, base, mode, param, values,
            lda_dim=args.lda_dim, params=params, on_row=write_row
        )
    os.replace(partial, args.out)

    sys.stdout.write(SWEEP_DONE.format(rows=len(rows), path=args.out))
    return 0
