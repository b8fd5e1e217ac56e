"""
eval: EER and minDCF of a scores file against labeled trials, plus
Top-S and Top-1 EER when the trial models form a blacklist.
File: src/cli/handlers/evaluate.py
"""

import argparse
import csv
import sys
from typing import Sequence

from core.logging import get_logger
from services.corpus.io import format_float, load_trials
from services.metrics.detection import DcfParams, DetPoint, det_points, evaluate
from services.metrics.mce import evaluate_blacklist
from services.scoring.io import load_scores
from ..parser import add_subcommand
from ..utils.messages import format_blacklist_summary, format_eval_summary

logger = get_logger(__name__)

DET_HEADER = ["threshold", "p_miss", "p_fa"]


def add_cost_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--fa-weight", type=float, default=DcfParams.fa_weight,
                     help="false-alarm weight of the detection cost")
    sub.add_argument("--miss-weight", type=float, default=DcfParams.miss_weight,
                     help="miss weight of the detection cost")


def cost_params(args: argparse.Namespace) -> DcfParams:
    params = DcfParams(fa_weight=args.fa_weight, miss_weight=args.miss_weight)
    params.validate()
    return params


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "eval",
        "Compute EER and minDCF",
        handle,
        required=("scores", "trials")
    )
    sub.add_argument("--scores", help="scores file")
    sub.add_argument("--trials", help="labeled trials file")
    sub.add_argument("--det", metavar="PATH", help="write DET points as csv")
    sub.add_argument("--blacklist", action="store_true",
                     help="treat the trial models as a blacklist and add Top-S / Top-1 EER")
    add_cost_options(sub)


def write_det(points: Sequence[DetPoint], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DET_HEADER)
        for point in points:
            writer.writerow([
                format_float(point.threshold),
                format_float(point.p_miss),
                format_float(point.p_fa),
            ])


def handle(args: argparse.Namespace) -> int:
    params = cost_params(args)
    scores = load_scores(args.scores)
    trials = load_trials(args.trials)
    summary = evaluate(scores, trials, params)
    if args.det:
        write_det(det_points(scores, trials), args.det)
        logger.info(f"Wrote DET points to {args.det}")
    sys.stdout.write(format_eval_summary(summary))
    if args.blacklist:
        sys.stdout.write(format_blacklist_summary(evaluate_blacklist(scores, trials)))
    return 0
