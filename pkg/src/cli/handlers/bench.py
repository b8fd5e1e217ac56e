"""
bench: compare SO, MO-random and MO-nearest on clustered synthetic tasks.
File: src/cli/handlers/bench.py
"""

import argparse
import csv
import sys
from dataclasses import fields
from typing import Sequence

from core.logging import get_logger
from services.corpus.io import format_float
from services.experiments import BenchmarkConfig, SystemResult, run_benchmark
from .evaluate import add_cost_options, cost_params
from ..parser import add_subcommand, positive_int
from ..utils.messages import format_benchmark

logger = get_logger(__name__)

RESULT_HEADER = [
    "seed", "system", "progress_eer", "progress_min_dcf", "eval_eer", "eval_min_dcf",
    "top_s_eer", "top_1_eer",
]


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "bench",
        "Run the synthetic SO / MO comparison benchmark",
        handle
    )
    sub.add_argument("--seeds", type=positive_int, default=10, help="number of seeds")
    sub.add_argument("--seed-start", type=int, default=0, help="first seed")
    sub.add_argument("--out", metavar="PATH", help="per-seed results csv")
    defaults = BenchmarkConfig()
    for field in fields(BenchmarkConfig):
        value = getattr(defaults, field.name)
        sub.add_argument(
            "--" + field.name.replace("_", "-"),
            type=type(value),
            default=value,
            help=f"task option (default {value})"
        )
    add_cost_options(sub)


def write_results(results: Sequence[SystemResult], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for r in results:
            writer.writerow([
                r.seed,
                r.system,
                format_float(r.progress_eer),
                format_float(r.progress_min_dcf),
                format_float(r.eval_eer),
                format_float(r.eval_min_dcf),
                format_float(r.top_s_eer),
                format_float(r.top_1_eer),
            ])


def handle(args: argparse.Namespace) -> int:
    cfg = BenchmarkConfig(**{f.name: getattr(args, f.name) for f in fields(BenchmarkConfig)})
    params = cost_params(args)
    seeds = list(range(args.seed_start, args.seed_start + args.seeds))
    logger.info(f"Running benchmark over seeds {seeds[0]}..{seeds[-1]}")
    results = run_benchmark(cfg, seeds, params)
    if args.out:
        write_results(results, args.out)
    sys.stdout.write(format_benchmark(results))
    return 0
