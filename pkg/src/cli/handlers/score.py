"""
score: score a trial list with a trained backend.
File: src/cli/handlers/score.py
"""

import argparse
import sys

from core.logging import get_logger
from services.corpus.io import load_trials, load_vectors
from services.pipeline import Backend
from services.scoring.io import save_scores
from services.scoring.models import EnrollPooling, KernelMode
from services.scoring.normalization import DEFAULT_COHORT_SIZE
from ..parser import add_subcommand, positive_int
from ..utils.messages import SCORE_DONE

logger = get_logger(__name__)


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "score",
        "Score trials with two-covariance scoring",
        handle,
        required=("model", "enroll", "test", "trials", "out")
    )
    sub.add_argument("--model", help="model file")
    sub.add_argument("--enroll", help="enrollment vectors (speaker_id = model id)")
    sub.add_argument("--test", help="test vectors (looked up by segment_id)")
    sub.add_argument("--trials", help="trials file")
    sub.add_argument("--out", help="scores file to write")
    sub.add_argument("--kernel", choices=[k.value for k in KernelMode], default=KernelMode.BETWEEN.value)
    sub.add_argument("--pooling", choices=[p.value for p in EnrollPooling],
                     default=EnrollPooling.MEAN_RENORM.value)
    sub.add_argument("--snorm-cohort", metavar="PATH", help="cohort vectors enabling s-norm")
    sub.add_argument("--cohort-size", type=positive_int, default=DEFAULT_COHORT_SIZE)


def handle(args: argparse.Namespace) -> int:
    backend = Backend.load(args.model)
    dim = backend.input_dim
    enroll = load_vectors(args.enroll, dim=dim)
    test = load_vectors(args.test, dim=dim)
    trials = load_trials(args.trials)
    cohort = load_vectors(args.snorm_cohort, dim=dim) if args.snorm_cohort else None

    scores = backend.score(
        enroll,
        test,
        trials,
        kernel_mode=args.kernel,
        pooling=args.pooling,
        cohort=cohort,
        cohort_size=args.cohort_size
    )
    save_scores(scores, args.out)
    sys.stdout.write(SCORE_DONE.format(count=len(scores), path=args.out))
    return 0
