"""
gen: write a synthetic corpus sampled from the sGPLDA model.
File: src/cli/handlers/gen.py
"""

import argparse
import sys

from core.exceptions import UsageError
from core.logging import get_logger
from services.corpus.io import VectorFormat, save_trials, save_vectors
from services.corpus.synthetic import SynthConfig, generate_synthetic, generate_verification_task
from services.pipeline import Backend
from ..parser import add_subcommand, positive_int, seed_type
from ..utils.messages import GEN_DONE

logger = get_logger(__name__)

TASK_OUTPUTS = ("enroll_out", "test_out", "trials_out")


def register(subparsers) -> None:
    sub = add_subcommand(
        subparsers,
        "gen",
        "Generate synthetic speaker-labeled vectors",
        handle,
        required=("speakers", "sessions", "dim", "rank", "out")
    )
    sub.add_argument("--speakers", type=positive_int, help="number of training speakers")
    sub.add_argument("--sessions", type=positive_int, help="vectors per training speaker")
    sub.add_argument("--dim", type=positive_int, help="vector dimension")
    sub.add_argument("--rank", type=positive_int, help="speaker space rank")
    sub.add_argument("--noise", type=float, default=1.0, help="residual standard deviation")
    sub.add_argument("--seed", type=seed_type, default=0)
    sub.add_argument("--clusters", type=int, default=0, help="speaker clusters (0 = off)")
    sub.add_argument("--cluster-spread", type=float, default=1.0,
                     help="within-cluster spread of speaker factors, in (0, 1]")
    sub.add_argument("--out", help="training vectors file")
    sub.add_argument("--model-out", help="ground-truth model file")
    sub.add_argument("--eval-speakers", type=int, default=0,
                     help="held-out speakers for a verification task (0 = none)")
    sub.add_argument("--enroll-sessions", type=positive_int, default=5)
    sub.add_argument("--test-sessions", type=positive_int, default=2)
    sub.add_argument("--enroll-out", help="enrollment vectors file")
    sub.add_argument("--test-out", help="test vectors file")
    sub.add_argument("--trials-out", help="trials file")
    sub.add_argument("--format", choices=[f.value for f in VectorFormat],
                     help="vector file format (default: from suffix)")


def handle(args: argparse.Namespace) -> int:
    cfg = SynthConfig(
        n_speakers=args.speakers,
        sessions_per_speaker=args.sessions,
        dim=args.dim,
        rank=args.rank,
        noise_scale=args.noise,
        seed=args.seed,
        n_clusters=args.clusters,
        cluster_spread=args.cluster_spread
    )
    cfg.validate()

    if args.eval_speakers:
        missing = [name for name in TASK_OUTPUTS if getattr(args, name) is None]
        if missing:
            raise UsageError(
                "--eval-speakers needs " + ", ".join("--" + m.replace("_", "-") for m in missing)
            )
        task = generate_verification_task(
            cfg, args.eval_speakers, args.enroll_sessions, args.test_sessions
        )
        train, truth = task.train, task.truth
        save_vectors(task.enroll, args.enroll_out, args.format)
        save_vectors(task.test, args.test_out, args.format)
        save_trials(task.trials, args.trials_out)
    else:
        train, truth = generate_synthetic(cfg)

    save_vectors(train, args.out, args.format)
    if args.model_out:
        Backend(model=truth, length_norm=False).save(args.model_out)

    sys.stdout.write(GEN_DONE.format(
        vectors=train.n_vectors, speakers=train.n_speakers, dim=train.dim, path=args.out
    ))
    return 0
