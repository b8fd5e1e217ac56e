"""
Output templates for the moplda command line.
File: src/cli/utils/messages.py
"""

from typing import Dict, List, Sequence

from core.exceptions import UnresolvedIdError
from services.experiments import SystemResult
from services.metrics.detection import DetectionSummary
from services.metrics.mce import BlacklistSummary

EVAL_SUMMARY = """trials={trials}
targets={targets}
nontargets={nontargets}
eer={eer}
eer_pct={eer_pct}
min_dcf={min_dcf}
fa_weight={fa_weight}
miss_weight={miss_weight}
eer={eer};min_dcf={min_dcf}
"""

BLACKLIST_SUMMARY = """segments={segments}
blacklist_speakers={blacklist_speakers}
blacklist_segments={blacklist_segments}
top_s_eer={top_s_eer}
top_1_eer={top_1_eer}
"""

GEN_DONE = "wrote {vectors} vectors ({speakers} speakers, dim {dim}) to {path}\n"

TRAIN_DONE = "trained {mode} model d={d} r={r}, wrote {path}\n"

SCORE_DONE = "wrote {count} scores to {path}\n"

SPLIT_DONE = "progress={progress} evaluation={evaluation}\n"

SWEEP_DONE = "wrote {rows} sweep rows to {path}\n"

UNRESOLVED_LIMIT = 10


def number(value: float) -> str:
    """Short human-readable float."""
    return format(float(value), ".6g")


def format_eval_summary(summary: DetectionSummary) -> str:
    """Format the key=value block printed by eval."""
    return EVAL_SUMMARY.format(
        trials=summary.trials,
        targets=summary.targets,
        nontargets=summary.nontargets,
        eer=number(summary.eer),
        eer_pct=number(summary.eer * 100.0),
        min_dcf=number(summary.min_dcf),
        fa_weight=number(summary.params.fa_weight),
        miss_weight=number(summary.params.miss_weight)
    )


def format_blacklist_summary(summary: BlacklistSummary) -> str:
    return BLACKLIST_SUMMARY.format(
        segments=summary.segments,
        blacklist_speakers=summary.blacklist_speakers,
        blacklist_segments=summary.blacklist_segments,
        top_s_eer=number(summary.top_s_eer),
        top_1_eer=number(summary.top_1_eer)
    )


def format_error(command: str, error: Exception) -> str:
    return f"moplda {command}: error: {error}\n"


def format_unresolved(command: str, error: UnresolvedIdError) -> str:
    """List up to ten missing ids."""
    shown = error.missing[:UNRESOLVED_LIMIT]
    more = len(error.missing) - len(shown)
    lines = [f"moplda {command}: error: {len(error.missing)} unresolved {error.kind} id(s):"]
    lines += [f"  {item}" for item in shown]
    if more > 0:
        lines.append(f"  ... and {more} more")
    return "\n".join(lines) + "\n"


def format_benchmark(results: Sequence[SystemResult]) -> str:
    """Mean metrics per system plus per-seed comparison of MO-nearest with SO."""
    by_system: Dict[str, List[SystemResult]] = {}
    for result in results:
        by_system.setdefault(result.system, []).append(result)

    lines = [
        "system,mean_progress_eer,mean_progress_min_dcf,mean_eval_eer,mean_eval_min_dcf,"
        "mean_top_s_eer,mean_top_1_eer"
    ]
    for system, rows in by_system.items():
        n = len(rows)
        lines.append(",".join([
            system,
            number(sum(r.progress_eer for r in rows) / n),
            number(sum(r.progress_min_dcf for r in rows) / n),
            number(sum(r.eval_eer for r in rows) / n),
            number(sum(r.eval_min_dcf for r in rows) / n),
            number(sum(r.top_s_eer for r in rows) / n),
            number(sum(r.top_1_eer for r in rows) / n),
        ]))

    so = {r.seed: r for r in by_system.get("so", [])}
    mo = {r.seed: r for r in by_system.get("mo-nearest", [])}
    seeds = sorted(set(so) & set(mo))
    if seeds:
        wins = sum(1 for s in seeds if mo[s].eval_eer <= so[s].eval_eer)
        lines.append(f"mo-nearest eval_eer <= so eval_eer in {wins}/{len(seeds)} seeds")
    return "\n".join(lines) + "\n"
