"""Aggregate reporting across generations and evaluations."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from .evaluation import (
    DEFAULT_CODEBOOK,
    Codebook,
    EvaluationRecord,
    acceptability_agreement,
    check_step_refs,
    theme_frequencies,
)
from .harness import GenerationRecord, GenerationStatus, generation_stats


def build_report(
    records: Iterable[GenerationRecord],
    evaluations: Iterable[EvaluationRecord],
    codebook: Codebook = DEFAULT_CODEBOOK,
) -> dict:
    """One JSON-friendly document with every aggregate the review needs."""
    records = list(records)
    evaluations = list(evaluations)
    by_id = {r.record_id: r for r in records}

    stats = generation_stats(records)
    generation = [
        {
            "model_id": row.model_id,
            "count_ok": row.count_ok,
            "count_error": row.count_error,
            "mean_latency_s": row.mean_latency_s,
            "mean_response_chars": row.mean_response_chars,
        }
        for row in stats.rows
    ]

    # Acceptability votes: one per (record, rater) current rating.
    votes: dict[tuple[str, str], dict[str, int]] = defaultdict(
        lambda: {"acceptable": 0, "not_acceptable": 0}
    )
    reject_reasons: dict[str, int] = defaultdict(int)
    for ev in evaluations:
        record = by_id.get(ev.record_id)
        if record is None:
            continue
        slot = votes[(record.model_id, record.task.value)]
        if ev.acceptable:
            slot["acceptable"] += 1
        else:
            slot["not_acceptable"] += 1
            if ev.reject_reason:
                reject_reasons[ev.reject_reason.value] += 1
    acceptability = [
        {
            "model_id": model_id,
            "task": task,
            "acceptable": cell["acceptable"],
            "not_acceptable": cell["not_acceptable"],
        }
        for (model_id, task), cell in sorted(votes.items())
    ]

    # Agreement over items both raters saw; defined only for exactly two.
    raters = sorted({ev.rater_id for ev in evaluations})
    agreement = None
    if len(raters) == 2:
        first = {ev.record_id: ev.acceptable for ev in evaluations if ev.rater_id == raters[0]}
        second = {ev.record_id: ev.acceptable for ev in evaluations if ev.rater_id == raters[1]}
        shared = sorted(set(first) & set(second))
        if shared:
            stats_pair = acceptability_agreement(
                [first[rid] for rid in shared], [second[rid] for rid in shared]
            )
            agreement = {
                "raters": raters,
                "n_items": stats_pair.n_items,
                "percent_agreement": stats_pair.percent_agreement,
                "cohen_kappa": stats_pair.cohen_kappa,
            }

    invalid_refs: dict[str, int] = defaultdict(int)
    for record in records:
        if record.status is not GenerationStatus.ok or record.step_count <= 0:
            continue
        report = check_step_refs(record.response_text, record.step_count)
        if report.invalid_steps:
            invalid_refs[record.model_id] += 1
    invalid = [
        {"model_id": model_id, "records_with_invalid_refs": count}
        for model_id, count in sorted(invalid_refs.items())
    ]

    themes = theme_frequencies(evaluations, codebook)

    return {
        "generation": generation,
        "acceptability": acceptability,
        "reject_reasons": dict(sorted(reject_reasons.items())),
        "agreement": agreement,
        "invalid_step_references": invalid,
        "themes": {
            "counts": [{"tag": tag, "count": count} for tag, count in themes.counts],
            "uncoded": [
                {"tag": tag, "count": count} for tag, count in themes.uncoded_tags
            ],
        },
        "totals": {
            "records": len(records),
            "evaluations": len(evaluations),
        },
    }


def render_report_text(report: dict) -> str:
    """Plain-text rendering of a report document for terminal use."""
    lines: list[str] = []
    lines.append("Generation")
    lines.append(f"  {'model':<36} {'mean s':>8} {'mean chars':>11} {'ok':>4} {'err':>4}")
    for row in report["generation"]:
        mean_s = f"{row['mean_latency_s']:.1f}" if row["mean_latency_s"] is not None else "-"
        mean_c = (
            f"{row['mean_response_chars']:.0f}"
            if row["mean_response_chars"] is not None
            else "-"
        )
        lines.append(
            f"  {row['model_id']:<36} {mean_s:>8} {mean_c:>11} "
            f"{row['count_ok']:>4} {row['count_error']:>4}"
        )

    lines.append("")
    lines.append("Acceptability (votes per model and task)")
    if report["acceptability"]:
        for row in report["acceptability"]:
            lines.append(
                f"  {row['model_id']:<36} {row['task']:<8} "
                f"acceptable {row['acceptable']:>3}   not {row['not_acceptable']:>3}"
            )
    else:
        lines.append("  no ratings yet")
    if report["reject_reasons"]:
        reasons = ", ".join(f"{k}={v}" for k, v in report["reject_reasons"].items())
        lines.append(f"  reject reasons: {reasons}")

    lines.append("")
    if report["agreement"]:
        a = report["agreement"]
        lines.append(
            f"Agreement ({a['raters'][0]} vs {a['raters'][1]}, n={a['n_items']}): "
            f"{a['percent_agreement']:.1%} raw, kappa {a['cohen_kappa']:.4f}"
        )
    else:
        lines.append("Agreement: needs exactly two raters with shared items")

    lines.append("")
    lines.append("Records citing steps that do not exist")
    if report["invalid_step_references"]:
        for row in report["invalid_step_references"]:
            lines.append(f"  {row['model_id']:<36} {row['records_with_invalid_refs']}")
    else:
        lines.append("  none")

    lines.append("")
    lines.append("Themes")
    for row in report["themes"]["counts"]:
        lines.append(f"  {row['tag']:<28} {row['count']}")
    if report["themes"]["uncoded"]:
        uncoded = ", ".join(
            f"{row['tag']}={row['count']}" for row in report["themes"]["uncoded"]
        )
        lines.append(f"  uncoded: {uncoded}")

    lines.append("")
    totals = report["totals"]
    lines.append(
        f"Totals: {totals['records']} generation records, "
        f"{totals['evaluations']} current ratings"
    )
    return "\n".join(lines)
