"""Aggregate diffs into change statistics and render report tables.

Percentages round half-up to one decimal, the reproducibility metric to
two; both are computed in decimal arithmetic so rendering never reopens
the rounding.  All three output formats (csv, markdown, json) are byte
deterministic for a given input.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .differ import KIND_LABELS, DiffResult, SMOKind

KIND_ORDER = (
    SMOKind.CREATE_TABLE,
    SMOKind.DROP_TABLE,
    SMOKind.ADD_COLUMN,
    SMOKind.DROP_COLUMN,
    SMOKind.TYPE_CHANGE,
    SMOKind.INIT_CHANGE,
    SMOKind.KEY_CHANGE,
)

FORMATS = ("csv", "markdown", "json")


def _round_ratio(numerator: int, denominator: int, places: str) -> float:
    scaled = Decimal(numerator) * 100 / Decimal(denominator)
    return float(scaled.quantize(Decimal(places), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ChangeStats:
    project: str
    counts: dict[SMOKind, int]
    percentages: dict[SMOKind, float]
    total: int
    suspect_counts: dict[SMOKind, int]
    suspect_total: int


@dataclass(frozen=True)
class PerRevisionTable:
    rows: tuple[tuple[str, int], ...]  # (revision label, SMO count), zero rows omitted
    total: int


@dataclass(frozen=True)
class ComparisonReport:
    baseline: dict[SMOKind, int]
    reproduced: dict[SMOKind, int]
    baseline_total: int
    reproduced_total: int
    abs_diff: int
    rel_diff_percent: float


def aggregate(diffs: list[DiffResult], project: str = "") -> ChangeStats:
    """Count operations per kind across a history's diffs."""
    counts = {kind: 0 for kind in KIND_ORDER}
    suspect_counts = {kind: 0 for kind in KIND_ORDER}
    for diff in diffs:
        for smo in diff.smos:
            counts[smo.kind] += 1
            if diff.suspect:
                suspect_counts[smo.kind] += 1
    total = sum(counts.values())
    if total:
        percentages = {kind: _round_ratio(counts[kind], total, "0.1") for kind in KIND_ORDER}
    else:
        percentages = {kind: 0.0 for kind in KIND_ORDER}
    return ChangeStats(
        project=project,
        counts=counts,
        percentages=percentages,
        total=total,
        suspect_counts=suspect_counts,
        suspect_total=sum(suspect_counts.values()),
    )


def per_revision_table(diffs: list[DiffResult]) -> PerRevisionTable:
    """Changes per revision, keyed by the revision the change landed in."""
    rows = tuple(
        (diff.to_revision, len(diff.smos)) for diff in diffs if diff.smos
    )
    return PerRevisionTable(rows=rows, total=sum(len(diff.smos) for diff in diffs))


def relative_difference(
    baseline: dict[SMOKind, int], reproduced: dict[SMOKind, int]
) -> ComparisonReport:
    """Reproducibility metric: per-kind absolute differences over the baseline total.

    The numerator is symmetric in the two count vectors; only the
    denominator is anchored to the baseline.  A baseline with no
    operations has no defined metric and raises ValueError.
    """
    p = {kind: int(baseline.get(kind, 0)) for kind in KIND_ORDER}
    r = {kind: int(reproduced.get(kind, 0)) for kind in KIND_ORDER}
    for vector in (p, r):
        for kind, value in vector.items():
            if value < 0:
                raise ValueError(f"negative count for {kind.value}")
    baseline_total = sum(p.values())
    if baseline_total == 0:
        raise ValueError("baseline count vector is empty; relative difference is undefined")
    abs_diff = sum(abs(p[kind] - r[kind]) for kind in KIND_ORDER)
    return ComparisonReport(
        baseline=p,
        reproduced=r,
        baseline_total=baseline_total,
        reproduced_total=sum(r.values()),
        abs_diff=abs_diff,
        rel_diff_percent=_round_ratio(abs_diff, baseline_total, "0.01"),
    )


# ---------------------------------------------------------------------------
# Rendering


def render(obj: ChangeStats | PerRevisionTable | ComparisonReport, fmt: str) -> str:
    """Render a stats object in one of the supported formats."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if isinstance(obj, ChangeStats):
        return _render_stats(obj, fmt)
    if isinstance(obj, PerRevisionTable):
        return _render_per_revision(obj, fmt)
    if isinstance(obj, ComparisonReport):
        return _render_comparison(obj, fmt)
    raise TypeError(f"cannot render object of type {type(obj).__name__}")


def _json_dumps(payload: object) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _markdown_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "| " + " | ".join("---" for _ in header) + " |"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def stats_to_dict(stats: ChangeStats) -> dict:
    return {
        "project": stats.project,
        "counts": {kind.value: stats.counts[kind] for kind in KIND_ORDER},
        "percentages": {kind.value: stats.percentages[kind] for kind in KIND_ORDER},
        "total": stats.total,
        "suspect_counts": {kind.value: stats.suspect_counts[kind] for kind in KIND_ORDER},
        "suspect_total": stats.suspect_total,
    }


def _render_stats(stats: ChangeStats, fmt: str) -> str:
    if fmt == "json":
        return _json_dumps(stats_to_dict(stats))
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["project", "kind", "count", "percent", "suspect_count"])
        if stats.total:
            for kind in KIND_ORDER:
                writer.writerow(
                    [
                        stats.project,
                        kind.value,
                        stats.counts[kind],
                        f"{stats.percentages[kind]:.1f}",
                        stats.suspect_counts[kind],
                    ]
                )
        return out.getvalue()
    header = ["App"] + [KIND_LABELS[kind] for kind in KIND_ORDER] + ["Total", "Suspect"]
    rows = []
    if stats.total:
        row = [stats.project or "(unnamed)"]
        row.extend(
            f"{stats.counts[kind]} ({stats.percentages[kind]:.1f}%)" for kind in KIND_ORDER
        )
        row.append(str(stats.total))
        row.append(str(stats.suspect_total))
        rows.append(row)
    return _markdown_table(header, rows)


def per_revision_to_dict(table: PerRevisionTable) -> dict:
    return {
        "rows": [{"revision": label, "changes": count} for label, count in table.rows],
        "total": table.total,
    }


def _render_per_revision(table: PerRevisionTable, fmt: str) -> str:
    if fmt == "json":
        return _json_dumps(per_revision_to_dict(table))
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["revision", "changes"])
        for label, count in table.rows:
            writer.writerow([label, count])
        writer.writerow(["total", table.total])
        return out.getvalue()
    header = ["Revision"] + [label for label, _ in table.rows] + ["Total"]
    row = ["Changes"] + [str(count) for _, count in table.rows] + [str(table.total)]
    return _markdown_table(header, [row])


def comparison_to_dict(report: ComparisonReport) -> dict:
    return {
        "baseline": {kind.value: report.baseline[kind] for kind in KIND_ORDER},
        "reproduced": {kind.value: report.reproduced[kind] for kind in KIND_ORDER},
        "baseline_total": report.baseline_total,
        "reproduced_total": report.reproduced_total,
        "abs_diff": report.abs_diff,
        "rel_diff_percent": report.rel_diff_percent,
    }


def _render_comparison(report: ComparisonReport, fmt: str) -> str:
    if fmt == "json":
        return _json_dumps(comparison_to_dict(report))
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["metric", "value"])
        writer.writerow(["baseline_total", report.baseline_total])
        writer.writerow(["reproduced_total", report.reproduced_total])
        writer.writerow(["abs_diff", report.abs_diff])
        writer.writerow(["rel_diff_percent", f"{report.rel_diff_percent:.2f}"])
        for kind in KIND_ORDER:
            writer.writerow([f"baseline.{kind.value}", report.baseline[kind]])
        for kind in KIND_ORDER:
            writer.writerow([f"reproduced.{kind.value}", report.reproduced[kind]])
        return out.getvalue()
    rows = [
        ["Baseline total", str(report.baseline_total)],
        ["Reproduced total", str(report.reproduced_total)],
        ["Abs. diff", str(report.abs_diff)],
        ["Rel. diff [%]", f"{report.rel_diff_percent:.2f}"],
    ]
    return _markdown_table(["Metric", "Value"], rows)
