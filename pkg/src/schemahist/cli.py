"""Command-line front end.

Three subcommands: ``extract`` dumps the DDL found in individual files,
``analyze`` runs a manifest through the full pipeline and writes a report,
``compare`` scores a report against a baseline count vector.  Exit codes:
0 success, 1 bad input (paths, manifest, config, flags), 2 internal
invariant violation.  Output is byte-identical across reruns on the same
input; no timestamps, no environment leakage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .differ import InvariantViolation, SMOKind, diff_consecutive, verify_diffs
from .extractor import FileKind, SourceFile, extract_ddl
from .history import (
    ConfigError,
    ManifestError,
    build_history,
    classify_path,
    load_config,
    load_manifest,
)
from .reports import (
    FORMATS,
    KIND_ORDER,
    aggregate,
    per_revision_table,
    per_revision_to_dict,
    relative_difference,
    render,
    stats_to_dict,
)


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; flag mistakes are input
    # validation here, so route them through exit code 1 instead.
    def error(self, message: str):
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="schemahist", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="print DDL statements found in files")
    p_extract.add_argument("paths", nargs="+", metavar="FILE")
    p_extract.add_argument("--config", help="analysis config (JSON or TOML)")

    p_analyze = sub.add_parser("analyze", help="run a full manifest analysis")
    p_analyze.add_argument("--manifest", required=True)
    p_analyze.add_argument("--config")
    p_analyze.add_argument("--format", choices=FORMATS, default="markdown")
    p_analyze.add_argument("--out", help="write the report here instead of stdout")
    p_analyze.add_argument(
        "--verify",
        action="store_true",
        help="replay every diff against its snapshot pair and fail on drift",
    )
    p_analyze.add_argument(
        "--selection-mode",
        help="override the config's selection-mode label recorded in reports",
    )

    p_compare = sub.add_parser("compare", help="compare a report against a baseline vector")
    p_compare.add_argument("report")
    p_compare.add_argument("baseline")
    p_compare.add_argument("--format", choices=FORMATS, default="markdown")
    p_compare.add_argument("--out", help="write the comparison here instead of stdout")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def cmd_extract(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    blocks: list[str] = []
    for raw_path in args.paths:
        path = Path(raw_path)
        if not path.is_file():
            raise ManifestError(f"not a readable file: {raw_path}")
        kind = classify_path(raw_path, config.file_rules)
        if kind is None or kind == FileKind.IGNORE:
            print(f"note: no file rule selects {raw_path}; skipped", file=sys.stderr)
            continue
        content = path.read_text(encoding="utf-8", errors="replace")
        statements, issues = extract_ddl(SourceFile(raw_path, kind, content))
        for issue in issues:
            print(f"warning: {issue.path}:{issue.line}: {issue.message}", file=sys.stderr)
        for stmt in statements:
            blocks.append(
                f"-- {stmt.path}:{stmt.line_start}-{stmt.line_end} "
                f"[{stmt.statement_kind.value}]\n{stmt.text}\n"
            )
    sys.stdout.write("\n".join(blocks))
    return 0


def _analyze_report(project: str, selection_mode: str, stats, revisions, fmt: str) -> str:
    if fmt == "json":
        return (
            json.dumps(
                {
                    "project": project,
                    "selection_mode": selection_mode,
                    "stats": stats_to_dict(stats),
                    "per_revision": per_revision_to_dict(revisions),
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
    if fmt == "csv":
        head = f"# project: {project}\n# selection_mode: {selection_mode}\n"
        return head + render(stats, "csv") + "\n" + render(revisions, "csv")
    return (
        f"# Schema change report: {project}\n\n"
        f"Selection mode: `{selection_mode}`\n\n"
        "## Changes by kind\n\n"
        + render(stats, "markdown")
        + "\n## Changes per revision\n\n"
        + render(revisions, "markdown")
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    config = load_config(args.config)
    if args.selection_mode:
        config = replace(config, selection_mode=args.selection_mode)
    results = build_history(manifest, config)
    snapshots = [r.snapshot for r in results]
    diffs = diff_consecutive(snapshots)
    if args.verify:
        verify_diffs(snapshots, diffs)
    stats = aggregate(diffs, project=manifest.project)
    revisions = per_revision_table(diffs)
    for snapshot in snapshots:
        for warning in snapshot.warnings:
            print(f"warning: revision {snapshot.revision}: {warning}", file=sys.stderr)
        for error in snapshot.errors:
            print(
                f"warning: revision {snapshot.revision}: {error.path}:{error.line}: {error.message}",
                file=sys.stderr,
            )
    _emit(_analyze_report(manifest.project, config.selection_mode, stats, revisions, args.format), args.out)
    return 0


def _load_counts(path: str) -> dict[SMOKind, int]:
    """Accept either an analyze JSON report or a bare per-kind vector."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("stats"), dict):
        doc = doc["stats"]
    if isinstance(doc, dict) and isinstance(doc.get("counts"), dict):
        doc = doc["counts"]
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: expected a JSON object of per-kind counts")
    known = {kind.value: kind for kind in KIND_ORDER}
    counts: dict[SMOKind, int] = {}
    for key, value in doc.items():
        kind = known.get(key)
        if kind is None:
            raise ManifestError(f"{path}: unknown operation kind {key!r}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ManifestError(f"{path}: count for {key!r} must be a nonnegative integer")
        counts[kind] = value
    return counts


def cmd_compare(args: argparse.Namespace) -> int:
    reproduced = _load_counts(args.report)
    baseline = _load_counts(args.baseline)
    try:
        report = relative_difference(baseline, reproduced)
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc
    _emit(render(report, args.format), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "extract":
            return cmd_extract(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_compare(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ManifestError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
