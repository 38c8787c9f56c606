"""Fold dialect noise out of parsed tables.

Embedded-database schemas drift across engines and coding styles: typeless
columns, mixed-case identifiers, synonym keywords.  Normalization rewrites
every table into one canonical dialect so that the differ only ever sees
real structural change.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .parser import ColumnDef, ParseError, SchemaSnapshot, TableDef

DEFAULT_KEYWORD_MAP = (("autoincrement", "auto_increment"),)


class NormalizeError(ValueError):
    """Raised when normalization would destroy information."""


@dataclass(frozen=True)
class NormalizeConfig:
    default_type: str = "integer"
    case_fold: str = "lower"  # "lower" or "preserve"
    keyword_map: tuple[tuple[str, str], ...] = DEFAULT_KEYWORD_MAP

    def validate(self) -> None:
        if not self.default_type:
            raise NormalizeError("default_type must be nonempty")
        if self.case_fold not in ("lower", "preserve"):
            raise NormalizeError(f"unknown case_fold mode {self.case_fold!r}")
        sources = {src.lower() for src, _ in self.keyword_map}
        for _, dst in self.keyword_map:
            if dst.lower() in sources:
                raise NormalizeError(
                    f"keyword_map entry {dst!r} is also a mapped source; chained maps break idempotence"
                )


_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_QUOTED_SPAN_RE = re.compile(r"'(?:[^']|'')*'|\"[^\"]*\"")


def _fold_text(text: str, cfg: NormalizeConfig, mapped: dict[str, str]) -> str:
    """Lowercase and keyword-map the word tokens of free text.

    Quoted spans (string literals, quoted identifiers) pass through
    untouched; their content is data, not dialect.
    """

    def fold_plain(segment: str) -> str:
        def sub(m: re.Match[str]) -> str:
            word = m.group(0)
            word = mapped.get(word.lower(), word)
            return word.lower() if cfg.case_fold == "lower" else word

        return _WORD_RE.sub(sub, segment)

    out = []
    pos = 0
    for m in _QUOTED_SPAN_RE.finditer(text):
        out.append(fold_plain(text[pos : m.start()]))
        out.append(m.group(0))
        pos = m.end()
    out.append(fold_plain(text[pos:]))
    return "".join(out)


def normalize_table(table: TableDef, cfg: NormalizeConfig) -> TableDef:
    """Rewrite one table into the canonical dialect.

    Typeless columns get ``cfg.default_type``, identifiers are case folded,
    and keyword synonyms are mapped.  Single-column primary keys come out
    flagged inline regardless of how they were declared, so equal keys
    always compare equal.  Raises NormalizeError when folding makes two
    column names collide.
    """
    cfg.validate()
    fold = (lambda s: s.lower()) if cfg.case_fold == "lower" else (lambda s: s)
    mapped = {src.lower(): dst for src, dst in cfg.keyword_map}

    primary_key = tuple(fold(c) for c in table.primary_key)
    columns = []
    for col in table.columns:
        name = fold(col.name)
        col_type = col.col_type if col.col_type is not None else cfg.default_type
        columns.append(
            ColumnDef(
                name=name,
                col_type=_fold_text(col_type, cfg, mapped),
                not_null=col.not_null,
                default_value=None
                if col.default_value is None
                else _fold_text(col.default_value, cfg, {}),
                is_pk_inline=len(primary_key) == 1 and primary_key[0] == name,
                raw_attrs=tuple(_fold_text(a, cfg, mapped) for a in col.raw_attrs),
            )
        )

    seen: dict[str, str] = {}
    for original, folded in zip(table.columns, columns):
        if folded.name in seen:
            raise NormalizeError(
                f"case folding collides column names {seen[folded.name]!r} and "
                f"{original.name!r} in table {table.name!r}"
            )
        seen[folded.name] = original.name

    return TableDef(
        name=fold(table.name),
        columns=tuple(columns),
        primary_key=primary_key,
        uniques=tuple(sorted(tuple(fold(c) for c in unique) for unique in table.uniques)),
        foreign_keys=tuple(
            replace(
                fk,
                columns=tuple(fold(c) for c in fk.columns),
                ref_table=fold(fk.ref_table),
                ref_columns=tuple(fold(c) for c in fk.ref_columns),
                options=_fold_text(fk.options, cfg, mapped) if fk.options else "",
            )
            for fk in table.foreign_keys
        ),
        raw_constraints=tuple(_fold_text(c, cfg, mapped) for c in table.raw_constraints),
    )


def normalize_snapshot(snapshot: SchemaSnapshot, cfg: NormalizeConfig) -> SchemaSnapshot:
    """Normalize every table of a snapshot.

    A table that cannot be normalized is dropped and recorded as an error,
    which marks the snapshot partial.  Table names that collide after
    folding keep the later definition, mirroring the duplicate-statement
    rule, and are recorded as errors too.
    """
    tables: dict[str, TableDef] = {}
    origin: dict[str, str] = {}
    errors = list(snapshot.errors)
    for table in snapshot.tables.values():
        try:
            folded = normalize_table(table, cfg)
        except NormalizeError as exc:
            errors.append(ParseError("<normalize>", 0, str(exc), table.name))
            continue
        if folded.name in tables:
            errors.append(
                ParseError(
                    "<normalize>",
                    0,
                    f"case folding collides table names {origin[folded.name]!r} and "
                    f"{table.name!r}; keeping {table.name!r}",
                    table.name,
                )
            )
        tables[folded.name] = folded
        origin[folded.name] = table.name
    return SchemaSnapshot(
        revision=snapshot.revision,
        tables=tables,
        errors=tuple(errors),
        warnings=snapshot.warnings,
        normalized_with=cfg,
    )


def order_for_emission(snapshot: SchemaSnapshot) -> tuple[list[TableDef], list[str]]:
    """Order tables so foreign-key targets come before their referrers.

    Ties break alphabetically.  If the reference graph has a cycle the
    remaining tables are appended in plain alphabetical order and a
    diagnostic names the tables on the cycle.
    """
    names = sorted(snapshot.tables)
    deps: dict[str, set[str]] = {}
    for name in names:
        table = snapshot.tables[name]
        deps[name] = {
            fk.ref_table
            for fk in table.foreign_keys
            if fk.ref_table in snapshot.tables and fk.ref_table != name
        }

    ordered: list[str] = []
    emitted: set[str] = set()
    remaining = list(names)
    while remaining:
        ready = [n for n in remaining if deps[n] <= emitted]
        if not ready:
            break
        ordered.append(ready[0])
        emitted.add(ready[0])
        remaining.remove(ready[0])

    diagnostics: list[str] = []
    if remaining:
        cyclic = sorted(n for n in remaining if _reaches_itself(n, deps))
        diagnostics.append(
            "foreign-key cycle among tables: "
            + ", ".join(cyclic)
            + "; falling back to alphabetical order"
        )
        ordered.extend(sorted(remaining))
    return [snapshot.tables[n] for n in ordered], diagnostics


def _reaches_itself(start: str, deps: dict[str, set[str]]) -> bool:
    stack = list(deps.get(start, ()))
    seen: set[str] = set()
    while stack:
        node = stack.pop()
        if node == start:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(deps.get(node, ()))
    return False
