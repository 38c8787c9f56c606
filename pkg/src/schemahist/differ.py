"""Compute schema modification operations between snapshots.

Consecutive snapshots are compared table by table (matched by name only;
a rename therefore shows up as a drop plus a create).  Seven operation
kinds cover everything the change taxonomy distinguishes: table creation
and removal, column addition and removal, type changes, default-value
changes, and primary-key changes.  ``apply_smos`` replays a diff against
its old snapshot and is used as a self-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .parser import ColumnDef, SchemaSnapshot, TableDef


class SMOKind(str, Enum):
    CREATE_TABLE = "create_table"
    DROP_TABLE = "drop_table"
    ADD_COLUMN = "add_column"
    DROP_COLUMN = "drop_column"
    TYPE_CHANGE = "type_change"
    INIT_CHANGE = "init_change"
    KEY_CHANGE = "key_change"


KIND_LABELS = {
    SMOKind.CREATE_TABLE: "CREATE TABLE",
    SMOKind.DROP_TABLE: "DROP TABLE",
    SMOKind.ADD_COLUMN: "ADD COLUMN",
    SMOKind.DROP_COLUMN: "DROP COLUMN",
    SMOKind.TYPE_CHANGE: "Type change",
    SMOKind.INIT_CHANGE: "Init change",
    SMOKind.KEY_CHANGE: "Key change",
}

_COLUMN_KINDS = frozenset(
    {SMOKind.ADD_COLUMN, SMOKind.DROP_COLUMN, SMOKind.TYPE_CHANGE, SMOKind.INIT_CHANGE}
)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; this signals a bug, not bad input."""


@dataclass(frozen=True)
class SMO:
    """One schema modification operation."""

    kind: SMOKind
    table: str
    column: str | None = None
    old: object = None
    new: object = None

    def __post_init__(self) -> None:
        if (self.column is not None) != (self.kind in _COLUMN_KINDS):
            raise InvariantViolation(f"{self.kind.value} SMO with column={self.column!r}")
        if self.kind in (SMOKind.TYPE_CHANGE, SMOKind.INIT_CHANGE, SMOKind.KEY_CHANGE):
            if self.old == self.new:
                raise InvariantViolation(f"{self.kind.value} SMO with equal old/new payloads")


@dataclass(frozen=True)
class DiffResult:
    from_revision: str
    to_revision: str
    smos: tuple[SMO, ...]
    suspect: bool = False


def table_projection(table: TableDef) -> tuple:
    """The slice of a table the operation vocabulary can express.

    Column order, NOT NULL, unique constraints, foreign keys, and raw
    attributes all change without emitting any operation, so replay
    checks compare this projection rather than whole definitions.
    """
    return (
        table.name,
        table.primary_key,
        {c.name: (c.col_type, c.default_value) for c in table.columns},
    )


def tables_equivalent(a: TableDef, b: TableDef) -> bool:
    return table_projection(a) == table_projection(b)


def snapshots_equivalent(a: SchemaSnapshot, b: SchemaSnapshot) -> bool:
    """Structural equality over the modeled slice, ignoring revision labels."""
    if set(a.tables) != set(b.tables):
        return False
    return all(tables_equivalent(a.tables[name], b.tables[name]) for name in a.tables)


def diff_tables(old: TableDef, new: TableDef) -> list[SMO]:
    """Column-level and key-level operations between two same-name tables.

    Additions and changes follow the newer table's column order, drops
    follow the older table's order, and a key change comes last.  Column
    order itself is never a change, and NOT NULL is outside the taxonomy.
    """
    if old.name != new.name:
        raise ValueError(f"diff_tables requires matching names, got {old.name!r} and {new.name!r}")
    smos: list[SMO] = []
    old_cols = {c.name: c for c in old.columns}
    new_cols = {c.name: c for c in new.columns}
    for col in new.columns:
        before = old_cols.get(col.name)
        if before is None:
            smos.append(SMO(SMOKind.ADD_COLUMN, new.name, col.name, new=col))
            continue
        if before.col_type != col.col_type:
            smos.append(
                SMO(SMOKind.TYPE_CHANGE, new.name, col.name, old=before.col_type, new=col.col_type)
            )
        if before.default_value != col.default_value:
            smos.append(
                SMO(
                    SMOKind.INIT_CHANGE,
                    new.name,
                    col.name,
                    old=before.default_value,
                    new=col.default_value,
                )
            )
    for col in old.columns:
        if col.name not in new_cols:
            smos.append(SMO(SMOKind.DROP_COLUMN, old.name, col.name, old=col))
    if old.primary_key != new.primary_key:
        smos.append(SMO(SMOKind.KEY_CHANGE, new.name, old=old.primary_key, new=new.primary_key))
    return smos


def diff_schemas(old: SchemaSnapshot, new: SchemaSnapshot) -> DiffResult:
    """All operations turning ``old`` into ``new``.

    Emission order is fixed: dropped tables, created tables, then matched
    tables, each group alphabetically.  A create or drop never cascades
    into per-column operations.  The result is suspect when either input
    snapshot is partial.
    """
    if (
        old.normalized_with is not None
        and new.normalized_with is not None
        and old.normalized_with != new.normalized_with
    ):
        raise ValueError("snapshots were normalized under different configurations")
    smos: list[SMO] = []
    for name in sorted(set(old.tables) - set(new.tables)):
        smos.append(SMO(SMOKind.DROP_TABLE, name, old=old.tables[name]))
    for name in sorted(set(new.tables) - set(old.tables)):
        smos.append(SMO(SMOKind.CREATE_TABLE, name, new=new.tables[name]))
    for name in sorted(set(old.tables) & set(new.tables)):
        smos.extend(diff_tables(old.tables[name], new.tables[name]))
    return DiffResult(
        from_revision=old.revision,
        to_revision=new.revision,
        smos=tuple(smos),
        suspect=old.partial or new.partial,
    )


def diff_consecutive(snapshots: list[SchemaSnapshot]) -> list[DiffResult]:
    """Diff each snapshot against its successor."""
    return [diff_schemas(a, b) for a, b in zip(snapshots, snapshots[1:])]


def _apply_one(tables: dict[str, TableDef], smo: SMO) -> None:
    if smo.kind == SMOKind.CREATE_TABLE:
        if smo.table in tables:
            raise InvariantViolation(f"create of existing table {smo.table!r}")
        if not isinstance(smo.new, TableDef):
            raise InvariantViolation("create_table SMO without a TableDef payload")
        tables[smo.table] = smo.new
        return
    if smo.kind == SMOKind.DROP_TABLE:
        if smo.table not in tables:
            raise InvariantViolation(f"drop of missing table {smo.table!r}")
        del tables[smo.table]
        return

    table = tables.get(smo.table)
    if table is None:
        raise InvariantViolation(f"{smo.kind.value} against missing table {smo.table!r}")

    if smo.kind == SMOKind.KEY_CHANGE:
        if table.primary_key != smo.old:
            raise InvariantViolation(f"stale key_change payload for table {smo.table!r}")
        new_pk = tuple(smo.new)  # type: ignore[arg-type]
        columns = tuple(
            replace(c, is_pk_inline=len(new_pk) == 1 and c.name == new_pk[0])
            for c in table.columns
        )
        tables[smo.table] = replace(table, primary_key=new_pk, columns=columns)
        return

    names = table.column_names()
    if smo.kind == SMOKind.ADD_COLUMN:
        if smo.column in names:
            raise InvariantViolation(f"add of existing column {smo.table}.{smo.column}")
        if not isinstance(smo.new, ColumnDef):
            raise InvariantViolation("add_column SMO without a ColumnDef payload")
        tables[smo.table] = replace(table, columns=table.columns + (smo.new,))
        return
    if smo.column not in names:
        raise InvariantViolation(f"{smo.kind.value} against missing column {smo.table}.{smo.column}")
    if smo.kind == SMOKind.DROP_COLUMN:
        kept = tuple(c for c in table.columns if c.name != smo.column)
        tables[smo.table] = replace(table, columns=kept)
        return

    def update(col: ColumnDef) -> ColumnDef:
        if col.name != smo.column:
            return col
        if smo.kind == SMOKind.TYPE_CHANGE:
            if col.col_type != smo.old:
                raise InvariantViolation(f"stale type_change payload for {smo.table}.{smo.column}")
            return replace(col, col_type=smo.new)
        if col.default_value != smo.old:
            raise InvariantViolation(f"stale init_change payload for {smo.table}.{smo.column}")
        return replace(col, default_value=smo.new)

    tables[smo.table] = replace(table, columns=tuple(update(c) for c in table.columns))


def apply_smos(base: SchemaSnapshot, smos: tuple[SMO, ...] | list[SMO]) -> SchemaSnapshot:
    """Replay operations against a snapshot.

    Every operation validates its preconditions; a violation means the
    diff and the snapshot disagree, which is an internal bug by
    construction, so it raises InvariantViolation instead of returning.
    """
    tables = dict(base.tables)
    for smo in smos:
        _apply_one(tables, smo)
    return SchemaSnapshot(
        revision=base.revision,
        tables=tables,
        normalized_with=base.normalized_with,
    )


def verify_diffs(snapshots: list[SchemaSnapshot], diffs: list[DiffResult]) -> None:
    """Check every diff by replaying it; raises InvariantViolation on drift."""
    if len(diffs) != max(len(snapshots) - 1, 0):
        raise InvariantViolation("diff list does not line up with snapshot list")
    for old, new, diff in zip(snapshots, snapshots[1:], diffs):
        replayed = apply_smos(old, diff.smos)
        if not snapshots_equivalent(replayed, new):
            raise InvariantViolation(
                f"replaying diff {diff.from_revision!r} -> {diff.to_revision!r} "
                "does not reproduce the target snapshot"
            )
