"""Shared test support: an independent diff oracle and schema generators.

The oracle recomputes per-kind operation counts from nothing but set
arithmetic over the two snapshots, deliberately sharing no code with the
differ.  The generators produce snapshots in normalized shape (lowercase,
typed columns, canonical inline-key flag) at the sizes the differ tests
call for.
"""

from __future__ import annotations

import random

from schemahist.differ import SMOKind
from schemahist.parser import ColumnDef, SchemaSnapshot, TableDef

TYPE_VOCAB = ("integer", "text", "real", "blob", "varchar(255)", "unsigned int")
DEFAULT_VOCAB = (None, "0", "1", "0.0", "''", "'x'", "null", "current_timestamp")
NAME_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def oracle_counts(old: SchemaSnapshot, new: SchemaSnapshot) -> dict[SMOKind, int]:
    """Per-kind operation counts computed by brute-force set differences."""
    counts = {kind: 0 for kind in SMOKind}
    old_names = set(old.tables)
    new_names = set(new.tables)
    counts[SMOKind.DROP_TABLE] = len(old_names - new_names)
    counts[SMOKind.CREATE_TABLE] = len(new_names - old_names)
    for name in old_names & new_names:
        before = old.tables[name]
        after = new.tables[name]
        old_cols = {c.name: c for c in before.columns}
        new_cols = {c.name: c for c in after.columns}
        counts[SMOKind.ADD_COLUMN] += len(set(new_cols) - set(old_cols))
        counts[SMOKind.DROP_COLUMN] += len(set(old_cols) - set(new_cols))
        for col in set(old_cols) & set(new_cols):
            if old_cols[col].col_type != new_cols[col].col_type:
                counts[SMOKind.TYPE_CHANGE] += 1
            if old_cols[col].default_value != new_cols[col].default_value:
                counts[SMOKind.INIT_CHANGE] += 1
        if before.primary_key != after.primary_key:
            counts[SMOKind.KEY_CHANGE] += 1
    return counts


def _fresh_name(rng: random.Random, taken: set[str]) -> str:
    while True:
        name = "".join(rng.choice(NAME_ALPHABET) for _ in range(rng.randint(2, 6)))
        if name not in taken:
            taken.add(name)
            return name


def _with_canonical_pk(columns: list[ColumnDef], pk: tuple[str, ...]) -> list[ColumnDef]:
    from dataclasses import replace

    return [
        replace(c, is_pk_inline=len(pk) == 1 and c.name == pk[0])
        for c in columns
    ]


def random_table(rng: random.Random, name: str, max_columns: int = 6) -> TableDef:
    taken: set[str] = set()
    columns = [
        ColumnDef(
            name=_fresh_name(rng, taken),
            col_type=rng.choice(TYPE_VOCAB),
            not_null=rng.random() < 0.3,
            default_value=rng.choice(DEFAULT_VOCAB),
        )
        for _ in range(rng.randint(1, max_columns))
    ]
    names = [c.name for c in columns]
    pk: tuple[str, ...] = ()
    if rng.random() < 0.5:
        k = rng.randint(1, min(2, len(names)))
        pk = tuple(rng.sample(names, k))
    columns = _with_canonical_pk(columns, pk)
    uniques: tuple[tuple[str, ...], ...] = ()
    if rng.random() < 0.25 and len(names) >= 2:
        uniques = (tuple(rng.sample(names, 2)),)
    return TableDef(
        name=name,
        columns=tuple(columns),
        primary_key=pk,
        uniques=uniques,
    )


def random_snapshot(rng: random.Random, revision: str = "old", max_tables: int = 5) -> SchemaSnapshot:
    taken: set[str] = set()
    tables = {}
    for _ in range(rng.randint(0, max_tables)):
        name = _fresh_name(rng, taken)
        tables[name] = random_table(rng, name)
    return SchemaSnapshot(revision=revision, tables=tables)


def mutate_snapshot(
    rng: random.Random, base: SchemaSnapshot, revision: str = "new", max_tables: int = 5
) -> SchemaSnapshot:
    """Randomly perturbed copy: some real changes, some deliberate no-ops."""
    from dataclasses import replace as _replace

    tables = dict(base.tables)
    taken = set(tables)
    for _ in range(rng.randint(0, 6)):
        op = rng.randint(0, 8)
        if op == 0 and tables:
            del tables[rng.choice(sorted(tables))]
        elif op == 1 and len(tables) < max_tables:
            name = _fresh_name(rng, taken)
            tables[name] = random_table(rng, name)
        elif tables:
            name = rng.choice(sorted(tables))
            table = tables[name]
            columns = list(table.columns)
            pk = table.primary_key
            uniques = table.uniques
            if op == 2 and len(columns) < 6:
                col_taken = {c.name for c in columns}
                columns.append(
                    ColumnDef(
                        _fresh_name(rng, col_taken),
                        rng.choice(TYPE_VOCAB),
                        default_value=rng.choice(DEFAULT_VOCAB),
                    )
                )
            elif op == 3 and len(columns) > 1:
                victim = rng.choice(columns)
                columns = [c for c in columns if c.name != victim.name]
                pk = tuple(c for c in pk if c != victim.name)
                uniques = tuple(u for u in uniques if victim.name not in u)
            elif op == 4:
                idx = rng.randrange(len(columns))
                current = columns[idx]
                choices = [t for t in TYPE_VOCAB if t != current.col_type]
                columns[idx] = _replace(current, col_type=rng.choice(choices))
            elif op == 5:
                idx = rng.randrange(len(columns))
                current = columns[idx]
                choices = [d for d in DEFAULT_VOCAB if d != current.default_value]
                columns[idx] = _replace(current, default_value=rng.choice(choices))
            elif op == 6:
                names = [c.name for c in columns]
                k = rng.randint(0, min(2, len(names)))
                pk = tuple(rng.sample(names, k))
            elif op == 7:
                rng.shuffle(columns)  # must produce zero operations
            elif op == 8:
                idx = rng.randrange(len(columns))
                current = columns[idx]
                columns[idx] = _replace(current, not_null=not current.not_null)
            columns = _with_canonical_pk(columns, pk)
            tables[name] = _replace(
                table, columns=tuple(columns), primary_key=pk, uniques=uniques
            )
    return SchemaSnapshot(revision=revision, tables=tables)


def make_table(name, *cols, primary_key=(), uniques=(), foreign_keys=()):
    """Tiny table factory for hand-written cases.

    Columns may be bare names (typed 'integer') or ready ColumnDef values:
    make_table('t', 'a', ColumnDef('b', 'text')).
    """
    columns = tuple(
        col if isinstance(col, ColumnDef) else ColumnDef(col, "integer") for col in cols
    )
    return TableDef(
        name=name,
        columns=columns,
        primary_key=tuple(primary_key),
        uniques=tuple(uniques),
        foreign_keys=tuple(foreign_keys),
    )
