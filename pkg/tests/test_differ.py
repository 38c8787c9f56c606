from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schemahist.differ import (
    DiffResult,
    InvariantViolation,
    SMO,
    SMOKind,
    apply_smos,
    diff_consecutive,
    diff_schemas,
    diff_tables,
    snapshots_equivalent,
    table_projection,
    tables_equivalent,
    verify_diffs,
)
from schemahist.normalizer import NormalizeConfig
from schemahist.parser import ColumnDef, ForeignKey, ParseError, SchemaSnapshot, TableDef
from helpers import make_table, mutate_snapshot, oracle_counts, random_snapshot


def snap(*tables: TableDef, revision: str = "r", **kwargs) -> SchemaSnapshot:
    return SchemaSnapshot(revision, {t.name: t for t in tables}, **kwargs)


def kinds(smos) -> list[SMOKind]:
    return [s.kind for s in smos]


def test_identical_tables_no_smos():
    table = make_table("t", "a", "b")
    assert diff_tables(table, table) == []


def test_add_and_drop_column():
    old = make_table("t", "a", "b")
    new = make_table("t", "b", "c")
    smos = diff_tables(old, new)
    assert kinds(smos) == [SMOKind.ADD_COLUMN, SMOKind.DROP_COLUMN]
    assert smos[0].column == "c" and smos[1].column == "a"


def test_type_change():
    old = make_table("t", ColumnDef("a", "integer"))
    new = make_table("t", ColumnDef("a", "text"))
    smos = diff_tables(old, new)
    assert smos == [SMO(SMOKind.TYPE_CHANGE, "t", "a", old="integer", new="text")]


def test_init_change_is_textual():
    old = make_table("t", ColumnDef("a", "real", default_value="0"))
    new = make_table("t", ColumnDef("a", "real", default_value="0.0"))
    smos = diff_tables(old, new)
    assert smos == [SMO(SMOKind.INIT_CHANGE, "t", "a", old="0", new="0.0")]


def test_init_change_add_and_remove_default():
    base = make_table("t", ColumnDef("a", "integer"))
    with_default = make_table("t", ColumnDef("a", "integer", default_value="7"))
    assert kinds(diff_tables(base, with_default)) == [SMOKind.INIT_CHANGE]
    assert kinds(diff_tables(with_default, base)) == [SMOKind.INIT_CHANGE]


def test_type_and_init_change_on_same_column():
    old = make_table("t", ColumnDef("a", "integer", default_value="0"))
    new = make_table("t", ColumnDef("a", "text", default_value="'x'"))
    assert kinds(diff_tables(old, new)) == [SMOKind.TYPE_CHANGE, SMOKind.INIT_CHANGE]


def test_key_change_single():
    old = make_table("t", "a", "b", primary_key=("a",))
    new = make_table("t", "a", "b", primary_key=("b",))
    smos = diff_tables(old, new)
    assert smos == [SMO(SMOKind.KEY_CHANGE, "t", old=("a",), new=("b",))]


def test_key_change_is_order_sensitive():
    old = make_table("t", "a", "b", primary_key=("a", "b"))
    new = make_table("t", "a", "b", primary_key=("b", "a"))
    assert kinds(diff_tables(old, new)) == [SMOKind.KEY_CHANGE]


def test_key_add_and_removal_are_one_change_each():
    bare = make_table("t", "a", "b")
    keyed = make_table("t", "a", "b", primary_key=("a", "b"))
    assert kinds(diff_tables(bare, keyed)) == [SMOKind.KEY_CHANGE]
    assert kinds(diff_tables(keyed, bare)) == [SMOKind.KEY_CHANGE]


def test_unmodeled_details_produce_no_smos():
    old = TableDef(
        "t",
        (ColumnDef("a", "integer", not_null=False), ColumnDef("b", "text")),
        uniques=(("a",),),
    )
    new = TableDef(
        "t",
        (ColumnDef("b", "text"), ColumnDef("a", "integer", not_null=True)),
        uniques=(("a", "b"),),
        foreign_keys=(ForeignKey(("a",), "other"),),
    )
    assert diff_tables(old, new) == []


def test_diff_tables_requires_same_name():
    with pytest.raises(ValueError):
        diff_tables(make_table("a", "x"), make_table("b", "x"))


def test_rename_is_drop_plus_create():
    old = snap(make_table("before", "x"), revision="r1")
    new = snap(make_table("after", "x"), revision="r2")
    result = diff_schemas(old, new)
    assert kinds(result.smos) == [SMOKind.DROP_TABLE, SMOKind.CREATE_TABLE]
    assert [s.table for s in result.smos] == ["before", "after"]


def test_drop_table_does_not_cascade():
    old = snap(make_table("t", "a", "b", "c"), revision="r1")
    new = snap(revision="r2")
    result = diff_schemas(old, new)
    assert result.smos == (SMO(SMOKind.DROP_TABLE, "t", old=old.tables["t"]),)


def test_create_table_does_not_cascade():
    new_table = make_table("t", "a", "b", "c", primary_key=("a",))
    result = diff_schemas(snap(revision="r1"), snap(new_table, revision="r2"))
    assert result.smos == (SMO(SMOKind.CREATE_TABLE, "t", new=new_table),)


def test_diff_schemas_emission_order():
    old = snap(
        make_table("keep_b", ColumnDef("x", "integer"), "gone"),
        make_table("keep_a", "x"),
        make_table("drop_z", "x"),
        make_table("drop_a", "x"),
        revision="r1",
    )
    new = snap(
        make_table("keep_b", ColumnDef("x", "text"), "fresh", primary_key=("x",)),
        make_table("keep_a", "x"),
        make_table("add_z", "x"),
        make_table("add_a", "x"),
        revision="r2",
    )
    result = diff_schemas(old, new)
    labels = [(s.kind, s.table, s.column) for s in result.smos]
    assert labels == [
        (SMOKind.DROP_TABLE, "drop_a", None),
        (SMOKind.DROP_TABLE, "drop_z", None),
        (SMOKind.CREATE_TABLE, "add_a", None),
        (SMOKind.CREATE_TABLE, "add_z", None),
        (SMOKind.TYPE_CHANGE, "keep_b", "x"),
        (SMOKind.ADD_COLUMN, "keep_b", "fresh"),
        (SMOKind.DROP_COLUMN, "keep_b", "gone"),
        (SMOKind.KEY_CHANGE, "keep_b", None),
    ]


def test_diff_schemas_revision_labels():
    result = diff_schemas(snap(revision="v1"), snap(revision="v2"))
    assert (result.from_revision, result.to_revision) == ("v1", "v2")
    assert result.smos == () and not result.suspect


def test_partial_snapshot_marks_diff_suspect():
    broken = snap(revision="r1", errors=(ParseError("f", 1, "bad"),))
    clean = snap(revision="r2")
    assert diff_schemas(broken, clean).suspect
    assert diff_schemas(clean, broken).suspect
    assert not diff_schemas(clean, clean).suspect


def test_diff_schemas_rejects_mismatched_normalization():
    a = snap(revision="r1")
    b = snap(revision="r2")
    a = SchemaSnapshot("r1", {}, normalized_with=NormalizeConfig())
    b = SchemaSnapshot("r2", {}, normalized_with=NormalizeConfig(case_fold="preserve"))
    with pytest.raises(ValueError):
        diff_schemas(a, b)


def test_diff_consecutive_pairs():
    snaps = [snap(revision=f"r{i}") for i in range(4)]
    results = diff_consecutive(snaps)
    assert [(d.from_revision, d.to_revision) for d in results] == [
        ("r0", "r1"),
        ("r1", "r2"),
        ("r2", "r3"),
    ]
    assert diff_consecutive([snaps[0]]) == []
    assert diff_consecutive([]) == []


# ---------------------------------------------------------------------------
# SMO construction invariants


def test_smo_rejects_equal_payloads():
    with pytest.raises(InvariantViolation):
        SMO(SMOKind.TYPE_CHANGE, "t", "c", old="integer", new="integer")


def test_smo_rejects_column_on_table_kind():
    with pytest.raises(InvariantViolation):
        SMO(SMOKind.DROP_TABLE, "t", column="c")


def test_smo_requires_column_on_column_kind():
    with pytest.raises(InvariantViolation):
        SMO(SMOKind.ADD_COLUMN, "t")


# ---------------------------------------------------------------------------
# Replay


def test_apply_smos_roundtrip_example():
    old = snap(
        make_table("a", "x", ColumnDef("y", "text", default_value="'old'")),
        make_table("gone", "x"),
        revision="r1",
    )
    new = snap(
        make_table("a", "x", ColumnDef("y", "text", default_value="'new'"), "z"),
        make_table("born", "x"),
        revision="r2",
    )
    result = diff_schemas(old, new)
    replayed = apply_smos(old, result.smos)
    assert snapshots_equivalent(replayed, new)


def test_apply_create_existing_table_raises():
    base = snap(make_table("t", "a"))
    with pytest.raises(InvariantViolation):
        apply_smos(base, [SMO(SMOKind.CREATE_TABLE, "t", new=make_table("t", "a"))])


def test_apply_drop_missing_table_raises():
    with pytest.raises(InvariantViolation):
        apply_smos(snap(), [SMO(SMOKind.DROP_TABLE, "t", old=make_table("t", "a"))])


def test_apply_add_existing_column_raises():
    base = snap(make_table("t", "a"))
    smo = SMO(SMOKind.ADD_COLUMN, "t", "a", new=ColumnDef("a", "integer"))
    with pytest.raises(InvariantViolation):
        apply_smos(base, [smo])


def test_apply_change_on_missing_column_raises():
    base = snap(make_table("t", "a"))
    smo = SMO(SMOKind.TYPE_CHANGE, "t", "zzz", old="integer", new="text")
    with pytest.raises(InvariantViolation):
        apply_smos(base, [smo])


def test_apply_stale_type_payload_raises():
    base = snap(make_table("t", ColumnDef("a", "text")))
    smo = SMO(SMOKind.TYPE_CHANGE, "t", "a", old="integer", new="blob")
    with pytest.raises(InvariantViolation):
        apply_smos(base, [smo])


def test_apply_stale_key_payload_raises():
    base = snap(make_table("t", "a", "b", primary_key=("a",)))
    smo = SMO(SMOKind.KEY_CHANGE, "t", old=("b",), new=("a", "b"))
    with pytest.raises(InvariantViolation):
        apply_smos(base, [smo])


def test_apply_does_not_mutate_input():
    base = snap(make_table("t", "a"))
    before = dict(base.tables)
    apply_smos(base, [SMO(SMOKind.ADD_COLUMN, "t", "b", new=ColumnDef("b", "integer"))])
    assert base.tables == before


def test_verify_diffs_passes_on_honest_history():
    snaps = [
        snap(make_table("t", "a"), revision="r0"),
        snap(make_table("t", "a", "b"), revision="r1"),
        snap(make_table("t", "b"), revision="r2"),
    ]
    verify_diffs(snaps, diff_consecutive(snaps))


def test_verify_diffs_catches_tampered_diff():
    snaps = [
        snap(make_table("t", "a"), revision="r0"),
        snap(make_table("t", "a", "b"), revision="r1"),
    ]
    tampered = [DiffResult("r0", "r1", ())]
    with pytest.raises(InvariantViolation):
        verify_diffs(snaps, tampered)


def test_verify_diffs_checks_alignment():
    with pytest.raises(InvariantViolation):
        verify_diffs([snap(revision="r0")], [DiffResult("r0", "r1", ())])


# ---------------------------------------------------------------------------
# Projection equivalence


def test_projection_ignores_order_nullability_and_constraints():
    a = TableDef(
        "t",
        (ColumnDef("x", "integer"), ColumnDef("y", "text", not_null=True)),
        uniques=(("x",),),
    )
    b = TableDef(
        "t",
        (ColumnDef("y", "text"), ColumnDef("x", "integer", not_null=True)),
        foreign_keys=(ForeignKey(("x",), "p"),),
    )
    assert tables_equivalent(a, b)
    assert table_projection(a) == table_projection(b)


def test_projection_sees_modeled_fields():
    base = make_table("t", ColumnDef("x", "integer"))
    assert not tables_equivalent(base, make_table("t", ColumnDef("x", "text")))
    assert not tables_equivalent(base, make_table("t", ColumnDef("x", "integer", default_value="1")))
    assert not tables_equivalent(base, make_table("t", ColumnDef("x", "integer"), primary_key=("x",)))


def test_snapshots_equivalent_ignores_revision():
    a = snap(make_table("t", "x"), revision="r1")
    b = snap(make_table("t", "x"), revision="r2")
    assert snapshots_equivalent(a, b)
    assert not snapshots_equivalent(a, snap(revision="r2"))


# ---------------------------------------------------------------------------
# Randomized agreement with the oracle


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diff_counts_match_oracle(seed):
    rng = random.Random(seed)
    old = random_snapshot(rng, revision="old")
    new = mutate_snapshot(rng, old, revision="new")
    result = diff_schemas(old, new)
    got = {kind: 0 for kind in SMOKind}
    for smo in result.smos:
        got[smo.kind] += 1
    assert got == oracle_counts(old, new)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diff_replay_reaches_new_snapshot(seed):
    rng = random.Random(seed)
    old = random_snapshot(rng, revision="old")
    new = mutate_snapshot(rng, old, revision="new")
    replayed = apply_smos(old, diff_schemas(old, new).smos)
    assert snapshots_equivalent(replayed, new)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diff_is_deterministic(seed):
    rng = random.Random(seed)
    old = random_snapshot(rng, revision="old")
    new = mutate_snapshot(rng, old, revision="new")
    assert diff_schemas(old, new) == diff_schemas(old, new)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_self_diff_is_empty(seed):
    rng = random.Random(seed)
    old = random_snapshot(rng, revision="old")
    clone = SchemaSnapshot("new", dict(old.tables))
    assert diff_schemas(old, clone).smos == ()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reversed_diff_swaps_creates_and_drops(seed):
    rng = random.Random(seed)
    a = random_snapshot(rng, revision="a")
    b = mutate_snapshot(rng, a, revision="b")
    forward = diff_schemas(a, b).smos
    backward = diff_schemas(b, a).smos

    def names(smos, kind):
        return {smo.table for smo in smos if smo.kind is kind}

    assert names(forward, SMOKind.CREATE_TABLE) == names(backward, SMOKind.DROP_TABLE)
    assert names(forward, SMOKind.DROP_TABLE) == names(backward, SMOKind.CREATE_TABLE)
    # Column-level adds and drops mirror each other the same way.
    def cols(smos, kind):
        return {(smo.table, smo.column) for smo in smos if smo.kind is kind}

    assert cols(forward, SMOKind.ADD_COLUMN) == cols(backward, SMOKind.DROP_COLUMN)
    assert cols(forward, SMOKind.DROP_COLUMN) == cols(backward, SMOKind.ADD_COLUMN)
