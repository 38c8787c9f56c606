"""Parse CREATE TABLE statements into structured table definitions.

The grammar is the cross-dialect subset that embedded-database schemas
actually use: column definitions with optional types, NOT NULL, DEFAULT,
inline and table-level PRIMARY KEY / UNIQUE, and FOREIGN KEY clauses.
Anything else inside the parenthesised element list is captured verbatim
rather than rejected, so one exotic clause never sinks a whole statement.
A statement that cannot be parsed at all yields a ParseError value; the
rest of the snapshot is unaffected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .extractor import RawStatement, StatementKind

# Keywords that may start a table-level element instead of a column.
_CONSTRAINT_STARTERS = {"primary", "unique", "foreign", "check", "constraint", "key", "index"}

# Keywords that terminate the type-name token run of a column definition.
_ATTRIBUTE_STARTERS = {
    "not",
    "null",
    "default",
    "primary",
    "unique",
    "references",
    "check",
    "collate",
    "constraint",
    "autoincrement",
    "auto_increment",
    "on",
    "generated",
    "as",
}


@dataclass(frozen=True)
class ColumnDef:
    name: str
    col_type: str | None = None
    not_null: bool = False
    default_value: str | None = None
    is_pk_inline: bool = False
    raw_attrs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...] = ()
    options: str = ""


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    primary_key: tuple[str, ...] = ()
    uniques: tuple[tuple[str, ...], ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()
    raw_constraints: tuple[str, ...] = ()

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def violations(self) -> list[str]:
        """Invariant check; an empty list means the definition is sound."""
        problems = []
        folded = [c.name.lower() for c in self.columns]
        if len(set(folded)) != len(folded):
            dupes = sorted({n for n in folded if folded.count(n) > 1})
            problems.append("duplicate column names: " + ", ".join(dupes))
        known = set(folded)
        for col in self.primary_key:
            if col.lower() not in known:
                problems.append(f"primary key references unknown column {col!r}")
        for unique in self.uniques:
            for col in unique:
                if col.lower() not in known:
                    problems.append(f"unique constraint references unknown column {col!r}")
        for fk in self.foreign_keys:
            for col in fk.columns:
                if col.lower() not in known:
                    problems.append(f"foreign key references unknown column {col!r}")
        inline = [c.name for c in self.columns if c.is_pk_inline]
        if inline and tuple(inline) != self.primary_key:
            problems.append("inline primary-key flag disagrees with primary_key")
        return problems


@dataclass(frozen=True)
class ParseError:
    path: str
    line: int
    message: str
    statement_text: str = ""


@dataclass(frozen=True)
class SchemaSnapshot:
    """All tables visible in one revision, plus whatever went wrong."""

    revision: str
    tables: dict[str, TableDef] = field(default_factory=dict)
    errors: tuple[ParseError, ...] = ()
    warnings: tuple[str, ...] = ()
    normalized_with: object = None

    @property
    def partial(self) -> bool:
        return bool(self.errors)


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # word | qword | string | number | punct | eof
    text: str
    norm: str
    line: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<string>'(?:[^']|'')*')
    | (?P<qword>"[^"]*"|`[^`]*`|\[[^\]]*\])
    | (?P<word>[A-Za-z_][A-Za-z0-9_$]*)
    | (?P<number>\d+(?:\.\d*)?|\.\d+)
    | (?P<punct>[(),;.=<>!+\-*/%|&]|\|\|)
    """,
    re.VERBOSE,
)


class _StatementError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(message)
        self.line = line
        self.message = message


def _tokenize(text: str, first_line: int) -> list[_Token]:
    tokens: list[_Token] = []
    line = first_line
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _StatementError(line, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup or ""
        tok = m.group(0)
        if kind != "ws":
            if kind == "qword":
                norm = tok[1:-1]
            elif kind == "word":
                norm = tok.lower()
            else:
                norm = tok
            tokens.append(_Token(kind, tok, norm, line))
        line += tok.count("\n")
        pos = m.end()
    last = tokens[-1].line if tokens else first_line
    tokens.append(_Token("eof", "", "", last))
    return tokens


def _join(tokens: list[_Token]) -> str:
    """Render a token run with canonical spacing (tight parentheses)."""
    out: list[str] = []
    prev: _Token | None = None
    for tok in tokens:
        if prev is not None and tok.text not in (",", ")", ".") and prev.text not in ("(", "."):
            if tok.text != "(" or prev.kind not in ("word", "qword"):
                out.append(" ")
            # no space between a name and its argument list
        out.append(tok.text)
        prev = tok
    return "".join(out)


class _Cursor:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def take(self) -> _Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.norm in words

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def accept_word(self, *words: str) -> bool:
        if self.at_word(*words):
            self.take()
            return True
        return False

    def expect_word(self, word: str) -> _Token:
        if not self.at_word(word):
            tok = self.peek()
            raise _StatementError(tok.line, f"expected {word.upper()}, found {tok.text or 'end of statement'!r}")
        return self.take()

    def expect_punct(self, text: str) -> _Token:
        if not self.at_punct(text):
            tok = self.peek()
            raise _StatementError(tok.line, f"expected {text!r}, found {tok.text or 'end of statement'!r}")
        return self.take()

    def expect_name(self) -> _Token:
        tok = self.peek()
        if tok.kind not in ("word", "qword"):
            raise _StatementError(tok.line, f"expected identifier, found {tok.text or 'end of statement'!r}")
        return self.take()


def _ident(tok: _Token) -> str:
    """Identifier text: unquoted for quoted forms, verbatim otherwise."""
    return tok.norm if tok.kind == "qword" else tok.text


def _balanced(cur: _Cursor) -> list[_Token]:
    """Consume a parenthesised token group, returning it inclusive."""
    tokens = [cur.expect_punct("(")]
    depth = 1
    while depth:
        tok = cur.take()
        if tok.kind == "eof":
            raise _StatementError(tok.line, "unbalanced parentheses")
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        tokens.append(tok)
    return tokens


def _name_list(cur: _Cursor) -> tuple[str, ...]:
    cur.expect_punct("(")
    names = [_ident(cur.expect_name())]
    while cur.at_punct(","):
        cur.take()
        names.append(_ident(cur.expect_name()))
    cur.expect_punct(")")
    return tuple(names)


def _capture_until_break(cur: _Cursor) -> list[_Token]:
    """Consume tokens up to the next top-level comma or closing paren."""
    tokens: list[_Token] = []
    while True:
        tok = cur.peek()
        if tok.kind == "eof" or tok.text in (",", ")"):
            return tokens
        if tok.text == "(":
            tokens.extend(_balanced(cur))
            continue
        tokens.append(cur.take())


def _default_value(cur: _Cursor) -> str:
    tok = cur.peek()
    if tok.text == "(":
        return _join(_balanced(cur))
    if tok.text in ("-", "+"):
        sign = cur.take()
        num = cur.peek()
        if num.kind != "number":
            raise _StatementError(num.line, "expected number after sign in DEFAULT")
        cur.take()
        return sign.text + num.text
    if tok.kind in ("string", "number", "word", "qword"):
        cur.take()
        return tok.text
    raise _StatementError(tok.line, f"expected literal after DEFAULT, found {tok.text or 'end of statement'!r}")


def _fk_options(cur: _Cursor) -> str:
    """Swallow referential actions and deferrability clauses, verbatim."""
    tokens: list[_Token] = []
    while cur.at_word("on", "match", "deferrable", "not", "initially"):
        # NOT here only ever starts NOT DEFERRABLE; a bare NOT NULL cannot
        # follow a REFERENCES clause in the subset we accept.
        if cur.at_word("not") and not (cur.peek(1).kind == "word" and cur.peek(1).norm == "deferrable"):
            break
        tokens.append(cur.take())
        while not cur.at_punct(",") and not cur.at_punct(")") and cur.peek().kind != "eof":
            nxt = cur.peek()
            if nxt.kind == "word" and nxt.norm in ("on", "match", "deferrable", "initially", "not"):
                break
            tokens.append(cur.take())
    return _join(tokens)


def _references(cur: _Cursor, local: tuple[str, ...]) -> ForeignKey:
    cur.expect_word("references")
    table = _ident(cur.expect_name())
    while cur.at_punct("."):
        cur.take()
        table = _ident(cur.expect_name())
    ref_cols: tuple[str, ...] = ()
    if cur.at_punct("("):
        ref_cols = _name_list(cur)
    return ForeignKey(local, table, ref_cols, _fk_options(cur))


class _TableBuilder:
    def __init__(self, name: str):
        self.name = name
        self.columns: list[ColumnDef] = []
        self.primary_key: tuple[str, ...] = ()
        self.pk_line = 0
        self.uniques: list[tuple[str, ...]] = []
        self.foreign_keys: list[ForeignKey] = []
        self.raw_constraints: list[str] = []

    def set_pk(self, cols: tuple[str, ...], line: int) -> None:
        if self.primary_key:
            raise _StatementError(line, f"multiple PRIMARY KEY definitions for table {self.name!r}")
        self.primary_key = cols
        self.pk_line = line


def _parse_column(cur: _Cursor, builder: _TableBuilder) -> None:
    name_tok = cur.expect_name()
    name = _ident(name_tok)

    type_tokens: list[_Token] = []
    while cur.peek().kind == "word" and cur.peek().norm not in _ATTRIBUTE_STARTERS:
        type_tokens.append(cur.take())
        if cur.at_punct("("):
            type_tokens.extend(_balanced(cur))
    col_type = _join(type_tokens) if type_tokens else None

    not_null = False
    default: str | None = None
    pk_inline = False
    raw_attrs: list[str] = []

    while True:
        tok = cur.peek()
        if tok.kind == "eof" or tok.text in (",", ")"):
            break
        if cur.accept_word("not"):
            cur.expect_word("null")
            not_null = True
            continue
        if cur.accept_word("null"):
            raw_attrs.append("null")
            continue
        if cur.accept_word("default"):
            default = _default_value(cur)
            continue
        if cur.at_word("primary"):
            line = cur.take().line
            cur.expect_word("key")
            if pk_inline:
                raise _StatementError(line, f"multiple PRIMARY KEY definitions for table {builder.name!r}")
            pk_inline = True
            if cur.at_word("asc", "desc"):
                raw_attrs.append(cur.take().norm)
            continue
        if cur.accept_word("unique"):
            builder.uniques.append((name,))
            continue
        if cur.at_word("autoincrement", "auto_increment"):
            raw_attrs.append(cur.take().norm)
            continue
        if cur.at_word("references"):
            builder.foreign_keys.append(_references(cur, (name,)))
            continue
        if cur.at_word("check"):
            kw = cur.take()
            raw_attrs.append(_join([kw] + _balanced(cur)))
            continue
        if cur.at_word("collate"):
            kw = cur.take()
            raw_attrs.append(_join([kw, cur.expect_name()]))
            continue
        if cur.accept_word("constraint"):
            cur.expect_name()  # constraint names carry no schema meaning
            continue
        # Anything else: swallow a run of unknown tokens verbatim.  The
        # first token is always consumed so the loop makes progress even
        # on attribute keywords that have no dedicated branch (ON, AS, ...).
        run: list[_Token] = []
        if cur.at_punct("("):
            run.extend(_balanced(cur))
        else:
            run.append(cur.take())
        while True:
            tok = cur.peek()
            if tok.kind == "eof" or tok.text in (",", ")"):
                break
            if tok.kind == "word" and tok.norm in _ATTRIBUTE_STARTERS:
                break
            if tok.text == "(":
                run.extend(_balanced(cur))
                continue
            run.append(cur.take())
        raw_attrs.append(_join(run))

    if pk_inline:
        builder.set_pk((name,), name_tok.line)
    builder.columns.append(
        ColumnDef(name, col_type, not_null, default, pk_inline, tuple(raw_attrs))
    )


def _parse_element(cur: _Cursor, builder: _TableBuilder) -> None:
    tok = cur.peek()
    if tok.kind == "word" and tok.norm in _CONSTRAINT_STARTERS:
        if cur.accept_word("constraint"):
            cur.expect_name()
            tok = cur.peek()
        if cur.at_word("primary"):
            line = cur.take().line
            cur.expect_word("key")
            builder.set_pk(_name_list(cur), line)
            tail = _capture_until_break(cur)
            if tail:
                builder.raw_constraints.append(_join(tail))
            return
        if cur.accept_word("unique"):
            builder.uniques.append(_name_list(cur))
            tail = _capture_until_break(cur)
            if tail:
                builder.raw_constraints.append(_join(tail))
            return
        if cur.accept_word("foreign"):
            cur.expect_word("key")
            local = _name_list(cur)
            builder.foreign_keys.append(_references(cur, local))
            return
        if cur.at_word("check"):
            kw = cur.take()
            builder.raw_constraints.append(_join([kw] + _balanced(cur)))
            return
        if cur.at_word("key", "index"):
            # MySQL-style secondary index declarations.
            builder.raw_constraints.append(_join(_capture_until_break(cur)))
            return
    if tok.kind in ("word", "qword"):
        _parse_column(cur, builder)
        return
    captured = _capture_until_break(cur)
    if not captured:
        raise _StatementError(tok.line, f"unexpected {tok.text!r} in table element list")
    builder.raw_constraints.append(_join(captured))


def parse_create_table(stmt: RawStatement) -> TableDef | ParseError:
    """Parse one CREATE TABLE statement; a bad one becomes a ParseError."""
    if stmt.statement_kind != StatementKind.CREATE_TABLE:
        raise ValueError("parse_create_table requires a create_table statement")
    try:
        cur = _Cursor(_tokenize(stmt.text, stmt.line_start))
        cur.expect_word("create")
        cur.accept_word("temp", "temporary")
        cur.expect_word("table")
        if cur.at_word("if"):
            cur.take()
            cur.expect_word("not")
            cur.expect_word("exists")
        name = _ident(cur.expect_name())
        while cur.at_punct("."):
            cur.take()
            name = _ident(cur.expect_name())

        builder = _TableBuilder(name)
        cur.expect_punct("(")
        if cur.at_punct(")"):
            raise _StatementError(cur.peek().line, f"table {name!r} declares no columns")
        while True:
            _parse_element(cur, builder)
            if cur.at_punct(","):
                cur.take()
                continue
            cur.expect_punct(")")
            break

        trailing: list[_Token] = []
        while cur.peek().kind != "eof":
            tok = cur.take()
            if tok.text == ";":
                if cur.peek().kind != "eof":
                    raise _StatementError(cur.peek().line, "unexpected content after statement terminator")
                break
            trailing.append(tok)
        if trailing:
            builder.raw_constraints.append(_join(trailing))

        if not builder.columns:
            raise _StatementError(stmt.line_start, f"table {name!r} declares no columns")
        table = TableDef(
            name=name,
            columns=tuple(builder.columns),
            primary_key=builder.primary_key,
            uniques=tuple(builder.uniques),
            foreign_keys=tuple(builder.foreign_keys),
            raw_constraints=tuple(builder.raw_constraints),
        )
        problems = table.violations()
        if problems:
            raise _StatementError(stmt.line_start, "; ".join(problems))
        return table
    except _StatementError as exc:
        return ParseError(stmt.path, exc.line, exc.message, stmt.text)


def parse_schema(
    statements: list[RawStatement],
    revision: str,
    carried_errors: tuple[ParseError, ...] = (),
) -> SchemaSnapshot:
    """Parse every CREATE TABLE statement of a revision into one snapshot.

    Statements are independent: a failure is recorded and skipped without
    touching the rest.  When a table name is declared twice the last
    definition wins and a warning records the earlier one.
    """
    tables: dict[str, TableDef] = {}
    errors = list(carried_errors)
    warnings: list[str] = []
    for stmt in statements:
        if stmt.statement_kind != StatementKind.CREATE_TABLE:
            continue
        result = parse_create_table(stmt)
        if isinstance(result, ParseError):
            errors.append(result)
            continue
        if result.name in tables:
            warnings.append(
                f"duplicate definition of table {result.name!r}; "
                f"keeping the one from {stmt.path}:{stmt.line_start}"
            )
        tables[result.name] = result
    return SchemaSnapshot(revision, tables, tuple(errors), tuple(warnings))


# ---------------------------------------------------------------------------
# Canonical rendering

_BARE_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED_NAMES = _CONSTRAINT_STARTERS | {"not", "default", "references", "create", "table"}


def _render_name(name: str) -> str:
    if _BARE_NAME_RE.fullmatch(name) and name.lower() not in _RESERVED_NAMES:
        return name
    return '"' + name.replace('"', '""') + '"'


def _render_column(col: ColumnDef) -> str:
    parts = [_render_name(col.name)]
    if col.col_type is not None:
        parts.append(col.col_type)
    if col.not_null:
        parts.append("not null")
    if col.default_value is not None:
        parts.append(f"default {col.default_value}")
    if col.is_pk_inline:
        parts.append("primary key")
    parts.extend(col.raw_attrs)
    return " ".join(parts)


def render_table(table: TableDef) -> str:
    """Render a TableDef back to DDL in the canonical layout.

    One element per line, lowercase keywords, tight parentheses.  Parsing
    the output yields a TableDef equal to the input.
    """
    elements = [_render_column(c) for c in table.columns]
    inline_pk = any(c.is_pk_inline for c in table.columns)
    if table.primary_key and not inline_pk:
        elements.append("primary key(" + ", ".join(_render_name(c) for c in table.primary_key) + ")")
    for unique in table.uniques:
        # Single-column uniques render inline only if we wrote them that
        # way originally; emitting them all at table level keeps this simple.
        elements.append("unique(" + ", ".join(_render_name(c) for c in unique) + ")")
    for fk in table.foreign_keys:
        clause = "foreign key(" + ", ".join(_render_name(c) for c in fk.columns) + ")"
        clause += f" references {_render_name(fk.ref_table)}"
        if fk.ref_columns:
            clause += "(" + ", ".join(_render_name(c) for c in fk.ref_columns) + ")"
        if fk.options:
            clause += " " + fk.options
        elements.append(clause)
    elements.extend(table.raw_constraints)
    body = ",\n  ".join(elements)
    return f"create table {_render_name(table.name)} (\n  {body}\n);"


def reparse_rendered(table: TableDef) -> TableDef | ParseError:
    """Round-trip helper: render a table and parse the result."""
    stmt = RawStatement(render_table(table), "<rendered>", 1, 1, StatementKind.CREATE_TABLE)
    return parse_create_table(stmt)
