"""Recover SQL DDL statements from source files.

Two source flavours are supported: plain ``.sql`` scripts, and C-family
code (C, C++, Objective-C) that embeds DDL in string literals.  Embedded
literals are spliced the way the compiler would concatenate them, escape
sequences are decoded, SQL comments are stripped, and the surviving text
is split into individual statements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class FileKind(str, Enum):
    SQL = "sql"
    C_LIKE = "c_like"
    IGNORE = "ignore"


class StatementKind(str, Enum):
    CREATE_TABLE = "create_table"
    OTHER = "other"


@dataclass(frozen=True)
class SourceFile:
    path: str
    kind: FileKind
    content: str


@dataclass(frozen=True)
class RawStatement:
    """One extracted SQL statement, tied back to where it came from."""

    text: str
    path: str
    line_start: int
    line_end: int
    statement_kind: StatementKind


@dataclass(frozen=True)
class SplicedRun:
    """A maximal run of adjacent string literals, decoded and joined."""

    text: str
    line_start: int
    line_end: int


@dataclass(frozen=True)
class ExtractionIssue:
    path: str
    line: int
    message: str


# Matches one C string literal starting at the current position.  Raw
# newlines are not allowed inside; a backslash-newline continuation is.
_STRING_RE = re.compile(r'"(?:\\\n|\\.|[^"\\\n])*"')
_CHAR_RE = re.compile(r"'(?:\\.|[^\\'\n])*'")

_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "0": "\0",
    '"': '"',
    "'": "'",
    "\\": "\\",
}

_CREATE_TABLE_RE = re.compile(r"create\s+table\b", re.IGNORECASE)

# printf-style placeholders that appear inside DDL built at runtime.
_PLACEHOLDER_RE = re.compile(r"%[sdq]")
PARAM_SENTINEL = "__param__"


def _decode_literal(body: str) -> str:
    """Decode the body of a C string literal (quotes already removed)."""
    if "\\" not in body:
        return body
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            if nxt == "\n":
                # Line continuation: vanishes entirely.
                i += 2
                continue
            out.append(_ESCAPES.get(nxt, nxt))
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def splice_string_literals(code: str) -> tuple[list[SplicedRun], list[ExtractionIssue]]:
    """Collect string literals from C-family code, concatenating runs.

    Adjacent literals separated only by whitespace or comments form one
    run, matching compile-time concatenation.  Objective-C ``@"..."``
    literals are treated like plain C literals.  An unterminated literal
    discards the run built so far and is reported as an issue; issues
    carry line numbers but no path (the caller knows the file).
    """
    runs: list[SplicedRun] = []
    issues: list[ExtractionIssue] = []
    parts: list[str] = []
    run_start = run_end = 0
    i = 0
    line = 1
    n = len(code)

    def close_run() -> None:
        if parts:
            runs.append(SplicedRun("".join(parts), run_start, run_end))
            parts.clear()

    while i < n:
        c = code[i]
        if c == '"' or (c == "@" and code.startswith('"', i + 1)):
            start = i + 1 if c == "@" else i
            m = _STRING_RE.match(code, start)
            if m is None:
                issues.append(ExtractionIssue("", line, "unterminated string literal"))
                parts.clear()
                nl = code.find("\n", start)
                i = n if nl == -1 else nl
                continue
            if not parts:
                run_start = line
            token = m.group(0)
            parts.append(_decode_literal(token[1:-1]))
            line += token.count("\n")
            run_end = line
            i = m.end()
            continue
        if c == "'":
            close_run()
            m = _CHAR_RE.match(code, i)
            i = m.end() if m else i + 1
            continue
        if c == "/" and code.startswith("/", i + 1):
            nl = code.find("\n", i)
            i = n if nl == -1 else nl
            continue
        if c == "/" and code.startswith("*", i + 1):
            end = code.find("*/", i + 2)
            if end == -1:
                issues.append(ExtractionIssue("", line, "unterminated block comment"))
                line += code.count("\n", i)
                i = n
            else:
                line += code.count("\n", i, end + 2)
                i = end + 2
            continue
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        # Any other token breaks literal adjacency.
        close_run()
        i += 1
    close_run()
    return runs, issues


def _strip_comments(sql: str) -> tuple[str, list[tuple[int, str]]]:
    """Remove SQL comments, preserving line structure and quoted text."""
    out: list[str] = []
    issues: list[tuple[int, str]] = []
    i = 0
    line = 1
    n = len(sql)
    quote: str | None = None
    while i < n:
        c = sql[i]
        if quote is not None:
            if c == "\n":
                line += 1
            if c == quote and sql.startswith(quote, i + 1):
                # Doubled quote: escaped, stay inside the string.
                out.append(c)
                out.append(c)
                i += 2
                continue
            out.append(c)
            if c == quote:
                quote = None
            i += 1
            continue
        if c in ("'", '"', "`"):
            quote = c
            out.append(c)
            i += 1
            continue
        if c == "-" and sql.startswith("-", i + 1):
            while out and out[-1] in " \t":
                out.pop()
            nl = sql.find("\n", i)
            i = n if nl == -1 else nl
            continue
        if c == "/" and sql.startswith("*", i + 1):
            end = sql.find("*/", i + 2)
            if end == -1:
                issues.append((line, "unterminated block comment"))
                i = n
            else:
                nls = sql.count("\n", i, end + 2)
                out.append("\n" * nls)
                line += nls
                i = end + 2
            continue
        if c == "\n":
            line += 1
        out.append(c)
        i += 1
    return "".join(out), issues


def strip_sql_comments(sql: str) -> str:
    """Strip ``-- ...`` and ``/* ... */`` comments from SQL text.

    Quoted strings are never altered, line structure is preserved, and
    the operation is idempotent.
    """
    return _strip_comments(sql)[0]


def _split_statements(text: str) -> list[tuple[str, int, int]]:
    """Split on top-level semicolons, tracking the line span of each piece.

    Assumes comments were already stripped; only quoting matters here.
    Returns (statement text, first line, last line) for nonblank pieces.
    """
    pieces: list[tuple[str, int, int]] = []
    buf: list[str] = []
    line = 1
    first = last = 0
    quote: str | None = None

    def flush() -> None:
        nonlocal first, last
        stmt = "".join(buf).strip()
        if stmt:
            pieces.append((stmt, first, last))
        buf.clear()
        first = last = 0

    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if quote is not None:
            if c == "\n":
                line += 1
            buf.append(c)
            if c == quote:
                if text.startswith(quote, i + 1):
                    buf.append(c)
                    i += 2
                    continue
                quote = None
            i += 1
            continue
        if c in ("'", '"', "`"):
            quote = c
        elif c == ";":
            flush()
            i += 1
            continue
        buf.append(c)
        if c == "\n":
            line += 1
        elif not c.isspace():
            if first == 0:
                first = line
            last = line
        i += 1
    flush()
    return pieces


def _classify(stmt: str) -> StatementKind:
    if _CREATE_TABLE_RE.match(stmt):
        return StatementKind.CREATE_TABLE
    return StatementKind.OTHER


def extract_ddl(source: SourceFile) -> tuple[list[RawStatement], list[ExtractionIssue]]:
    """Pull SQL statements out of one source file.

    ``.sql`` content is comment-stripped and split on top-level
    semicolons; every statement is kept and classified.  C-family content
    goes through literal splicing first, and only pieces that start with
    CREATE TABLE survive; printf placeholders in those pieces are replaced
    by the ``__param__`` sentinel so the statement stays parseable.
    """
    if source.kind == FileKind.SQL:
        stripped, strip_issues = _strip_comments(source.content)
        statements = [
            RawStatement(text, source.path, start, end, _classify(text))
            for text, start, end in _split_statements(stripped)
        ]
        issues = [ExtractionIssue(source.path, ln, msg) for ln, msg in strip_issues]
        return statements, issues

    if source.kind != FileKind.C_LIKE:
        raise ValueError(f"cannot extract from file kind {source.kind!r}")

    runs, run_issues = splice_string_literals(source.content)
    issues = [ExtractionIssue(source.path, issue.line, issue.message) for issue in run_issues]
    statements = []
    for run in runs:
        stripped, strip_issues = _strip_comments(run.text)
        for ln, msg in strip_issues:
            # Lines inside a decoded literal do not map back to the file;
            # point at the start of the run instead.
            del ln
            issues.append(ExtractionIssue(source.path, run.line_start, msg))
        for text, _, _ in _split_statements(stripped):
            if not _CREATE_TABLE_RE.match(text):
                continue
            text = _PLACEHOLDER_RE.sub(PARAM_SENTINEL, text)
            statements.append(
                RawStatement(
                    text,
                    source.path,
                    run.line_start,
                    run.line_end,
                    StatementKind.CREATE_TABLE,
                )
            )
    return statements, issues
