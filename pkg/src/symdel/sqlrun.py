"""Builtin single-table SQL subset plus the external-adapter contract.

The builtin engine answers WikiSQL-shaped queries: SELECT with projection
or a single aggregate (COUNT/SUM/MIN/MAX/AVG), WHERE with comparisons
joined by AND/OR (AND binds tighter; parentheses allowed), ORDER BY, and
LIMIT.  Anything else raises UnsupportedSqlError naming the construct so
callers can route the query to an external adapter.

Tables are delimited text (CSV) with a typed header row, e.g.
``name:text,age:int,score:real``; an untyped header cell defaults to text.
Empty cells are NULL.

External adapter contract: the command (with an optional ``{db}``
placeholder) receives the query on stdin and prints result rows as
tab-separated lines on stdout; a nonzero exit is an execution error.
"""

from __future__ import annotations

import csv
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import DataError, ExecutorError
from .executors import ComparatorConfig, numbers_close

Cell = object  # str | int | float | None


class UnsupportedSqlError(DataError):
    pass


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[tuple[str, str], ...]  # (name, type)
    rows: tuple[tuple[Cell, ...], ...]

    def column_index(self, name: str) -> int:
        for index, (column, _) in enumerate(self.columns):
            if column.lower() == name.lower():
                return index
        raise DataError(f"table {self.name!r} has no column {name!r}")


_TYPES = ("text", "int", "real")


def _convert(raw: str, kind: str) -> Cell:
    if raw == "":
        return None
    if kind == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise DataError(f"cell {raw!r} is not an int") from exc
    if kind == "real":
        try:
            return float(raw)
        except ValueError as exc:
            raise DataError(f"cell {raw!r} is not a real") from exc
    return raw


def load_table(path: str | Path, name: str | None = None) -> Table:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise DataError(f"table file {path} is empty") from exc
        columns = []
        for cell in header:
            column, _, kind = cell.partition(":")
            kind = kind or "text"
            if kind not in _TYPES:
                raise DataError(f"unknown column type {kind!r} in header cell {cell!r}")
            columns.append((column, kind))
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise DataError(f"{path}:{lineno}: expected {len(columns)} cells, got {len(row)}")
            rows.append(tuple(_convert(raw, kind) for raw, (_, kind) in zip(row, columns)))
    return Table(name=name or path.stem, columns=tuple(columns), rows=tuple(rows))


_SQL_TOKEN = re.compile(
    r"\s*(<=|>=|<>|!=|=|<|>|\(|\)|,|\*|'(?:[^']|'')*'|\"[^\"]*\"|`[^`]*`|[^\s(),<>=!*]+)"
)
_UNSUPPORTED_KEYWORDS = (
    "join", "group", "having", "distinct", "union", "intersect", "except",
    "between", "like", "in", "exists", "case", "offset",
)
_AGGREGATES = ("count", "sum", "min", "max", "avg")


def _tokenize_sql(query: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(query):
        match = _SQL_TOKEN.match(query, pos)
        if match is None:
            rest = query[pos:].strip()
            if not rest:
                break
            raise DataError(f"cannot tokenize SQL near {rest[:20]!r}")
        tokens.append(match.group(1))
        pos = match.end()
    return tokens


class _SqlParser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def peek_kw(self) -> str | None:
        token = self.peek()
        return token.lower() if token is not None else None

    def take(self, expected_kw: str | None = None) -> str:
        token = self.peek()
        if token is None:
            raise DataError("unexpected end of SQL query")
        if expected_kw is not None and token.lower() != expected_kw:
            raise DataError(f"expected {expected_kw.upper()!r}, found {token!r}")
        self.pos += 1
        return token


def _is_quoted(token: str) -> bool:
    return token[0] in "'\"`" if token else False


def _unquote(token: str) -> str:
    if token.startswith("'"):
        return token[1:-1].replace("''", "'")
    if token[0] in "\"`":
        return token[1:-1]
    return token


def _literal_value(token: str) -> Cell | None:
    if token.startswith("'"):
        return _unquote(token)
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return None


def run_sql(
    query: str,
    table: Table,
    engine: str = "builtin_subset",
    adapter: Sequence[str] | None = None,
    db_path: str | None = None,
) -> list[tuple[Cell, ...]]:
    """Execute one query and return the result rows."""
    if engine == "builtin_subset":
        return _run_builtin(query, table)
    if engine == "external_adapter":
        if adapter is None:
            raise ExecutorError("external_adapter engine needs an adapter command")
        return run_adapter(query, adapter, db_path)
    raise DataError(f"unknown SQL engine {engine!r}")


def _run_builtin(query: str, table: Table) -> list[tuple[Cell, ...]]:
    tokens = _tokenize_sql(query.strip().rstrip(";"))
    lowered = [t.lower() for t in tokens if not _is_quoted(t)]
    for keyword in _UNSUPPORTED_KEYWORDS:
        if keyword in lowered:
            raise UnsupportedSqlError(f"unsupported SQL construct: {keyword.upper()}")
    parser = _SqlParser(tokens)
    parser.take("select")

    aggregate: tuple[str, str | None] | None = None
    select_columns: list[str] = []
    if parser.peek_kw() in _AGGREGATES:
        func = parser.take().lower()
        parser.take("(")
        arg = parser.take()
        if arg == "*":
            if func != "count":
                raise DataError(f"{func.upper()}(*) is not valid SQL")
            aggregate = (func, None)
        else:
            aggregate = (func, _unquote(arg))
        parser.take(")")
    else:
        if parser.peek() == "*":
            parser.take()
            select_columns = [c for c, _ in table.columns]
        else:
            select_columns.append(_unquote(parser.take()))
            while parser.peek() == ",":
                parser.take()
                if parser.peek_kw() in _AGGREGATES:
                    raise UnsupportedSqlError(
                        "unsupported SQL construct: mixed aggregate and column select"
                    )
                select_columns.append(_unquote(parser.take()))

    parser.take("from")
    from_name = _unquote(parser.take())
    if from_name.lower() != table.name.lower():
        raise DataError(f"query references table {from_name!r}, loaded table is {table.name!r}")

    predicate = None
    if parser.peek_kw() == "where":
        parser.take()
        predicate = _parse_or(parser, table)

    order: list[tuple[int, bool]] = []
    if parser.peek_kw() == "order":
        parser.take()
        parser.take("by")
        while True:
            column = table.column_index(_unquote(parser.take()))
            descending = False
            if parser.peek_kw() in ("asc", "desc"):
                descending = parser.take().lower() == "desc"
            order.append((column, descending))
            if parser.peek() == ",":
                parser.take()
                continue
            break

    limit: int | None = None
    if parser.peek_kw() == "limit":
        parser.take()
        try:
            limit = int(parser.take())
        except ValueError as exc:
            raise DataError("LIMIT requires an integer") from exc

    if parser.peek() is not None:
        raise UnsupportedSqlError(f"unsupported SQL construct: {parser.peek()!r}")

    rows = [row for row in table.rows if predicate is None or predicate(row)]
    for column, descending in reversed(order):
        rows.sort(key=lambda row: _sort_key(row[column]), reverse=descending)
    if aggregate is not None:
        func, column = aggregate
        return [(_aggregate(func, column, rows, table),)]
    indices = [table.column_index(c) for c in select_columns]
    projected = [tuple(row[i] for i in indices) for row in rows]
    if limit is not None:
        projected = projected[:limit]
    return projected


def _sort_key(cell: Cell):
    # None sorts first; numbers before strings.
    if cell is None:
        return (0, 0)
    if isinstance(cell, (int, float)):
        return (1, cell)
    return (2, cell)


def _aggregate(func: str, column: str | None, rows: list, table: Table) -> Cell:
    if func == "count" and column is None:
        return len(rows)
    assert column is not None
    index = table.column_index(column)
    values = [row[index] for row in rows if row[index] is not None]
    if func == "count":
        return len(values)
    if not values:
        return None
    if func == "sum":
        return sum(values)
    if func == "min":
        return min(values)
    if func == "max":
        return max(values)
    if func == "avg":
        return sum(values) / len(values)
    raise DataError(f"unknown aggregate {func!r}")


def _parse_or(parser: _SqlParser, table: Table):
    left = _parse_and(parser, table)
    while parser.peek_kw() == "or":
        parser.take()
        right = _parse_and(parser, table)
        left = (lambda a, b: (lambda row: a(row) or b(row)))(left, right)
    return left


def _parse_and(parser: _SqlParser, table: Table):
    left = _parse_comparison(parser, table)
    while parser.peek_kw() == "and":
        parser.take()
        right = _parse_comparison(parser, table)
        left = (lambda a, b: (lambda row: a(row) and b(row)))(left, right)
    return left


def _parse_comparison(parser: _SqlParser, table: Table):
    if parser.peek() == "(":
        parser.take()
        inner = _parse_or(parser, table)
        parser.take(")")
        return inner
    left = _operand(parser, table)
    op = parser.take()
    if op.lower() == "is":
        negated = parser.peek_kw() == "not"
        if negated:
            parser.take()
        parser.take("null")
        return (lambda get, neg: (lambda row: (get(row) is not None) if neg else (get(row) is None)))(
            left, negated
        )
    if op not in ("=", "!=", "<>", "<", "<=", ">", ">="):
        raise DataError(f"unknown comparison operator {op!r}")
    right = _operand(parser, table)
    return _comparator(left, op, right)


def _operand(parser: _SqlParser, table: Table):
    token = parser.take()
    value = _literal_value(token)
    if value is not None and not _is_quoted(token):
        return lambda row: value
    if token.startswith("'"):
        text = _unquote(token)
        return lambda row: text
    index = table.column_index(_unquote(token))
    return lambda row: row[index]


def _comparator(left, op: str, right):
    def compare(row) -> bool:
        a = left(row)
        b = right(row)
        if a is None or b is None:
            return False
        numeric = isinstance(a, (int, float)) and isinstance(b, (int, float))
        if not numeric:
            a, b = str(a), str(b)
        if op == "=":
            return a == b
        if op in ("!=", "<>"):
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b

    return compare


def run_adapter(
    query: str, adapter: Sequence[str], db_path: str | None = None
) -> list[tuple[Cell, ...]]:
    """Run the external SQL adapter; TSV rows on stdout, nonzero exit fails."""
    command = [part.replace("{db}", db_path or "") for part in adapter]
    try:
        proc = subprocess.run(
            command, input=query, capture_output=True, text=True, timeout=60
        )
    except FileNotFoundError as exc:
        raise ExecutorError(f"SQL adapter not found: {command[0]!r}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ExecutorError("SQL adapter timed out") from exc
    if proc.returncode != 0:
        raise ExecutorError(
            f"SQL adapter failed with exit {proc.returncode}: {proc.stderr.strip()[:200]}"
        )
    rows = []
    for line in proc.stdout.splitlines():
        if not line.strip():
            continue
        cells: list[Cell] = []
        for cell in line.split("\t"):
            value = _literal_value(cell)
            cells.append(cell if value is None or isinstance(value, str) else value)
        rows.append(tuple(cells))
    return rows


def compare_denotations(
    result: Sequence[tuple[Cell, ...]],
    gold: Sequence[tuple[Cell, ...]],
    config: ComparatorConfig = ComparatorConfig(),
) -> bool:
    """Set-based row comparison with numeric tolerance on cells."""

    def canonical(rows: Sequence[tuple[Cell, ...]]) -> list[tuple[Cell, ...]]:
        unique = set(rows)
        return sorted(unique, key=lambda row: tuple(str(cell) for cell in row))

    def cell_equal(a: Cell, b: Cell) -> bool:
        if isinstance(a, (int, float)) and isinstance(b, (int, float)):
            return numbers_close(float(a), float(b), config)
        return a == b

    left = canonical(result)
    right = canonical(gold)
    if len(left) != len(right):
        return False
    remaining = list(right)
    for row in left:
        for index, other in enumerate(remaining):
            if len(row) == len(other) and all(cell_equal(a, b) for a, b in zip(row, other)):
                del remaining[index]
                break
        else:
            return False
    return True
