"""Matrix text files and regression CSVs.

Matrix text: one row per line, entries separated by whitespace, each in
rational text form.  Blank lines and lines starting with ``#`` are skipped.

CSV: a header line, then one data point per row; every column but the last
is a feature and the last is the target.
"""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import ParseError, ShapeMismatch
from .rational import format_decimal, format_rational, parse_rational

Matrix = list[list[Fraction]]


def parse_matrix(text: str) -> Matrix:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([parse_rational(tok) for tok in line.split()])
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ParseError("empty matrix")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ShapeMismatch("rows have different lengths")
    return rows


def read_matrix(path: str | Path) -> Matrix:
    return parse_matrix(Path(path).read_text())


def format_matrix(m: Iterable[Iterable[Fraction]], decimal: int | None = None) -> str:
    fmt = format_rational if decimal is None else (lambda v: format_decimal(v, decimal))
    return "\n".join(" ".join(fmt(v) for v in row) for row in m)


def parse_csv(text: str) -> tuple[list[str], Matrix, list[Fraction]]:
    """Return (header, points, targets)."""
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ParseError("CSV needs a header line and at least one data row")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if len(header) < 2:
        raise ParseError("CSV needs at least one feature column and a target column")
    points, targets = [], []
    for lineno, row in enumerate(body, 2):
        if len(row) != len(header):
            raise ShapeMismatch(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            vals = [parse_rational(c) for c in row]
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        points.append(vals[:-1])
        targets.append(vals[-1])
    return header, points, targets


def read_csv(path: str | Path) -> tuple[list[str], Matrix, list[Fraction]]:
    return parse_csv(Path(path).read_text())
