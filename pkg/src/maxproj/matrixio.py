"""Plain-text matrix format shared by every command.

The first line is ``rows cols``; each following non-blank line holds one
row of whitespace-separated entries. Entries are decimals (``0.25``,
``-1e-3``) or exact rationals (``2/3``). Lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np


class MatrixParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


def _parse_entry(token: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise MatrixParseError(f"cannot parse entry {token!r}", line, col) from None


def _tokens(text: str):
    col = 0
    for tok in text.split():
        col = text.index(tok, col) + 1
        yield tok, col
        col += len(tok) - 1


def parse_matrix(text: str) -> list[list[Fraction]]:
    rows: list[list[Fraction]] = []
    shape = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = list(_tokens(raw))
        if shape is None:
            if len(toks) != 2:
                raise MatrixParseError("header must be 'rows cols'", lineno, 1)
            try:
                shape = (int(toks[0][0]), int(toks[1][0]))
            except ValueError:
                raise MatrixParseError("header must hold two integers", lineno, 1) from None
            if shape[0] < 1 or shape[1] < 1:
                raise MatrixParseError("matrix dimensions must be positive", lineno, 1)
            continue
        if len(rows) == shape[0]:
            raise MatrixParseError(f"more than {shape[0]} rows", lineno, 1)
        if len(toks) != shape[1]:
            raise MatrixParseError(
                f"expected {shape[1]} entries, found {len(toks)}", lineno, toks[min(len(toks), shape[1]) - 1][1] if toks else 1
            )
        rows.append([_parse_entry(tok, lineno, col) for tok, col in toks])
    if shape is None:
        raise MatrixParseError("empty matrix file", 1, 1)
    if len(rows) != shape[0]:
        raise MatrixParseError(f"expected {shape[0]} rows, found {len(rows)}", lineno + 1, 1)
    return rows


def read_matrix(path, exact: bool = False):
    """Read a matrix file; returns a float array, or Fractions if ``exact``."""
    rows = parse_matrix(Path(path).read_text())
    if exact:
        return rows
    return np.array([[float(x) for x in row] for row in rows])


def format_matrix(a) -> str:
    a = np.asarray(a, dtype=object)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(str(x) if isinstance(x, Fraction) else repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"
