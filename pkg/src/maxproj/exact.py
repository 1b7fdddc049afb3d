"""Small exact linear algebra over ``fractions.Fraction``.

Matrices are lists of rows. Everything here is exact; nothing is converted
to floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Row = list[Fraction]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # floats are accepted only when they are exact binary rationals the
        # caller meant literally (e.g. 0.5); no rounding happens here
        return Fraction(x)
    return Fraction(x)


def frac_matrix(rows: Sequence[Sequence]) -> list[Row]:
    return [[to_fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    a = frac_matrix(rows)
    if not a:
        return [], []
    nrows, ncols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[Row]:
    """Basis of {x : A x = 0}, one basis vector per free column.

    ``ncols`` must be given when ``rows`` is empty.
    """
    if not rows:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> tuple[Row | None, Row | None]:
    """Solve ``A x = b`` exactly.

    Returns ``(x, None)`` with one particular solution, or ``(None, y)`` where
    ``y`` is a Fredholm certificate of inconsistency: ``y^T A = 0`` and
    ``y^T b = 1``.
    """
    a = frac_matrix(rows)
    b = [to_fraction(v) for v in rhs]
    m = len(a)
    n = len(a[0]) if a else 0
    # augment with the identity to track the row operations
    aug = [a[i] + [b[i]] + [Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    red, pivots = rref(aug)
    if n in pivots:
        k = pivots.index(n)
        y = red[k][n + 1:]
        # row k reads 0 ... 0 | 1 | y, i.e. y^T A = 0 and y^T b = 1
        return None, y
    x = [Fraction(0)] * n
    for row, p in zip(red, pivots):
        if p < n:
            x[p] = row[n]
    return x, None


def matvec(rows: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> Row:
    return [sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in rows]


def same_span(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    """True when the row spaces of ``a`` and ``b`` coincide."""
    ra, rb = rank(a) if a else 0, rank(b) if b else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(list(a) + list(b)) == ra
