from fractions import Fraction

import sympy
from hypothesis import given
from hypothesis import strategies as st

from maxproj import exact

small_int = st.integers(min_value=-4, max_value=4)


def int_matrix(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_rref_known():
    red, piv = exact.rref([[2, 4], [1, 3]])
    assert red == [[1, 0], [0, 1]]
    assert piv == [0, 1]


def test_to_fraction_from_string_and_float():
    assert exact.to_fraction("3/6") == Fraction(1, 2)
    assert exact.to_fraction(0.5) == Fraction(1, 2)


@given(int_matrix())
def test_rank_matches_sympy(rows):
    assert exact.rank(rows) == sympy.Matrix(rows).rank()


@given(int_matrix())
def test_nullspace_matches_sympy(rows):
    ns = exact.nullspace(rows)
    oracle = sympy.Matrix(rows).nullspace()
    assert len(ns) == len(oracle)
    for v in ns:
        assert all(x == 0 for x in exact.matvec(exact.frac_matrix(rows), v))
    if ns:
        assert exact.same_span(ns, [[Fraction(int(x.p), int(x.q)) for x in v] for v in oracle])


@given(int_matrix(), st.lists(small_int, min_size=5, max_size=5))
def test_solve_returns_solution_or_fredholm_certificate(rows, rhs):
    rhs = rhs[: len(rows)]
    a = exact.frac_matrix(rows)
    x, y = exact.solve(rows, rhs)
    if x is not None:
        assert exact.matvec(a, x) == [Fraction(b) for b in rhs]
        assert y is None
    else:
        # y^T A = 0 and y^T b = 1
        for j in range(len(rows[0])):
            assert sum(y[i] * a[i][j] for i in range(len(rows))) == 0
        assert sum(yi * b for yi, b in zip(y, rhs)) == 1


def test_same_span_detects_difference():
    assert exact.same_span([[1, 1, 0]], [[2, 2, 0]])
    assert not exact.same_span([[1, 1, 0]], [[1, 0, 0]])
