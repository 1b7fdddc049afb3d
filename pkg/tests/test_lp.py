import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from maxproj.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog_simplex


@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(1, 8), st.integers(0, 3))
def test_matches_highs_on_random_bounded_lps(seed, nv, m_ub, m_eq):
    rng = np.random.default_rng(seed)
    x0 = rng.random(nv)  # feasible point
    a_ub = rng.standard_normal((m_ub, nv))
    b_ub = a_ub @ x0 + rng.random(m_ub)
    a_eq = rng.standard_normal((m_eq, nv))
    b_eq = a_eq @ x0
    # box rows keep it bounded
    a_ub = np.vstack([a_ub, np.eye(nv)])
    b_ub = np.concatenate([b_ub, np.full(nv, 5.0)])
    c = rng.standard_normal(nv)
    ours = linprog_simplex(c, a_ub, b_ub, a_eq if m_eq else None, b_eq if m_eq else None)
    ref = linprog(c, a_ub, b_ub, a_eq if m_eq else None, b_eq if m_eq else None, method="highs")
    assert ref.status == 0
    assert ours.status == OPTIMAL
    assert ours.fun == pytest.approx(ref.fun, abs=1e-7)
    assert ours.dual_bound == pytest.approx(ours.fun, abs=1e-7)
    assert np.all(a_ub @ ours.x <= b_ub + 1e-8)
    assert np.all(ours.x >= -1e-9)


def test_free_variables():
    # min |x - 3| via t >= x - 3, t >= 3 - x with x free
    res = linprog_simplex([0, 1], [[1, -1], [-1, -1]], [3, -3], free=[True, False])
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(3) and res.fun == pytest.approx(0)


def test_infeasible():
    res = linprog_simplex([1, 1], [[1, 1]], [-1])
    assert res.status == INFEASIBLE


def test_unbounded():
    res = linprog_simplex([-1, 0], [[0, 1]], [1])
    assert res.status == UNBOUNDED


def test_cycling_example_terminates():
    # Beale's example cycles under the textbook rule without anti-cycling
    c = [-0.75, 150, -0.02, 6]
    a = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    b = [0, 0, 1]
    res = linprog_simplex(c, a, b, bland_after=0)
    assert res.status == OPTIMAL
    assert res.fun == pytest.approx(-0.05)
    res = linprog_simplex(c, a, b)
    assert res.fun == pytest.approx(-0.05)


def test_redundant_equalities():
    res = linprog_simplex([1, 2], a_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
    assert res.status == OPTIMAL
    assert res.fun == pytest.approx(1)
