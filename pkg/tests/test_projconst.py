import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import random_orthogonal
from maxproj import projconst
from maxproj.projconst import SubspaceLinf

seeds = st.integers(0, 2**32 - 1)
HEXAGON = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def highs_lambda(b):
    c, a_ub, b_ub, free, _, _ = projconst.projection_lp(b)
    bounds = [(None, None) if f else (0, None) for f in free]
    return linprog(c, a_ub, b_ub, bounds=bounds, method="highs").fun


def brute_force_hexagon(step=0.01):
    """Grid over C in P = Q (Q + N C)^T, then a finer grid around the best point."""
    q, _ = np.linalg.qr(HEXAGON)
    nvec = np.array([1.0, 1.0, -1.0]) / np.sqrt(3)
    center, width = np.zeros(2), 2.0
    for _ in range(3):
        g = np.arange(-width, width + step / 2, step)
        c1, c2 = np.meshgrid(center[0] + g, center[1] + g, indexing="ij")
        cs = np.stack([c1.ravel(), c2.ravel()], axis=1)
        a = q[None] + nvec[None, :, None] * cs[:, None, :]  # (k, 3, 2)
        p = np.einsum("ia,kja->kij", q, a)
        norms = np.abs(p).sum(axis=2).max(axis=1)
        k = int(np.argmin(norms))
        center, width, step = cs[k], 5 * step, step / 10
    return float(norms[k])


def test_hexagon_constant():
    res = projconst.relative_projection_constant(SubspaceLinf(HEXAGON))
    assert res.lp_status == "optimal"
    assert res.value == pytest.approx(4 / 3, abs=1e-9)
    assert res.dual_bound == pytest.approx(4 / 3, abs=1e-8)
    assert brute_force_hexagon() == pytest.approx(4 / 3, abs=1e-4)
    p = res.optimal_p
    assert p.idempotency_residual() <= 1e-9
    np.testing.assert_allclose(p.p @ HEXAGON, HEXAGON, atol=1e-9)


@pytest.mark.parametrize("d,n,seed", [(3, 1, 0), (4, 2, 1), (5, 3, 2), (6, 2, 3), (8, 4, 4), (10, 3, 5)])
def test_lp_matches_highs(d, n, seed):
    b = np.random.default_rng(seed).standard_normal((d, n))
    res = projconst.relative_projection_constant(SubspaceLinf(b))
    assert res.value == pytest.approx(highs_lambda(b), abs=1e-8)
    assert res.value >= res.dual_bound - 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_n1_grid_oracle(seed):
    # n = 1: P = b a^T with a.b = 1 and ||P||_inf = max|b_i| * ||a||_1
    rng = np.random.default_rng(seed)
    for d in (2, 3):
        b = rng.standard_normal(d)
        k = int(np.argmax(np.abs(b)))
        others = [i for i in range(d) if i != k]
        g = np.linspace(-2, 2, 801)
        pts = np.array(list(itertools.product(g, repeat=d - 1)))
        a = np.zeros((len(pts), d))
        a[:, others] = pts
        a[:, k] = (1 - pts @ b[others]) / b[k]
        grid = float((np.abs(b).max() * np.abs(a).sum(axis=1)).min())
        lp = projconst.relative_projection_constant(SubspaceLinf(b[:, None])).value
        assert lp <= grid + 1e-9
        assert abs(lp - grid) < 1e-3


def test_lambda_one_cases():
    assert projconst.relative_projection_constant(SubspaceLinf(np.eye(4))).value == pytest.approx(1, abs=1e-8)
    v = np.array([[1.0], [-1.0], [1.0], [1.0]])
    assert projconst.relative_projection_constant(SubspaceLinf(v)).value == pytest.approx(1, abs=1e-8)


@given(seeds, st.integers(2, 6))
def test_lambda_at_least_one_and_invariant(seed, d):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, d + 1))
    b = rng.standard_normal((d, n))
    lam = projconst.relative_projection_constant(SubspaceLinf(b)).value
    assert lam >= 1 - 1e-10
    perm = rng.permutation(d)
    signs = rng.choice([-1.0, 1.0], d)
    moved = signs[:, None] * b[perm]
    rebased = b @ (rng.standard_normal((n, n)) + 3 * np.eye(n))
    assert projconst.relative_projection_constant(SubspaceLinf(moved)).value == pytest.approx(lam, abs=1e-8)
    assert projconst.relative_projection_constant(SubspaceLinf(rebased)).value == pytest.approx(lam, abs=1e-8)


@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=5, max_size=5), min_size=5, max_size=5))
def test_adjoint_norm_identity_is_exact(rows):
    m = np.array(rows)
    assert projconst.op_norm_inf(m) == projconst.op_norm_one(m.T)


@given(seeds, st.integers(2, 10))
def test_double_annihilator(seed, d):
    rng = np.random.default_rng(seed)
    v = SubspaceLinf(rng.standard_normal((d, int(rng.integers(1, d)))))
    back = projconst.annihilator(projconst.annihilator(v))
    assert projconst.subspace_distance(back, v) <= 1e-10


def test_annihilator_of_everything_is_none():
    assert projconst.annihilator(SubspaceLinf(np.eye(3))) is None


def test_subspace_rank_checked():
    with pytest.raises(ValueError):
        SubspaceLinf(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_projection_onto_along():
    v = SubspaceLinf(np.array([[1.0], [0.0]]))
    u = SubspaceLinf(np.array([[1.0], [1.0]]))
    p = projconst.projection_onto_along(v, u).p
    np.testing.assert_allclose(p, [[1, -1], [0, 0]], atol=1e-12)


def test_oblique_pair_warns_then_fails():
    v = SubspaceLinf(np.array([[1.0], [1.0]]))
    with pytest.warns(projconst.ConditioningWarning):
        projconst.projection_onto_along(v, SubspaceLinf(np.array([[1.0], [1 - 1e-9]])))
    with pytest.raises(projconst.NotDirectSumError):
        projconst.projection_onto_along(v, SubspaceLinf(np.array([[1.0], [1 - 1e-12]])))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        projconst.projection_onto_along(v, SubspaceLinf(np.array([[1.0], [-1 + 1e-12]])))


@given(seeds, st.integers(2, 8))
def test_lemma1_random_pairs(seed, d):
    rng = np.random.default_rng(seed)
    m = random_orthogonal(rng, d) + 0.3 * rng.standard_normal((d, d))
    k = int(rng.integers(1, d))
    rep = projconst.lemma1_check(SubspaceLinf(m[:, :k]), SubspaceLinf(m[:, k:]))
    assert rep.passed, rep


def test_theorem2_finite():
    rep = projconst.theorem2_finite_check(SubspaceLinf(HEXAGON))
    assert rep.passed
    assert rep.lambda_f == pytest.approx(4 / 3, abs=1e-9)
