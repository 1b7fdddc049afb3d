"""Projections in l_inf^d and relative projection constants.

The ambient space is R^d with the max norm; its dual is R^d with the sum
norm, paired by the dot product. A functional ``l`` composed with an
operator ``M`` is ``M.T @ l``, so the adjoint of ``M`` is ``M.T`` and its
norm is taken in l_1^d.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .lp import ITERATION_LIMIT, OPTIMAL, linprog_simplex

RANK_TOL = 1e-10
DIRECT_SUM_TOL = 1e-10
COND_WARN_TOL = 1e-8
CHECK_TOL = 1e-9


class NotDirectSumError(ValueError):
    def __init__(self, sigma_min: float):
        self.sigma_min = sigma_min
        super().__init__(f"subspaces are not complementary (smallest singular value {sigma_min:.3e})")


class ConditioningWarning(UserWarning):
    pass


def op_norm_inf(m) -> float:
    """Operator norm on l_inf^d: largest absolute row sum."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return max(math.fsum(abs(x) for x in row) for row in m)


def op_norm_one(m) -> float:
    """Operator norm on l_1^d: largest absolute column sum."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return max(math.fsum(abs(x) for x in m[:, j]) for j in range(m.shape[1]))


@dataclass(frozen=True)
class SubspaceLinf:
    """Subspace of R^d spanned by the columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.ndim != 2 or b.shape[1] < 1 or b.shape[1] > b.shape[0]:
            raise ValueError(f"basis must be d x n with 1 <= n <= d, got shape {b.shape}")
        sv = np.linalg.svd(b, compute_uv=False)
        if sv[-1] <= RANK_TOL * max(1.0, sv[0]):
            raise ValueError(f"basis is rank deficient (smallest singular value {sv[-1]:.3e})")
        object.__setattr__(self, "basis", b)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    def contains(self, vecs, tol: float = 1e-10) -> float:
        """Largest distance residual of the columns of ``vecs`` from this span."""
        vecs = np.asarray(vecs, dtype=float).reshape(self.d, -1)
        coef, *_ = np.linalg.lstsq(self.basis, vecs, rcond=None)
        return float(np.max(np.abs(self.basis @ coef - vecs), initial=0.0))


def subspace_distance(v: SubspaceLinf, u: SubspaceLinf) -> float:
    """Mutual containment residual; zero iff the spans coincide."""
    if v.n != u.n:
        return math.inf
    return max(v.contains(u.basis), u.contains(v.basis))


def annihilator(v: SubspaceLinf) -> SubspaceLinf | None:
    """Functionals vanishing on ``v``; ``None`` when ``v`` is the whole space."""
    if v.n == v.d:
        return None
    return SubspaceLinf(null_space(v.basis.T, rcond=RANK_TOL))


@dataclass(frozen=True)
class ProjectionMatrix:
    p: np.ndarray
    range_basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.range_basis.shape[1]

    def idempotency_residual(self) -> float:
        return float(np.max(np.abs(self.p @ self.p - self.p)))


def projection_onto_along(v: SubspaceLinf, u: SubspaceLinf) -> ProjectionMatrix:
    """The projection with range ``v`` and kernel ``u``."""
    if v.d != u.d or v.n + u.n != v.d:
        raise ValueError(f"dimensions do not add up: {v.n} + {u.n} != {v.d}")
    m = np.hstack([v.basis, u.basis])
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] < DIRECT_SUM_TOL:
        raise NotDirectSumError(float(sv[-1]))
    if sv[-1] < COND_WARN_TOL:
        warnings.warn(
            f"nearly degenerate direct sum (smallest singular value {sv[-1]:.3e})",
            ConditioningWarning,
            stacklevel=2,
        )
    # P [B_V | B_U] = [B_V | 0]
    target = np.hstack([v.basis, np.zeros_like(u.basis)])
    p = np.linalg.solve(m.T, target.T).T
    return ProjectionMatrix(p, v.basis)


@dataclass
class Lemma1Report:
    dims_ok: bool
    direct_sum_rank: int
    dual_direct_sum_ok: bool
    double_annihilator_residual: float
    adjoint_residual: float
    norm_primal: float
    norm_adjoint: float
    sigma_min: float
    tol: float = CHECK_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def norms_equal(self) -> bool:
        return self.norm_primal == self.norm_adjoint

    @property
    def passed(self) -> bool:
        return (
            self.dims_ok
            and self.dual_direct_sum_ok
            and self.double_annihilator_residual <= self.tol
            and self.adjoint_residual <= self.tol
            and self.norms_equal
        )


def _annihilator_basis(v: SubspaceLinf) -> np.ndarray:
    ann = annihilator(v)
    return np.zeros((v.d, 0)) if ann is None else ann.basis


def lemma1_check(v: SubspaceLinf, u: SubspaceLinf, tol: float = CHECK_TOL) -> Lemma1Report:
    """Check the annihilator duality for a complementary pair ``(v, u)``.

    * ``dim U^0 = dim V`` and ``dim V^0 = dim U``;
    * the dual splits as ``V^0 (+) U^0``;
    * ``(V^0)_0 = V`` and ``(U^0)_0 = U``;
    * the adjoint ``P.T`` of ``P = P_V^U`` is the projection onto ``U^0``
      along ``V^0``, and ``||P||_inf == ||P.T||_1``.
    """
    notes = []
    m = np.hstack([v.basis, u.basis])
    sigma_min = float(np.linalg.svd(m, compute_uv=False)[-1])
    if sigma_min < COND_WARN_TOL:
        notes.append(f"ill-conditioned direct sum (smallest singular value {sigma_min:.3e})")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        proj = projection_onto_along(v, u)
    v0, u0 = _annihilator_basis(v), _annihilator_basis(u)
    dims_ok = u0.shape[1] == v.n and v0.shape[1] == u.n
    joint = np.hstack([v0, u0])
    direct_rank = int(np.linalg.matrix_rank(joint, tol=RANK_TOL)) if joint.size else 0
    dual_ok = direct_rank == v.d and joint.shape[1] == v.d

    resid = 0.0
    for sub, ann in ((v, v0), (u, u0)):
        if ann.shape[1] == 0:
            back_dim = sub.d  # annihilator of {0} is everything
            resid = max(resid, 0.0 if back_dim == sub.n else math.inf)
            continue
        back = SubspaceLinf(null_space(ann.T, rcond=RANK_TOL)) if ann.shape[1] < sub.d else None
        if back is None:
            resid = math.inf
        else:
            resid = max(resid, subspace_distance(back, sub))

    pt = proj.p.T
    adj = 0.0
    if u0.shape[1]:
        adj = max(adj, float(np.max(np.abs(pt @ u0 - u0))))
    if v0.shape[1]:
        adj = max(adj, float(np.max(np.abs(pt @ v0))))
    return Lemma1Report(
        dims_ok=dims_ok,
        direct_sum_rank=direct_rank,
        dual_direct_sum_ok=dual_ok,
        double_annihilator_residual=resid,
        adjoint_residual=adj,
        norm_primal=op_norm_inf(proj.p),
        norm_adjoint=op_norm_one(pt),
        sigma_min=sigma_min,
        tol=tol,
        notes=notes,
    )


@dataclass
class LambdaResult:
    value: float
    optimal_p: ProjectionMatrix
    lp_status: str
    dual_bound: float
    iterations: int = 0


def projection_lp(b: np.ndarray):
    """LP data for the least-norm projection onto the span of ``b``.

    With ``Q`` an orthonormal basis of the span and ``N`` one of its
    orthogonal complement, the projections onto the span are exactly
    ``P = Q (Q + N C)^T`` for arbitrary ``C`` of shape ``(d - n, n)``: these
    are the ``B A^T`` with ``A^T B = I`` written without equality rows.

    Variables: C (free, row-major), T (d*d, >= 0), t (>= 0). Rows:
    ``+-P[i, j] - T[i, j] <= 0`` and ``sum_j T[i, j] - t <= 0``.
    Returns ``(c, a_ub, b_ub, free, q, nmat)``.
    """
    d, n = b.shape
    q, _ = np.linalg.qr(b)
    k = d - n
    nmat = null_space(q.T) if k else np.zeros((d, 0))
    p0 = q @ q.T
    nc, nt = k * n, d * d
    nv = nc + nt + 1
    c = np.zeros(nv)
    c[-1] = 1.0
    # dP[i, j] / dC[r, a] = Q[i, a] * N[j, r]
    dp = np.einsum("ia,jr->ijra", q, nmat).reshape(d * d, nc)
    a_ub = np.zeros((2 * nt + d, nv))
    b_ub = np.zeros(2 * nt + d)
    eye_t = np.eye(nt)
    a_ub[:nt, :nc] = dp
    a_ub[:nt, nc:nc + nt] = -eye_t
    b_ub[:nt] = -p0.ravel()
    a_ub[nt:2 * nt, :nc] = -dp
    a_ub[nt:2 * nt, nc:nc + nt] = -eye_t
    b_ub[nt:2 * nt] = p0.ravel()
    for i in range(d):
        a_ub[2 * nt + i, nc + i * d:nc + (i + 1) * d] = 1.0
        a_ub[2 * nt + i, -1] = -1.0
    free = np.zeros(nv, dtype=bool)
    free[:nc] = True
    return c, a_ub, b_ub, free, q, nmat


def relative_projection_constant(v: SubspaceLinf, max_iter: int | None = None) -> LambdaResult:
    """lambda(V, l_inf^d): the least norm of a projection of l_inf^d onto V.

    Minimizing the largest absolute row sum over all projections onto V is
    a linear program, solved with the embedded simplex.
    """
    d, n = v.basis.shape
    c, a_ub, b_ub, free, q, nmat = projection_lp(v.basis)
    res = linprog_simplex(c, a_ub, b_ub, free=free, max_iter=max_iter)
    if res.status not in (OPTIMAL, ITERATION_LIMIT) or res.x is None:
        raise RuntimeError(f"projection LP failed: {res.status}")
    cmat = res.x[: (d - n) * n].reshape(d - n, n)
    p = q @ (q + nmat @ cmat).T
    value = op_norm_inf(p)
    return LambdaResult(value, ProjectionMatrix(p, v.basis), res.status, res.dual_bound, res.iterations)


@dataclass
class Theorem2Report:
    dim_f: int
    dim_v: int
    containment_residual: float
    lambda_f: float
    lambda_v: float
    tol: float = 1e-10
    lambda_tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return (
            self.dim_f == self.dim_v
            and self.containment_residual <= self.tol
            and abs(self.lambda_f - self.lambda_v) <= self.lambda_tol
        )


def theorem2_finite_check(f: SubspaceLinf) -> Theorem2Report:
    """In l_inf^d every subspace is weak-star closed and the bidual is the
    space itself, so the pre-pre-annihilator of ``F`` must be ``F`` again
    with the same projection constant."""
    f0 = annihilator(f)
    if f0 is None:
        v = SubspaceLinf(np.eye(f.d))
    else:
        v = SubspaceLinf(null_space(f0.basis.T, rcond=RANK_TOL))
    resid = subspace_distance(v, f)
    lam_f = relative_projection_constant(f).value
    lam_v = relative_projection_constant(v).value
    return Theorem2Report(f.n, v.n, resid, lam_f, lam_v)
