"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x[j] >= 0 unless free[j]

Sized for the small LPs in this package (a few hundred columns). The
optimal dual is recovered from the final basis so the caller gets a
certified lower bound ``b @ y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
ITERATION_LIMIT = "iteration_limit"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    fun: float
    y_ub: np.ndarray | None = None  # multipliers for A_ub rows (<= 0 for a minimization)
    y_eq: np.ndarray | None = None
    dual_bound: float = -np.inf
    iterations: int = 0


class _Tableau:
    refactor_every = 50
    pivot_tol = 1e-7

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int], tol: float):
        m, n = a.shape
        self.a, self.b = a, b
        self.rows = np.arange(m)
        self.t = np.zeros((m + 1, n + 1))
        self.t[:m, :n] = a
        self.t[:m, n] = b
        self.basis = list(basis)
        self.tol = tol
        self.iterations = 0
        self.c = np.zeros(n)

    def drop_rows(self, keep: np.ndarray):
        idx = np.flatnonzero(keep)
        self.rows = self.rows[idx]
        self.t = np.vstack([self.t[idx], self.t[-1:]])
        self.basis = [self.basis[r] for r in idx]

    def _tiny_columns(self, allowed: np.ndarray) -> np.ndarray:
        body = self.t[:-1, :-1]
        return ~np.any(body > self.pivot_tol, axis=0) & np.any(body > self.tol, axis=0)

    def refactor(self):
        """Rebuild B^-1 [A | b] from the original data to shed pivot drift."""
        a, b = self.a[self.rows], self.b[self.rows]
        bmat = a[:, self.basis]
        self.t[:-1, :-1] = np.linalg.solve(bmat, a)
        self.t[:-1, -1] = np.linalg.solve(bmat, b)
        self.set_objective(self.c)

    @property
    def m(self):
        return self.t.shape[0] - 1

    def set_objective(self, c: np.ndarray):
        # reduced costs: c_j - c_B B^-1 A_j; the tableau rows already hold B^-1 A
        self.c = c
        row = np.zeros(self.t.shape[1])
        row[: len(c)] = c
        cb = c[self.basis]
        row -= cb @ self.t[:-1]
        self.t[-1] = row

    def pivot(self, r: int, k: int):
        t = self.t
        t[r] /= t[r, k]
        col = t[:, k].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        self.basis[r] = k
        self.iterations += 1
        if self.iterations % self.refactor_every == 0:
            self.refactor()

    def run(self, allowed: np.ndarray, max_iter: int, bland_after: int = 0) -> str:
        """Pivot until optimal.

        Pricing is Dantzig's (most negative reduced cost) until
        ``bland_after`` consecutive degenerate pivots occur, then Bland's
        smallest-index rule until the objective moves again. With
        ``bland_after=0`` the rule is pure Bland. Either way cycling is
        impossible: an infinite run would stay degenerate, hence in Bland
        mode, which terminates.
        """
        tol = self.tol
        degenerate = 0
        # columns whose only positive entries are below pivot_tol are set
        # aside until the next refactorization
        skipped = np.zeros_like(allowed)
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            t = self.t
            red = t[-1, :-1]
            cand = np.flatnonzero((red < -tol) & allowed & ~skipped)
            if cand.size == 0:
                if skipped.any():
                    self.refactor()
                    skipped[:] = False
                    t = self.t
                    red = t[-1, :-1]
                    if not np.any((red < -tol) & allowed & ~self._tiny_columns(allowed)):
                        return OPTIMAL
                    continue
                return OPTIMAL
            bland = degenerate >= bland_after
            k = int(cand[0]) if bland else int(cand[np.argmin(red[cand])])
            col = t[:-1, k]
            pos = np.flatnonzero(col > self.pivot_tol)
            if pos.size == 0:
                if np.any(col > tol):
                    skipped[k] = True
                    continue
                return UNBOUNDED
            ratios = np.maximum(t[pos, -1], 0.0) / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + tol * max(1.0, abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(col[ties])])
            degenerate = degenerate + 1 if best <= tol else 0
            self.pivot(r, k)


def _standard_form(c, a_ub, b_ub, a_eq, b_eq, free):
    nv = len(c)
    nf = int(np.sum(free))
    free_idx = np.flatnonzero(free)
    # columns: x (nv), negative parts of free vars (nf), slacks (m_ub)
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    ncols = nv + nf + m_ub
    a = np.zeros((m_ub + m_eq, ncols))
    a[:m_ub, :nv] = a_ub
    a[m_ub:, :nv] = a_eq
    a[:m_ub, nv:nv + nf] = -a_ub[:, free_idx]
    a[m_ub:, nv:nv + nf] = -a_eq[:, free_idx]
    a[:m_ub, nv + nf:] = np.eye(m_ub)
    b = np.concatenate([b_ub, b_eq]).astype(float)
    cc = np.concatenate([c, -c[free_idx], np.zeros(m_ub)])
    return a, b, cc, free_idx


def linprog_simplex(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    free=None,
    tol: float = 1e-9,
    max_iter: int | None = None,
    bland_after: int | None = None,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    nv = c.size
    a_ub = np.zeros((0, nv)) if a_ub is None else np.asarray(a_ub, dtype=float).reshape(-1, nv)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq = np.zeros((0, nv)) if a_eq is None else np.asarray(a_eq, dtype=float).reshape(-1, nv)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    free = np.zeros(nv, dtype=bool) if free is None else np.asarray(free, dtype=bool)

    a, b, cc, free_idx = _standard_form(c, a_ub, b_ub, a_eq, b_eq, free)
    m, n = a.shape
    m_ub = a_ub.shape[0]
    if max_iter is None:
        max_iter = 50 * n
    if bland_after is None:
        bland_after = max(100, m)
    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1

    # slack columns can start in the basis for unflipped <= rows
    basis, art_rows = [], []
    for i in range(m):
        if i < m_ub and not flip[i]:
            basis.append(nv + len(free_idx) + i)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    a_full = np.hstack([a, np.zeros((m, n_art))])
    for k, i in enumerate(art_rows):
        a_full[i, n + k] = 1.0
        basis[i] = n + k
    tab = _Tableau(a_full, b, basis, tol)

    if n_art:
        c1 = np.zeros(n + n_art)
        c1[n:] = 1.0
        tab.set_objective(c1)
        status = tab.run(np.ones(n + n_art, dtype=bool), max_iter, bland_after)
        if status == ITERATION_LIMIT:
            return LPResult(ITERATION_LIMIT, None, np.inf, iterations=tab.iterations)
        tab.refactor()
        if -tab.t[-1, -1] > tol * max(1.0, float(np.max(np.abs(b), initial=0.0))) * 10:
            return LPResult(INFEASIBLE, None, np.inf, iterations=tab.iterations)
        # drive artificials out of the basis; drop rows that are redundant
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if tab.basis[r] >= n:
                row = tab.t[r, :n]
                nz = np.flatnonzero(np.abs(row) > tol)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                else:
                    keep[r] = False
        if not keep.all():
            tab.drop_rows(keep)
    else:
        keep = np.ones(m, dtype=bool)

    c2 = np.concatenate([cc, np.zeros(n_art)])
    tab.set_objective(c2)
    allowed = np.zeros(n + n_art, dtype=bool)
    allowed[:n] = True
    status = tab.run(allowed, max_iter, bland_after)
    tab.refactor()

    xs = np.zeros(n + n_art)
    xs[tab.basis] = tab.t[:-1, -1]
    x = xs[:nv].copy()
    x[free_idx] -= xs[nv:nv + len(free_idx)]
    fun = float(c @ x)
    if status != OPTIMAL:
        return LPResult(status, x, fun, iterations=tab.iterations)

    # dual from the final basis: B^T y = c_B on the kept (sign-normalised) rows
    rows = np.flatnonzero(keep)
    bmat = a[np.ix_(rows, tab.basis)]
    y_kept = np.linalg.solve(bmat.T, cc[tab.basis])
    y = np.zeros(m)
    y[rows] = y_kept
    y[flip] *= -1
    y_ub, y_eq = y[:m_ub], y[m_ub:]
    # clip tiny infeasibilities so the bound is a valid certificate
    y_ub = np.minimum(y_ub, 0.0)
    dual_bound = float(b_ub @ y_ub + b_eq @ y_eq)
    return LPResult(OPTIMAL, x, fun, y_ub, y_eq, dual_bound, tab.iterations)
