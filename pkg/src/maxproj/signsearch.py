"""Sign matrices, signed permutations and Ky Fan maximization over the simplex.

A sign matrix is a symmetric +-1 matrix with unit diagonal. Signed
permutations ``Q`` act by ``S -> Q S Q^T``; the orbits are the switching
classes of the graph encoded by the -1 entries.

The objective studied here is ``f(D) = pi_n(sqrt(D) S sqrt(D))`` for ``D`` in
the simplex of diagonal matrices with unit trace (optionally with all
entries at least ``eps``).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import qmc

from .matcore import as_sign, as_sym, pi_n_diag_product

MAX_ENUM_DIM = 7


# ---------------------------------------------------------------------------
# signed permutations


@dataclass(frozen=True, order=True)
class SignedPerm:
    """``Q = diag(signs) @ Pm`` with ``Pm[i, perm[i]] = 1``.

    So ``(Q A Q^T)[i, j] = signs[i] * signs[j] * A[perm[i], perm[j]]``.
    """

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")
        if len(self.signs) != len(self.perm) or any(s not in (-1, 1) for s in self.signs):
            raise ValueError(f"bad signs: {self.signs}")

    @classmethod
    def identity(cls, d: int, sign: int = 1) -> "SignedPerm":
        return cls(tuple(range(d)), (sign,) * d)

    @property
    def dim(self) -> int:
        return len(self.perm)

    def matrix(self) -> np.ndarray:
        q = np.zeros((self.dim, self.dim), dtype=int)
        q[np.arange(self.dim), self.perm] = self.signs
        return q

    def act(self, a) -> np.ndarray:
        a = np.asarray(a)
        p = np.asarray(self.perm)
        s = np.asarray(self.signs)
        return s[:, None] * a[np.ix_(p, p)] * s[None, :]

    def act_diag(self, diag: Sequence) -> list:
        """Diagonal of ``Q diag(D) Q^T``; exact for Fraction entries."""
        return [diag[k] for k in self.perm]

    def __matmul__(self, other: "SignedPerm") -> "SignedPerm":
        perm = tuple(other.perm[k] for k in self.perm)
        signs = tuple(s * other.signs[k] for s, k in zip(self.signs, self.perm))
        return SignedPerm(perm, signs)

    def inverse(self) -> "SignedPerm":
        inv = [0] * self.dim
        for i, k in enumerate(self.perm):
            inv[k] = i
        return SignedPerm(tuple(inv), tuple(self.signs[inv[j]] for j in range(self.dim)))


def all_signed_perms(d: int) -> Iterable[SignedPerm]:
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            yield SignedPerm(perm, signs)


def is_group(elems: Sequence[SignedPerm]) -> bool:
    """Closure, identity and inverses for a finite set of signed permutations."""
    if not elems:
        return False
    s = set(elems)
    d = elems[0].dim
    if SignedPerm.identity(d) not in s:
        return False
    return all(g.inverse() in s for g in s) and all(g @ h in s for g in s for h in s)


# ---------------------------------------------------------------------------
# canonical forms and orbit enumeration


@lru_cache(maxsize=None)
def _perm_table(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.intp)


@lru_cache(maxsize=None)
def _triu_weights(m: int):
    iu = np.triu_indices(m, 1)
    nbits = len(iu[0])
    weights = np.array([1 << (nbits - 1 - k) for k in range(nbits)], dtype=np.int64)
    return iu, weights


def _orbit_keys(s: np.ndarray) -> np.ndarray:
    """Keys of the switching-normalized forms of every permutation of ``s``.

    For a fixed permutation the lexicographically smallest switching has
    row 0 equal to -1 off the diagonal, and it is unique; so these keys are
    exactly the candidates for the orbit minimum. A key reads the strict
    upper triangle row by row with -1 -> 0 and +1 -> 1, most significant
    bit first, so integer order is lexicographic order.
    """
    m = s.shape[0]
    perms = _perm_table(m)
    t = s[perms[:, :, None], perms[:, None, :]]
    sw = -t[:, 0, :]
    sw[:, 0] = 1
    t = sw[:, :, None] * t * sw[:, None, :]
    iu, weights = _triu_weights(m)
    bits = (t[:, iu[0], iu[1]] > 0).astype(np.int64)
    return bits @ weights


def _decode(key: int, m: int) -> np.ndarray:
    iu, weights = _triu_weights(m)
    bits = (key & weights) != 0
    s = np.ones((m, m), dtype=int)
    s[iu] = np.where(bits, 1, -1)
    s.T[iu] = s[iu]
    return s


def canonical_key(s) -> int:
    s = as_sign(s)
    if s.shape[0] > MAX_ENUM_DIM:
        raise ValueError(f"canonical forms are supported up to dimension {MAX_ENUM_DIM}")
    if s.shape[0] == 1:
        return 0
    return int(_orbit_keys(s).min())


def canonical_form(s) -> np.ndarray:
    """Orbit representative with the lexicographically smallest upper triangle."""
    s = as_sign(s)
    if s.shape[0] == 1:
        return s
    return _decode(canonical_key(s), s.shape[0])


def enumerate_sign_classes(m: int) -> list[np.ndarray]:
    """One canonical representative per signed-permutation orbit of S_m.

    Every orbit meets the set of matrices whose first row is -1 off the
    diagonal, so only those ``2^((m-1)(m-2)/2)`` matrices are scanned; each
    unseen one has its orbit computed and marked.
    """
    if not 2 <= m <= MAX_ENUM_DIM:
        raise ValueError(f"m must lie in [2, {MAX_ENUM_DIM}], got {m}")
    iu, weights = _triu_weights(m)
    nbits = len(weights)
    free = nbits - (m - 1)  # bits after the first row
    seen: set[int] = set()
    reps: list[int] = []
    for low in range(1 << free):
        key = low  # first-row bits are all zero (entries -1)
        if key in seen:
            continue
        keys = np.unique(_orbit_keys(_decode(key, m)))
        seen.update(int(k) for k in keys)
        reps.append(int(keys[0]))
    return [_decode(k, m) for k in sorted(reps)]


def all_sign_matrices(m: int) -> Iterable[np.ndarray]:
    iu, _ = _triu_weights(m)
    for bits in itertools.product((-1, 1), repeat=len(iu[0])):
        s = np.ones((m, m), dtype=int)
        s[iu] = bits
        s.T[iu] = bits
        yield s


# ---------------------------------------------------------------------------
# the diagonal simplex


@dataclass(frozen=True)
class SimplexDiag:
    """Diagonal of a unit-trace nonnegative diagonal matrix, entries >= eps.

    Entries may be floats or Fractions; Fractions are kept exact.
    """

    diag: tuple
    eps: float | Fraction = 0

    def __post_init__(self):
        diag = tuple(self.diag.tolist() if isinstance(self.diag, np.ndarray) else self.diag)
        object.__setattr__(self, "diag", diag)
        d = len(diag)
        if d < 1:
            raise ValueError("empty diagonal")
        if self.eps < 0 or self.eps * d > 1 + 1e-15:
            raise ValueError(f"eps must lie in [0, 1/{d}], got {self.eps}")
        exact = all(isinstance(x, (int, Fraction)) for x in diag)
        total = sum(diag)
        if (total != 1) if exact else abs(total - 1) > 1e-12:
            raise ValueError(f"diagonal must sum to 1, got {total}")
        if min(diag) < self.eps - (0 if exact else 1e-15):
            raise ValueError(f"entry {min(diag)} is below eps = {self.eps}")

    @property
    def dim(self) -> int:
        return len(self.diag)

    @property
    def array(self) -> np.ndarray:
        return np.array([float(x) for x in self.diag])

    @classmethod
    def uniform(cls, d: int, exact: bool = False) -> "SimplexDiag":
        return cls((Fraction(1, d),) * d if exact else (1.0 / d,) * d)


def project_to_simplex(y, eps: float = 0.0) -> np.ndarray:
    """Euclidean projection onto ``{x : sum(x) = 1, x >= eps}``."""
    y = np.asarray(y, dtype=float)
    d = y.size
    mass = 1.0 - d * eps
    if mass < -1e-15:
        raise ValueError("eps > 1/d: the feasible set is empty")
    if mass <= 0:
        return np.full(d, 1.0 / d)
    z = y - eps
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - mass
    k = np.arange(1, d + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(z - tau, 0.0) + eps


def _feasible_or_project(x, eps: float) -> np.ndarray:
    """Keep an already feasible point bit-for-bit; project anything else."""
    x = np.asarray(x, dtype=float)
    if abs(x.sum() - 1.0) <= 1e-12 and x.min() >= eps:
        return x.copy()
    return project_to_simplex(x, eps)


def objective(s, d, n: int) -> float:
    return pi_n_diag_product(s, np.asarray(d, dtype=float), n)


@dataclass(frozen=True)
class GradInfo:
    value: float
    grad: np.ndarray
    gap: float  # lambda_n - lambda_{n+1} of sqrt(D) S sqrt(D); inf when n = d


def simplex_gradient(s, d, n: int) -> GradInfo:
    """Value and gradient of ``f(D) = pi_n(sqrt(D) S sqrt(D))`` in the diagonal.

    With ``u = sqrt(d)``, ``M = diag(u) S diag(u)`` and ``P`` the projector onto
    the top-``n`` eigenspace of ``M``, ``df/dd_k = (S diag(u) P)[k, k] / u_k``.
    At ``u_k = 0`` the limit ``sum_x (S (u * x))_k^2 / lambda_x`` over the top
    eigenpairs is used. When the spectral gap vanishes ``P`` still yields a
    supergradient of the (then non-smooth) objective.
    """
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    u = np.sqrt(np.maximum(d, 0.0))
    mat = u[:, None] * s * u[None, :]
    w, v = np.linalg.eigh(mat)
    w, v = w[::-1], v[:, ::-1]
    top = v[:, :n]
    value = float(np.sum(w[:n]))
    gap = float(w[n - 1] - w[n]) if n < len(w) else math.inf
    su = s @ (u[:, None] * top)  # (S diag(u) X), d x n
    grad = np.empty_like(d)
    small = u < 1e-7
    if np.any(~small):
        grad[~small] = np.sum(su[~small] * top[~small], axis=1) / u[~small]
    if np.any(small):
        lam = w[:n]
        ok = np.abs(lam) > 1e-12
        grad[small] = np.sum(su[small][:, ok] ** 2 / lam[ok], axis=1)
    return GradInfo(value, grad, gap)


@dataclass
class SimplexMaxResult:
    best_d: SimplexDiag
    value: float
    restarts_used: int
    grid_certificate: tuple[int, float] | None = None
    certified: bool = False  # True when the grid check at d <= 4 passed
    degenerate_steps: int = 0


@dataclass
class AscentOptions:
    restarts: int = 32
    seed: int = 0
    grid: int = 60
    max_iter: int = 3000
    min_step: float = 1e-12
    grid_tol: float = 1e-6
    grid_max_dim: int = 4
    extra_starts: list = field(default_factory=list)


def _start_points(d: int, eps: float, opts: AscentOptions) -> list[np.ndarray]:
    starts = [_feasible_or_project(x, eps) for x in opts.extra_starts]
    gen = [np.full(d, 1.0 / d)]
    k = opts.restarts - 1
    if k > 0:
        if d == 1:
            pts = np.full((k, 1), 0.5)
        else:
            pts = qmc.Halton(d=d, scramble=True, seed=opts.seed).random(k)
        w = -np.log(np.clip(pts, 1e-12, 1.0))
        gen.extend(w / w.sum(axis=1, keepdims=True))
    mass = 1.0 - d * eps
    starts.extend(project_to_simplex(eps + mass * w, eps) for w in gen)
    return starts


def projected_ascent(s, n: int, x0, eps: float, opts: AscentOptions) -> tuple[np.ndarray, float, int]:
    """Monotone projected gradient ascent with step doubling/halving.

    A trial point is accepted only if it does not decrease the objective, so
    the returned value is at least ``f(x0)``. At a vanishing spectral gap the
    step is halved before continuing with the projector supergradient.
    """
    x = _feasible_or_project(x0, eps)
    info = simplex_gradient(s, x, n)
    # values always come from objective() so that comparisons across runs agree bitwise
    fx = objective(s, x, n)
    step = 1.0
    degenerate = 0
    for _ in range(opts.max_iter):
        if info.gap <= 1e-12:
            degenerate += 1
            step *= 0.5
        y = project_to_simplex(x + step * info.grad, eps)
        if np.max(np.abs(y - x)) < 1e-15:
            break
        fy = objective(s, y, n)
        if fy >= fx:
            moved = np.max(np.abs(y - x))
            x, fx = y, fy
            info = simplex_gradient(s, x, n)
            step = min(step * 2.0, 1e6)
            if moved < 1e-14:
                break
        else:
            step *= 0.5
            if step < opts.min_step:
                break
    return x, fx, degenerate


def _grid_points(d: int, g: int) -> np.ndarray:
    """All compositions of ``g`` into ``d`` nonnegative parts, divided by ``g``."""
    pts = []
    for bars in itertools.combinations(range(g + d - 1), d - 1):
        prev = -1
        comp = []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(g + d - 2 - prev)
        pts.append(comp)
    return np.array(pts, dtype=float) / g


def grid_maximum(s, n: int, eps: float, g: int) -> tuple[float, np.ndarray]:
    s = np.asarray(s, dtype=float)
    d = s.shape[0]
    pts = eps + (1.0 - d * eps) * _grid_points(d, g)
    u = np.sqrt(pts)
    mats = u[:, :, None] * s[None] * u[:, None, :]
    vals = np.linalg.eigvalsh(mats)[:, ::-1][:, :n].sum(axis=1)
    k = int(np.argmax(vals))
    return float(vals[k]), pts[k]


def maximize_over_simplex(s, n: int, eps: float = 0.0, opts: AscentOptions | None = None) -> SimplexMaxResult:
    """Maximize ``pi_n(sqrt(D) S sqrt(D))`` over unit-trace diagonals ``D >= eps``.

    Multistart projected gradient ascent from seed-deterministic starts
    (barycenter plus scrambled Halton points). For ``d <= 4`` the result is
    compared with an exhaustive grid; a grid point that beats the ascent is
    used as one more start, and the grid check is then reported. For larger
    ``d`` the value is only the best found.
    """
    opts = opts or AscentOptions()
    s = as_sym(s)
    d = s.shape[0]
    if not 1 <= n <= d:
        raise ValueError(f"n must lie in [1, {d}], got {n}")
    if eps < 0 or eps * d > 1 + 1e-15:
        raise ValueError(f"infeasible: eps = {eps} exceeds 1/{d}")
    eps = min(float(eps), 1.0 / d)
    best_x, best_f, degenerate = None, -math.inf, 0
    starts = _start_points(d, eps, opts)
    for x0 in starts:
        x, fx, deg = projected_ascent(s, n, x0, eps, opts)
        degenerate += deg
        if fx > best_f + 1e-15:
            best_x, best_f = x, fx
    cert, certified = None, False
    if d <= opts.grid_max_dim and d > 1:
        gval, gpt = grid_maximum(s, n, eps, opts.grid)
        if gval > best_f:
            x, fx, deg = projected_ascent(s, n, gpt, eps, opts)
            degenerate += deg
            if fx > best_f:
                best_x, best_f = x, fx
        cert = (opts.grid, gval)
        certified = gval <= best_f + opts.grid_tol
    best_d = SimplexDiag(tuple(best_x), eps)
    return SimplexMaxResult(best_d, best_f, len(starts), cert, certified, degenerate)


@dataclass
class EpsLimitResult:
    eps_seq: list[float]
    values: list[float]
    limit_value: float
    limit_tol: float

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.values, self.values[1:]))

    @property
    def converged(self) -> bool:
        return abs(self.values[-1] - self.limit_value) <= self.limit_tol


def eps_limit_check(s, n: int, eps_seq: Sequence[float], opts: AscentOptions | None = None,
                    limit_tol: float = 1e-6) -> EpsLimitResult:
    """Maxima over the shrinking-eps family of feasible sets.

    Each run is warm-started from the previous maximizer, which is feasible
    for the next (larger) set; since the ascent never decreases the
    objective, the sequence is nondecreasing by construction.
    """
    opts = opts or AscentOptions()
    s = as_sym(s)
    d = s.shape[0]
    eps_seq = [float(e) for e in eps_seq]
    if any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ValueError("eps_seq must be strictly decreasing")
    if any(e <= 0 or e * d > 1 + 1e-15 for e in eps_seq):
        raise ValueError(f"each eps must lie in (0, 1/{d}]")
    values = []
    warm: list = []
    for e in eps_seq:
        o = AscentOptions(**{**opts.__dict__, "extra_starts": warm})
        res = maximize_over_simplex(s, n, e, o)
        values.append(res.value)
        warm = [res.best_d.array]
    o = AscentOptions(**{**opts.__dict__, "extra_starts": warm})
    limit = maximize_over_simplex(s, n, 0.0, o).value
    return EpsLimitResult(eps_seq, values, limit, limit_tol)


# ---------------------------------------------------------------------------
# stabilizers and averaging


def stabilizer(a, tol: float = 1e-10) -> list[SignedPerm]:
    """All signed permutations ``Q`` with ``max |Q A Q^T - A| <= tol``."""
    a = as_sym(a)
    d = a.shape[0]
    if d > MAX_ENUM_DIM:
        raise ValueError(f"exhaustive stabilizer search is limited to dimension {MAX_ENUM_DIM}")
    signs = np.array(list(itertools.product((1, -1), repeat=d)))
    outer = signs[:, :, None] * signs[:, None, :]
    out = []
    for perm in _perm_table(d):
        t = a[np.ix_(perm, perm)]
        if np.max(np.abs(np.abs(t) - np.abs(a))) > tol:
            continue
        err = np.max(np.abs(outer * t[None] - a[None]), axis=(1, 2))
        for k in np.flatnonzero(err <= tol):
            out.append(SignedPerm(tuple(int(i) for i in perm), tuple(int(x) for x in signs[k])))
    return sorted(out)


def symmetrize(dg: SimplexDiag, group: Sequence[SignedPerm]) -> SimplexDiag:
    """Group average ``(1/|G|) sum_Q Q D Q^T`` of a diagonal ``D``.

    Exact when the entries of ``dg`` are Fractions.
    """
    if not is_group(group):
        raise ValueError("the given signed permutations do not form a group")
    if group[0].dim != dg.dim:
        raise ValueError("dimension mismatch between D and the group")
    exact = all(isinstance(x, (int, Fraction)) for x in dg.diag)
    total = [Fraction(0) if exact else 0.0] * dg.dim
    for q in group:
        for i, x in enumerate(q.act_diag(dg.diag)):
            total[i] += x
    k = len(group)
    avg = tuple(t / k for t in total)
    return SimplexDiag(avg, dg.eps)


# ---------------------------------------------------------------------------
# searches


def best_sign_matrix(weights, n: int) -> tuple[np.ndarray, float]:
    """Exhaustive maximizer of ``pi_n(sqrt(L) S sqrt(L))`` over all of S_m.

    Ties are broken by enumeration order (first found wins, with a 1e-12
    tolerance).
    """
    weights = np.asarray(weights, dtype=float)
    m = weights.size
    best, best_v = None, -math.inf
    for s in all_sign_matrices(m):
        v = pi_n_diag_product(s, weights, n)
        if v > best_v + 1e-12:
            best, best_v = s, v
    return best, best_v


@dataclass
class ClassRecord:
    class_id: int
    sign_matrix: np.ndarray
    result: SimplexMaxResult


def search_classes(n: int, m: int, eps: float = 0.0, opts: AscentOptions | None = None,
                   workers: int = 1) -> list[ClassRecord]:
    """Maximize over the simplex for every orbit representative of S_m.

    Records come back in class order whatever the worker count.
    """
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    classes = enumerate_sign_classes(m)
    opts = opts or AscentOptions()

    def run(s):
        return maximize_over_simplex(s, n, eps, opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, classes))
    else:
        results = [run(s) for s in classes]
    return [ClassRecord(i, s, r) for i, (s, r) in enumerate(zip(classes, results))]


def best_record(records: Sequence[ClassRecord]) -> ClassRecord:
    best = records[0]
    for r in records[1:]:
        if r.result.value > best.result.value + 1e-12:
            best = r
    return best


def _rho_abs(u: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(np.abs(u @ u.T))[-1])


def _retract(u: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(u)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def stiefel_rho_search(n: int, m: int, restarts: int = 32, seed: int = 0,
                       max_iter: int = 500, h: float = 1e-7) -> tuple[np.ndarray, float]:
    """Local search for large ``rho(|P|)`` over rank-``n`` orthogonal projections.

    ``P = U U^T`` with ``U`` an ``m x n`` orthonormal frame. Each restart runs
    ascent with a central finite-difference gradient projected onto the
    tangent space and a QR retraction. The value found is a lower bound for
    the maximum, never a claim that the maximum was reached.
    """
    if not (1 <= n <= m <= 8):
        raise ValueError(f"need 1 <= n <= m <= 8, got n={n}, m={m}")
    if n == m:
        return np.eye(m), 1.0
    rng = np.random.default_rng(seed)
    best_u, best_v = None, -math.inf
    for _ in range(restarts):
        u = _retract(rng.standard_normal((m, n)))
        fu = _rho_abs(u)
        step = 0.5
        for _ in range(max_iter):
            g = np.zeros_like(u)
            for idx in np.ndindex(*u.shape):
                e = np.zeros_like(u)
                e[idx] = h
                g[idx] = (_rho_abs(u + e) - _rho_abs(u - e)) / (2 * h)
            g -= u @ (0.5 * (u.T @ g + g.T @ u))
            if np.max(np.abs(g)) < 1e-10:
                break
            while step > 1e-12:
                cand = _retract(u + step * g)
                fc = _rho_abs(cand)
                if fc > fu:
                    u, fu = cand, fc
                    step = min(step * 2, 1.0)
                    break
                step *= 0.5
            else:
                break
        if fu > best_v:
            best_u, best_v = u, fu
    return best_u @ best_u.T, best_v
