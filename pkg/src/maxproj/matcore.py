"""Dense symmetric linear algebra.

Symmetric and sign matrices are plain ``numpy`` arrays; the ``as_sym`` and
``as_sign`` helpers validate them at module boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYM_TOL = 1e-12
ORTHO_TOL = 1e-10
RESID_TOL = 1e-9
EQ_TOL = 1e-9


class AmbiguousSignError(ValueError):
    """Raised when Sgn is requested for a matrix with (near) zero entries."""

    def __init__(self, positions):
        self.positions = [tuple(int(i) for i in p) for p in positions]
        super().__init__(f"ambiguous sign at entries {self.positions}")


class EigenConvergenceError(RuntimeError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"eigensolver did not converge (residual {residual:.3e})")


def as_sym(a, sym_tol: float = SYM_TOL) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - a.T))
    if asym > sym_tol:
        raise ValueError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3e})")
    return 0.5 * (a + a.T)


def as_sign(s) -> np.ndarray:
    """Validate a symmetric +-1 matrix with unit diagonal; returns an int array."""
    s = np.array(s)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if not np.all(np.isin(s, (-1, 1))):
        raise ValueError("sign matrix entries must be +1 or -1")
    if not np.array_equal(s, s.T):
        raise ValueError("sign matrix must be symmetric")
    if not np.all(np.diag(s) == 1):
        raise ValueError("sign matrix must have unit diagonal")
    return s.astype(int)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, orthonormal

    def projector(self, n: int) -> np.ndarray:
        u = self.eigenvectors[:, :n]
        return u @ u.T


def _orient(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-14)
        if nz.size and col[nz[0]] < 0:
            vecs[:, k] = -col
    return vecs


def eig_sym(a, sym_tol: float = SYM_TOL, resid_tol: float = RESID_TOL) -> Spectrum:
    """Eigendecomposition with eigenvalues in descending order.

    Each eigenvector is oriented so that its first nonzero component is
    positive. Inside a repeated eigenvalue the individual vectors are not
    canonical; use projectors there.
    """
    a = as_sym(a, sym_tol)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError:
        raise EigenConvergenceError(float("inf")) from None
    w, v = w[::-1], _orient(v[:, ::-1])
    scale = max(1.0, float(np.max(np.abs(a))))
    resid = float(np.max(np.abs(a @ v - v * w)))
    if resid > resid_tol * scale:
        raise EigenConvergenceError(resid)
    return Spectrum(w, v)


def eigvals_desc(a) -> np.ndarray:
    return np.linalg.eigvalsh(as_sym(a))[::-1]


def pi_n(a, n: int) -> float:
    """Sum of the ``n`` largest eigenvalues (Ky Fan sum)."""
    a = as_sym(a)
    if not 1 <= n <= a.shape[0]:
        raise ValueError(f"n must lie in [1, {a.shape[0]}], got {n}")
    return float(np.sum(np.linalg.eigvalsh(a)[::-1][:n]))


def pi_n_diag_product(a, d, n: int) -> float:
    """pi_n of the product ``A D`` for a nonnegative diagonal ``D``.

    ``A D`` is not symmetric, but ``sqrt(D) A sqrt(D)`` and ``A D`` are the
    products ``XY`` and ``YX`` with ``X = sqrt(D) A``, ``Y = sqrt(D)``, so they
    share eigenvalues; the symmetric form is the one we diagonalize.
    ``d`` may be the diagonal vector or a diagonal matrix.
    """
    a = as_sym(a)
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        if np.any(d - np.diag(np.diag(d))):
            raise ValueError("D must be diagonal")
        d = np.diag(d)
    if d.shape != (a.shape[0],):
        raise ValueError("dimension mismatch between A and D")
    if np.any(d < 0):
        raise ValueError("D must have nonnegative diagonal entries")
    r = np.sqrt(d)
    return pi_n(r[:, None] * a * r[None, :], n)


def abs_entrywise(a) -> np.ndarray:
    return np.abs(as_sym(a))


def sgn_entrywise(a, zero_tol: float = 1e-10) -> np.ndarray:
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    a = as_sym(a)
    bad = np.argwhere(np.abs(a) <= zero_tol)
    if bad.size:
        raise AmbiguousSignError(bad)
    return np.where(a > 0, 1, -1)


def perron_radius(m) -> float:
    """Largest eigenvalue of an entrywise nonnegative symmetric matrix."""
    m = as_sym(m)
    if np.any(m < 0):
        raise ValueError("Perron radius needs an entrywise nonnegative matrix")
    return float(np.linalg.eigvalsh(m)[-1])


@dataclass(frozen=True)
class VnCertificate:
    lhs: float
    bound: float
    equality: bool
    shared_basis: np.ndarray | None = None
    residual: float | None = None  # max eigen-residual of the shared basis for A and B

    @property
    def gap(self) -> float:
        return self.bound - self.lhs


def _clusters(w: np.ndarray, tol: float) -> list[slice]:
    out, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k - 1] - w[k] > tol:
            out.append(slice(start, k))
            start = k
    return out


def shared_ordered_basis(a, b, cluster_tol: float = 1e-8) -> tuple[np.ndarray, float]:
    """Orthonormal basis diagonalizing A and B with both spectra descending.

    Diagonalizes A, then B restricted to each eigenspace of A (sorted
    descending). Returns the basis and the worst residual
    ``max(|A W - W diag(a)|, |B W - W diag(b)|)`` where ``a``, ``b`` are the
    descending spectra of A and B.
    """
    a, b = as_sym(a), as_sym(b)
    spec = eig_sym(a)
    w = spec.eigenvectors.copy()
    scale = max(1.0, float(np.max(np.abs(spec.eigenvalues))))
    for blk in _clusters(spec.eigenvalues, cluster_tol * scale):
        cols = w[:, blk]
        bb = cols.T @ b @ cols
        mu, z = np.linalg.eigh(0.5 * (bb + bb.T))
        w[:, blk] = cols @ z[:, ::-1]
    la, lb = spec.eigenvalues, eigvals_desc(b)
    resid = max(
        float(np.max(np.abs(a @ w - w * la))),
        float(np.max(np.abs(b @ w - w * lb))),
    )
    return w, resid


def vn_trace_check(a, b, eq_tol: float = EQ_TOL) -> VnCertificate:
    """von Neumann's trace inequality ``Tr(AB) <= sum_i a_i b_i`` (descending).

    Equality holds exactly when A and B share an orthonormal eigenbasis in
    which both spectra appear in descending order; in that case the basis is
    returned as the certificate together with its residual.
    """
    a, b = as_sym(a), as_sym(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    lhs = float(np.sum(a * b))
    bound = float(eigvals_desc(a) @ eigvals_desc(b))
    if bound - lhs > eq_tol:
        return VnCertificate(lhs, bound, False)
    basis, resid = shared_ordered_basis(a, b)
    return VnCertificate(lhs, bound, True, basis, resid)
