"""Blow-ups of sign matrices and the identity chain around them.

A ``(p_1, ..., p_m)``-blow-up of an ``m x m`` matrix replaces entry ``(i, j)``
by a constant ``p_i x p_j`` block; blocks are laid out contiguously. For a
sign matrix ``S0`` that maximizes ``pi_n(sqrt(L) S sqrt(L))`` with
``L = diag(p) / d``, the projector ``P`` onto the top-``n`` eigenspace of the
blow-up ``S`` satisfies ``Sgn(P) = S``, and its row-compressed form
``Q = V V^T`` satisfies ``Sgn(Q) = S0`` and ``rho(|Q|) = rho(|P|)``.
:func:`verify_remark` measures all of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .matcore import AmbiguousSignError, as_sign, as_sym, eig_sym, perron_radius, pi_n, sgn_entrywise

GAP_TOL = 1e-8
IDENTITY_TOL = 1e-8


class DegenerateEigenspaceError(ValueError):
    def __init__(self, gap: float, n: int):
        self.gap = gap
        self.n = n
        super().__init__(f"degenerate top-{n} eigenspace: lambda_n - lambda_(n+1) = {gap:.3e}")


class RowRepetitionError(ValueError):
    def __init__(self, block: int, spread: float):
        self.block = block
        self.spread = spread
        super().__init__(f"rows of block {block} differ by {spread:.3e}; U does not come from a blow-up")


@dataclass(frozen=True)
class BlowupSpec:
    p: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.p)
        if not p or any(x < 1 for x in p):
            raise ValueError(f"multiplicities must be positive integers, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def d(self) -> int:
        return sum(self.p)

    @property
    def q(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.d) for x in self.p)

    def blocks(self) -> list[range]:
        """The partition A_1, ..., A_m of range(d), contiguous by index."""
        out, start = [], 0
        for x in self.p:
            out.append(range(start, start + x))
            start += x
        return out

    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.m), self.p)


def blow_up(s0, spec: BlowupSpec) -> np.ndarray:
    s0 = np.asarray(s0)
    if s0.shape != (spec.m, spec.m):
        raise ValueError(f"S0 has shape {s0.shape}, spec expects {spec.m} x {spec.m}")
    lab = spec.labels()
    return s0[np.ix_(lab, lab)]


def top_projector(s, n: int, gap_tol: float = GAP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``U`` (d x n) spanning the top-``n`` eigenspace, and ``U U^T``."""
    spec = eig_sym(s)
    d = len(spec.eigenvalues)
    if not 1 <= n <= d:
        raise ValueError(f"n must lie in [1, {d}], got {n}")
    if n < d:
        gap = float(spec.eigenvalues[n - 1] - spec.eigenvalues[n])
        if gap <= gap_tol:
            raise DegenerateEigenspaceError(gap, n)
    u = spec.eigenvectors[:, :n]
    return u, u @ u.T


def compress(u, spec: BlowupSpec, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``z_i = sqrt(p_i) w_i`` where ``w_i`` is the common row of block i.

    Returns ``(V, Q)`` with ``Q = V V^T``.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] != spec.d:
        raise ValueError(f"U has {u.shape[0]} rows, spec expects {spec.d}")
    rows = []
    for i, blk in enumerate(spec.blocks()):
        block = u[list(blk)]
        spread = float(np.max(np.abs(block - block[0]))) if len(blk) > 1 else 0.0
        if spread > tol:
            raise RowRepetitionError(i, spread)
        rows.append(math.sqrt(spec.p[i]) * block.mean(axis=0))
    v = np.array(rows)
    return v, v @ v.T


@dataclass
class Check:
    """One measured quantity with the tolerance it was judged against.

    ``kind`` is ``"abs"`` (pass when ``|value| <= tol``), ``"min"`` (pass when
    ``value >= -tol``) or ``"bool"``.
    """

    value: float | bool | None
    tol: float | None = None
    kind: str = "abs"
    note: str | None = None

    @property
    def applicable(self) -> bool:
        return self.value is not None

    @property
    def ok(self) -> bool | None:
        if self.value is None:
            return None
        if self.kind == "bool":
            return bool(self.value)
        if self.kind == "min":
            return self.value >= -self.tol
        return abs(self.value) <= self.tol

    def to_dict(self) -> dict:
        out = {"value": self.value, "tol": self.tol, "ok": self.ok}
        if self.note:
            out["note"] = self.note
        return out


RESIDUAL_FIELDS = (
    "trace_id", "commute", "sgn_match", "vtv", "q_trace_id", "sgn_q",
    "rho_eq", "abs_sum_id", "intermediate_eq", "final_ineq_slack",
)


@dataclass
class RemarkReport:
    n: int
    p: tuple[int, ...]
    s0_is_maximizer: bool
    gap: float
    trace_id: Check
    commute: Check
    sgn_match: Check
    vtv: Check
    q_trace_id: Check
    sgn_q: Check
    rho_eq: Check
    abs_sum_id: Check
    intermediate_eq: Check
    final_ineq_slack: Check
    sgn_offending: list = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def checks(self) -> dict[str, Check]:
        return {name: getattr(self, name) for name in RESIDUAL_FIELDS}

    @property
    def enforced(self) -> bool:
        """Identities are enforced only for a maximizing S0."""
        return self.s0_is_maximizer

    @property
    def passed(self) -> bool:
        """All applicable checks pass and nothing was skipped for an error."""
        return not self.errors and all(c.ok is not False for c in self.checks().values())

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "p": list(self.p),
            "s0_is_maximizer": self.s0_is_maximizer,
            "gap": self.gap,
        }
        for name, c in self.checks().items():
            out[name] = c.to_dict()
        out["sgn_offending"] = [list(x) for x in self.sgn_offending]
        out["errors"] = list(self.errors)
        out["passed"] = self.passed
        return out


def _na(reason: str) -> Check:
    return Check(None, note=f"not applicable: {reason}")


def verify_remark(
    s0,
    spec: BlowupSpec,
    n: int,
    s0_is_maximizer: bool = False,
    p0=None,
    tol: float = IDENTITY_TOL,
    gap_tol: float = GAP_TOL,
    zero_tol: float = 1e-10,
) -> RemarkReport:
    """Run the blow-up pipeline and measure every identity of the chain.

    ``P = U U^T`` from the blow-up ``S``; ``V`` from row compression of ``U``;
    ``Q = V V^T``. Measured: ``pi_n(S) - Tr(SP)``, ``|SP - PS|``,
    ``Sgn(P) = S``, ``|V^T V - I|``,
    ``Tr(sqrt(L) S0 sqrt(L) Q) - pi_n(sqrt(L) S0 sqrt(L))``, ``Sgn(Q) = S0``,
    ``rho(|Q|) - rho(|P|)``, ``j^T |P| j - pi_n(S)``, and
    ``(d rho(|P|) - j^T|P|j) - (d rho(|Q|) - pi_n(S))``. With ``p0`` (an
    ``m x m`` projector) the slack of
    ``d rho(|P|) - j^T|P|j <= d (rho(|P0|) - sqrt(q)^T |P0| sqrt(q))`` is
    reported too.

    Failures (a degenerate gap, an ambiguous sign, a broken row repetition)
    are recorded in the report rather than raised. Identities that only hold
    for a maximizing ``S0`` are reported either way; only the caller's
    ``s0_is_maximizer`` decides whether they are meant to hold.
    """
    s0 = as_sign(s0)
    if s0.shape[0] != spec.m:
        raise ValueError(f"S0 is {s0.shape[0]} x {s0.shape[0]}, spec expects m = {spec.m}")
    s = blow_up(s0, spec).astype(float)
    d = spec.d
    q = np.array([float(x) for x in spec.q])
    sq = np.sqrt(q)
    weighted = sq[:, None] * s0 * sq[None, :]
    errors: list[str] = []
    ev = np.linalg.eigvalsh(s)[::-1]
    gap = float(ev[n - 1] - ev[n]) if n < d else math.inf

    pi_s = pi_n(s, n)
    na = {k: _na("degenerate top eigenspace") for k in RESIDUAL_FIELDS}
    report = RemarkReport(n, spec.p, s0_is_maximizer, gap, **na)
    report.errors = errors
    try:
        u, p = top_projector(s, n, gap_tol)
    except DegenerateEigenspaceError as exc:
        errors.append(str(exc))
        return report

    report.trace_id = Check(pi_s - float(np.sum(s * p)), tol)
    report.commute = Check(float(np.max(np.abs(s @ p - p @ s))), tol)
    try:
        sg = sgn_entrywise(p, zero_tol)
        mismatch = np.argwhere(sg != s)
        report.sgn_match = Check(mismatch.size == 0, kind="bool")
        report.sgn_offending = [tuple(int(i) for i in x) for x in mismatch]
    except AmbiguousSignError as exc:
        report.sgn_match = Check(False, kind="bool", note=str(exc))
        report.sgn_offending = exc.positions
        errors.append(f"Sgn(P): {exc}")

    abs_p = np.abs(p)
    rho_p = perron_radius(abs_p)
    jpj = float(abs_p.sum())
    report.abs_sum_id = Check(jpj - pi_s, tol)

    try:
        v, qm = compress(u, spec)
    except RowRepetitionError as exc:
        errors.append(str(exc))
        for k in ("vtv", "q_trace_id", "sgn_q", "rho_eq", "intermediate_eq", "final_ineq_slack"):
            setattr(report, k, _na("row repetition failed"))
        return report

    report.vtv = Check(float(np.max(np.abs(v.T @ v - np.eye(n)))), tol)
    report.q_trace_id = Check(float(np.sum(weighted * qm)) - pi_n(weighted, n), tol)
    try:
        sgq = sgn_entrywise(qm, zero_tol)
        report.sgn_q = Check(bool(np.array_equal(sgq, s0)), kind="bool")
    except AmbiguousSignError as exc:
        report.sgn_q = Check(False, kind="bool", note=str(exc))
        errors.append(f"Sgn(Q): {exc}")
    rho_q = perron_radius(np.abs(qm))
    report.rho_eq = Check(rho_q - rho_p, tol)
    lhs = d * rho_p - jpj
    report.intermediate_eq = Check(lhs - (d * rho_q - pi_s), tol)

    if p0 is None:
        report.final_ineq_slack = _na("no P0 supplied")
    else:
        p0 = as_sym(p0)
        if p0.shape != (spec.m, spec.m):
            raise ValueError(f"P0 must be {spec.m} x {spec.m}")
        abs_p0 = np.abs(p0)
        rhs = d * (perron_radius(abs_p0) - float(sq @ abs_p0 @ sq))
        report.final_ineq_slack = Check(rhs - lhs, tol, kind="min")
    return report
