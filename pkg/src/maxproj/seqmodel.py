"""Exact model of eventually constant sequences.

An :class:`EvSeq` is a rational sequence ``(x_1, x_2, ...)`` that is constant
from some index on. It stands for an element of l_inf, of c_0 when the tail is
zero, and of l_1 (as a finitely supported functional) when the tail is zero.
Coordinates are 1-based, as in the usual sequence notation.

Everything here is exact rational arithmetic, except the floating-point
LP value of the hexagon projection constant reported by :func:`kobos_report`.

The main entry point is :func:`kobos_report`: ``F = span{f1, f2}`` inside
l_inf with ``f1 = (1, 0, 1, 1, ...)`` and ``f2 = (0, 1, 1, 1, ...)``, the
complement ``G = ker(pi_1) & ker(pi_2)``, and the pre-annihilators in l_1 and
c_0. ``V = (F_0)_0`` turns out one-dimensional, so ``V (+) U`` misses
``(1, 0, 0, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exact
from .projconst import SubspaceLinf, relative_projection_constant

LINF, C0, L1 = "linf", "c0", "l1"


def _fr(x) -> Fraction:
    return exact.to_fraction(x)


def fmt(x: Fraction) -> str:
    return str(x)  # "p/q" or "p"


@dataclass(frozen=True)
class EvSeq:
    prefix: tuple[Fraction, ...] = ()
    tail: Fraction = Fraction(0)

    def __post_init__(self):
        prefix = [_fr(x) for x in self.prefix]
        tail = _fr(self.tail)
        while prefix and prefix[-1] == tail:
            prefix.pop()
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "tail", tail)

    @classmethod
    def unit(cls, i: int) -> "EvSeq":
        """The i-th unit vector e_i (1-based)."""
        if i < 1:
            raise ValueError("coordinates are 1-based")
        return cls((0,) * (i - 1) + (1,))

    def __getitem__(self, i: int) -> Fraction:
        """Coordinate ``x_i`` (1-based)."""
        if i < 1:
            raise IndexError("coordinates are 1-based")
        return self.prefix[i - 1] if i <= len(self.prefix) else self.tail

    def coords(self, upto: int) -> list[Fraction]:
        return [self[i] for i in range(1, upto + 1)]

    @property
    def support_bound(self) -> int:
        """Index after which every coordinate equals the tail."""
        return len(self.prefix)

    @property
    def in_c0(self) -> bool:
        return self.tail == 0

    @property
    def finitely_supported(self) -> bool:
        return self.tail == 0

    def _combine(self, other: "EvSeq", op) -> "EvSeq":
        k = max(len(self.prefix), len(other.prefix))
        return EvSeq(tuple(op(self[i], other[i]) for i in range(1, k + 1)), op(self.tail, other.tail))

    def __add__(self, other: "EvSeq") -> "EvSeq":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "EvSeq") -> "EvSeq":
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> "EvSeq":
        return EvSeq(tuple(-x for x in self.prefix), -self.tail)

    def scale(self, c) -> "EvSeq":
        c = _fr(c)
        return EvSeq(tuple(c * x for x in self.prefix), c * self.tail)

    def __rmul__(self, c) -> "EvSeq":
        return self.scale(c)

    def sup_norm(self) -> Fraction:
        return max([abs(x) for x in self.prefix] + [abs(self.tail)])

    def l1_norm(self) -> Fraction:
        if self.tail != 0:
            raise ValueError("not finitely supported")
        return sum((abs(x) for x in self.prefix), Fraction(0))

    def __str__(self) -> str:
        body = ", ".join(fmt(x) for x in self.prefix)
        t = fmt(self.tail)
        return f"({body + ', ' if body else ''}{t}, {t}, ...)"

    def to_json(self) -> dict:
        return {"prefix": [fmt(x) for x in self.prefix], "tail": fmt(self.tail)}


def combination(coeffs: Sequence, seqs: Sequence[EvSeq]) -> EvSeq:
    out = EvSeq()
    for c, s in zip(coeffs, seqs):
        out = out + s.scale(c)
    return out


def pair(ell: EvSeq, x: EvSeq) -> Fraction:
    """The dual pairing ``sum_i ell_i x_i`` for a finitely supported ``ell``."""
    if ell.tail != 0:
        raise ValueError("not finitely supported: the functional must have tail 0")
    return sum((a * x[i] for i, a in enumerate(ell.prefix, start=1)), Fraction(0))


def _oriented(vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale by -1 if needed so the first nonzero entry is positive."""
    first = next((x for x in vec if x != 0), Fraction(0))
    return tuple(-x for x in vec) if first < 0 else tuple(vec)


def _coord_matrix(seqs: Sequence[EvSeq]) -> list[list[Fraction]]:
    """Rows ``(x_1, ..., x_L, tail)``; two eventually constant sequences are
    equal iff these rows are, with L the longest prefix."""
    L = max((s.support_bound for s in seqs), default=0)
    return [s.coords(L) + [s.tail] for s in seqs]


@dataclass(frozen=True)
class SeqSubspace:
    """Span of finitely many eventually constant sequences.

    ``full`` marks the whole ambient space (for instance ``(F_0)_0`` with
    ``F = {0}``), which has no finite basis.
    """

    generators: tuple[EvSeq, ...]
    ambient: str = LINF
    full: bool = False

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if self.ambient not in (LINF, C0, L1):
            raise ValueError(f"unknown ambient space {self.ambient!r}")
        if self.ambient in (C0, L1) and any(g.tail != 0 for g in gens):
            raise ValueError(f"generators of a subspace of {self.ambient} must have tail 0")
        if gens and exact.rank(_coord_matrix(gens)) != len(gens):
            raise ValueError("generators are linearly dependent")

    @property
    def dim(self) -> int | float:
        return float("inf") if self.full else len(self.generators)

    def contains(self, x: EvSeq) -> bool:
        if self.full:
            return True
        if not self.generators:
            return x == EvSeq()
        rows = _coord_matrix(list(self.generators) + [x])
        return exact.rank(rows) == len(self.generators)

    def same_span(self, other: "SeqSubspace") -> bool:
        if self.full or other.full:
            return self.full == other.full
        if not self.generators or not other.generators:
            return len(self.generators) == len(other.generators)
        return exact.same_span(_coord_matrix(self.generators), _coord_matrix(other.generators))


@dataclass(frozen=True)
class CoSubspace:
    """``{x : ell(x) = 0 for every ell in constraints}`` inside ``ambient``.

    Used for the infinite-dimensional subspaces cut out by finitely many
    finitely supported functionals, e.g. ``G = ker(pi_1) & ker(pi_2)``.
    """

    constraints: tuple[EvSeq, ...]
    ambient: str = C0

    def contains(self, x: EvSeq) -> bool:
        if self.ambient == C0 and x.tail != 0:
            return False
        return all(pair(c, x) == 0 for c in self.constraints)


def preannihilator_truncated(f: SeqSubspace, D: int) -> SeqSubspace:
    """Functionals supported in ``[1..D]`` that vanish on every generator of ``F``.

    Requires ``D`` to exceed the longest generator prefix, so the truncation
    sees each generator's tail.
    """
    L = max((g.support_bound for g in f.generators), default=0)
    if D < 1 or D <= L:
        raise ValueError(f"truncation D = {D} must exceed the longest prefix ({L})")
    rows = [g.coords(D) for g in f.generators]
    basis = exact.nullspace(rows, ncols=D)
    return SeqSubspace(tuple(EvSeq(_oriented(b)) for b in basis), L1)


def pre_pre_annihilator_c0(f: SeqSubspace) -> SeqSubspace:
    """``(F_0)_0``: the x in c_0 killed by every finitely supported ell in F_0.

    The infinite constraint family collapses to a finite one. With ``L`` the
    longest prefix among the generators, every ``e_i - e_j`` with ``i, j > L``
    lies in ``F_0``; these force ``x`` to be constant beyond ``L``, hence zero
    there since ``x`` is in c_0. Any finitely supported annihilator can be
    moved onto ``[1..L+1]`` with those differences, so the remaining
    constraints are ``F_0`` truncated at ``L + 1`` applied to
    ``(x_1, ..., x_L, 0)``.
    """
    if f.ambient != LINF:
        raise ValueError("F must be a subspace of l_inf")
    if not f.generators:
        return SeqSubspace((), C0, full=True)
    L = max(g.support_bound for g in f.generators)
    f0 = preannihilator_truncated(f, L + 1)
    rows = [ell.coords(L) for ell in f0.generators]
    if L == 0:
        return SeqSubspace((), C0)
    basis = exact.nullspace(rows, ncols=L) if rows else exact.nullspace([], ncols=L)
    if basis:
        basis, _ = exact.rref(basis)
    return SeqSubspace(tuple(EvSeq(tuple(b)) for b in basis), C0)


def pre_pre_annihilator_bruteforce(f: SeqSubspace, D: int) -> SeqSubspace:
    """Truncated check of :func:`pre_pre_annihilator_c0`.

    Unknowns ``x_1..x_D`` with ``x_i = 0`` beyond ``D``; constraints are the
    annihilators truncated at ``D + 1``.
    """
    f0 = preannihilator_truncated(f, D + 1)
    rows = [ell.coords(D) for ell in f0.generators]
    basis = exact.nullspace(rows, ncols=D) if rows else exact.nullspace([], ncols=D)
    return SeqSubspace(tuple(EvSeq(tuple(b)) for b in basis), C0)


def preannihilator_of_functionals(ells: Iterable[EvSeq]) -> CoSubspace:
    """``{x in c_0 : ell(x) = 0}`` for finitely supported ``ell``."""
    return CoSubspace(tuple(ells), C0)


def annihilator_of_cosubspace(g: CoSubspace) -> SeqSubspace:
    """``G_0`` in l_1 for ``G`` cut out by finitely supported functionals.

    Those functionals are weak-star continuous, so ``G_0`` is exactly their
    span; the returned basis is the reduced row echelon form of that span.
    """
    cons = [c for c in g.constraints]
    if not cons:
        return SeqSubspace((), L1)
    rows = _coord_matrix(cons)
    red, _ = exact.rref(rows)
    return SeqSubspace(tuple(EvSeq(tuple(r[:-1]), r[-1]) for r in red), L1)


def hexagon_norm(x, y) -> Fraction:
    """``max(|x|, |y|, |x + y|)``."""
    x, y = _fr(x), _fr(y)
    return max(abs(x), abs(y), abs(x + y))


def kobos_a(i: int) -> EvSeq:
    """``a(i) = e_1 + e_2 - e_i`` for ``i >= 3``."""
    if i < 3:
        raise ValueError("a(i) is defined for i >= 3")
    return EvSeq.unit(1) + EvSeq.unit(2) - EvSeq.unit(i)


F1 = EvSeq((1, 0), 1)
F2 = EvSeq((0, 1), 1)


@dataclass
class MembershipCertificate:
    """Certificate that ``w`` is not in ``V (+) U`` with ``U`` given by constraints.

    ``functional`` vanishes on ``V`` and on ``U`` (it is a combination of
    ``U``'s constraints with zero pairing against ``V``'s basis) but pairs to
    ``value != 0`` with ``w``.
    """

    w: EvSeq
    functional: EvSeq
    value: Fraction
    combination: list[Fraction]
    forced_coefficients: list[str] = field(default_factory=list)

    def verify(self, v: SeqSubspace, u: CoSubspace) -> bool:
        kills_v = all(pair(self.functional, b) == 0 for b in v.generators)
        # the functional is a combination of U's constraints, so it kills U
        rebuilt = combination(self.combination, u.constraints)
        return kills_v and rebuilt == self.functional and pair(self.functional, self.w) == self.value != 0


def direct_sum_membership(w: EvSeq, v: SeqSubspace, u: CoSubspace) -> tuple[list[Fraction] | None, MembershipCertificate | None]:
    """Decide ``w in V (+) U`` exactly.

    ``w = sum_k alpha_k v_k + u`` with ``u`` in ``U`` iff
    ``C alpha = (ell(w))_ell`` where ``C[ell, k] = ell(v_k)`` for the
    constraints ``ell`` of ``U``. Returns ``(alpha, None)`` or, when the system
    is inconsistent, ``(None, certificate)``.
    """
    cons = list(u.constraints)
    gens = list(v.generators)
    if not cons:
        return [Fraction(0)] * len(gens), None
    rhs = [pair(c, w) for c in cons]
    if gens:
        alpha, y = exact.solve([[pair(c, g) for g in gens] for c in cons], rhs)
    else:
        k = next((i for i, r in enumerate(rhs) if r != 0), None)
        alpha, y = ([], None) if k is None else (None, [Fraction(int(i == k)) / rhs[k] for i in range(len(cons))])
    if alpha is not None:
        return alpha, None
    functional = combination(y, cons)
    return None, MembershipCertificate(w, functional, pair(functional, w), list(y))


def one_dim_lambda(v: EvSeq) -> Fraction:
    """Norm of ``x -> (x_i / v_i) v`` with ``|v_i| = ||v||_inf``.

    That norm is ``||v||_inf / |v_i| = 1``, and every projection constant is
    at least 1, so a line in c_0 has projection constant exactly 1.
    """
    if v.tail != 0 or not v.prefix:
        raise ValueError("expected a nonzero element of c_0")
    top = v.sup_norm()
    i = next(k for k in range(1, len(v.prefix) + 1) if abs(v[k]) == top)
    return EvSeq.unit(i).l1_norm() * top / abs(v[i])


@dataclass
class KobosReport:
    f: SeqSubspace
    g: CoSubspace
    f_direct_sum_g: bool
    f0_truncated: SeqSubspace
    truncation: int
    f0_contains_a: bool
    v: SeqSubspace
    g0: SeqSubspace
    u: CoSubspace
    witness: EvSeq
    certificate: MembershipCertificate
    certificate_valid: bool
    decomposition_note: str
    lambda_v: Fraction
    lambda_f: float
    lambda_f_dual_bound: float
    isometry_checked: int

    @property
    def dim_v(self) -> int:
        return len(self.v.generators)

    @property
    def passed(self) -> bool:
        return (
            self.f_direct_sum_g
            and self.f0_contains_a
            and self.dim_v == 1
            and self.v.same_span(SeqSubspace((EvSeq((1, -1)),), C0))
            and self.g0.same_span(SeqSubspace((EvSeq.unit(1), EvSeq.unit(2)), L1))
            and self.certificate_valid
            and self.lambda_v == 1
            and self.lambda_f > 1
        )

    def to_dict(self) -> dict:
        return {
            "F": [g.to_json() for g in self.f.generators],
            "G_constraints": [c.to_json() for c in self.g.constraints],
            "linf_is_F_plus_G": self.f_direct_sum_g,
            "truncation": self.truncation,
            "F0_truncated_basis": [x.to_json() for x in self.f0_truncated.generators],
            "F0_truncated_dim": len(self.f0_truncated.generators),
            "F0_contains_a_i": self.f0_contains_a,
            "dim_V": self.dim_v,
            "V_basis": [x.to_json() for x in self.v.generators],
            "G0_basis": [x.to_json() for x in self.g0.generators],
            "U_constraints": [c.to_json() for c in self.u.constraints],
            "witness": self.witness.to_json(),
            "witness_in_V_plus_U": False,
            "certificate": {
                "functional": self.certificate.functional.to_json(),
                "combination_of_U_constraints": [fmt(x) for x in self.certificate.combination],
                "pairing_with_witness": fmt(self.certificate.value),
                "kills_V_and_U": self.certificate_valid,
                "note": self.decomposition_note,
            },
            "lambda_V_c0": fmt(self.lambda_v),
            "lambda_F": {"value": self.lambda_f, "dual_bound": self.lambda_f_dual_bound, "tol": 1e-6},
            "lambda_F_exceeds_lambda_V": self.lambda_f > 1,
            "isometry_pairs_checked": self.isometry_checked,
            "tol": 0,
            "passed": self.passed,
        }


def _isometry_samples(count: int) -> list[tuple[Fraction, Fraction]]:
    # deterministic small rationals; no RNG so the report is reproducible
    out = []
    k = 0
    while len(out) < count:
        k += 1
        x = Fraction((k * 37) % 23 - 11, (k * 13) % 7 + 1)
        y = Fraction((k * 53) % 19 - 9, (k * 29) % 5 + 1)
        out.append((x, y))
    return out


def kobos_report(truncation: int = 6) -> KobosReport:
    """Reproduce the counterexample exactly and evaluate both projection constants."""
    f = SeqSubspace((F1, F2), LINF)
    g = CoSubspace((EvSeq.unit(1), EvSeq.unit(2)), LINF)
    # l_inf = F (+) G: coordinates 1 and 2 of x f1 + y f2 are (x, y)
    f_direct = exact.rank([[F1[1], F2[1]], [F1[2], F2[2]]]) == 2

    f0 = preannihilator_truncated(f, truncation)
    a_family = [kobos_a(i) for i in range(3, truncation + 1)]
    f0_has_a = all(pair(a, F1) == 0 and pair(a, F2) == 0 for a in a_family) and \
        SeqSubspace(tuple(a_family), L1).same_span(f0)

    v = pre_pre_annihilator_c0(f)
    g0 = annihilator_of_cosubspace(g)
    u = preannihilator_of_functionals(g0.generators)
    witness = EvSeq.unit(1)
    alpha, cert = direct_sum_membership(witness, v, u)
    if cert is None:
        raise AssertionError("witness unexpectedly lies in V (+) U")
    vb = v.generators[0]
    a = witness[1] / vb[1]
    note = (
        f"w = alpha*{vb} + u with u_1 = u_2 = 0: coordinate 1 forces alpha = {fmt(a)}, "
        f"then coordinate 2 reads {fmt(a * vb[2])} but w_2 = {fmt(witness[2])}"
    )

    lam_v = one_dim_lambda(vb)
    hexagon = SubspaceLinf(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    lam = relative_projection_constant(hexagon)

    samples = _isometry_samples(100)
    for x, y in samples:
        if (x * F1 + y * F2).sup_norm() != hexagon_norm(x, y):
            raise AssertionError(f"isometry fails at ({x}, {y})")

    return KobosReport(
        f=f, g=g, f_direct_sum_g=f_direct, f0_truncated=f0, truncation=truncation,
        f0_contains_a=f0_has_a, v=v, g0=g0, u=u, witness=witness, certificate=cert,
        certificate_valid=cert.verify(v, u), decomposition_note=note,
        lambda_v=lam_v, lambda_f=lam.value, lambda_f_dual_bound=lam.dual_bound,
        isometry_checked=len(samples),
    )
