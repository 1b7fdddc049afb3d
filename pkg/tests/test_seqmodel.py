import json
import time
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from maxproj import seqmodel
from maxproj.seqmodel import C0, F1, F2, L1, LINF, EvSeq, SeqSubspace, kobos_a, pair

small = st.integers(-3, 3).map(Fraction)


def evseq(max_len=4):
    return st.builds(lambda p, t: EvSeq(tuple(p), t), st.lists(small, max_size=max_len), small)


def test_canonical_form():
    assert EvSeq((1, 0, 1, 1), 1) == EvSeq((1, 0), 1)
    assert EvSeq((0, 0), 0) == EvSeq()
    assert F1.coords(5) == [1, 0, 1, 1, 1]
    assert F1.support_bound == 2
    assert EvSeq((1, 2)).in_c0 and not F1.in_c0


def test_pair_examples():
    assert pair(kobos_a(3), F1) == 0
    assert pair(EvSeq.unit(1), F1) == 1
    assert pair(kobos_a(4), F2) == 0
    with pytest.raises(ValueError):
        pair(F1, F2)


@given(evseq(), evseq(), small)
def test_arithmetic_matches_coordinates(x, y, c):
    n = 8
    assert (x + y).coords(n) == [a + b for a, b in zip(x.coords(n), y.coords(n))]
    assert (c * x).coords(n) == [c * a for a in x.coords(n)]
    assert x.sup_norm() == max(abs(v) for v in x.coords(n))


def test_json_is_exact_strings():
    js = EvSeq((Fraction(1, 3), -1), Fraction(2, 5)).to_json()
    assert json.loads(json.dumps(js)) == {"prefix": ["1/3", "-1"], "tail": "2/5"}


def test_preannihilator_examples():
    f = SeqSubspace((F1, F2), LINF)
    t5 = seqmodel.preannihilator_truncated(f, 5)
    assert t5.dim == 3
    for i in (3, 4, 5):
        assert t5.contains(kobos_a(i))
    assert seqmodel.preannihilator_truncated(SeqSubspace((), LINF), 3).dim == 3
    ones = SeqSubspace((EvSeq((), 1),), LINF)
    t4 = seqmodel.preannihilator_truncated(ones, 4)
    assert t4.dim == 3
    assert all(sum(g.coords(4)) == 0 for g in t4.generators)
    with pytest.raises(ValueError):
        seqmodel.preannihilator_truncated(SeqSubspace((EvSeq((1, 2, 3)),), LINF), 3)


def random_family(draw_lists):
    gens = []
    for prefix, tail in draw_lists:
        g = EvSeq(tuple(Fraction(x) for x in prefix), Fraction(tail))
        if g != EvSeq() and (not gens or seqmodel.exact.rank(seqmodel._coord_matrix(gens + [g])) == len(gens) + 1):
            gens.append(g)
    return SeqSubspace(tuple(gens), LINF)


family = st.lists(st.tuples(st.lists(st.integers(-2, 2), max_size=4), st.integers(-2, 2)), min_size=0, max_size=3)


@given(family, st.integers(5, 12))
def test_truncated_dimension_matches_sympy(raw, D):
    f = random_family(raw)
    t = seqmodel.preannihilator_truncated(f, D)
    rows = [[int(c) if c.denominator == 1 else sympy.Rational(c.numerator, c.denominator) for c in g.coords(D)]
            for g in f.generators]
    oracle = D - (sympy.Matrix(rows).rank() if rows else 0)
    assert t.dim == oracle
    for ell in t.generators:
        assert all(pair(ell, g) == 0 for g in f.generators)


@given(family, st.integers(5, 11))
def test_truncations_nest(raw, D):
    f = random_family(raw)
    small_basis = seqmodel.preannihilator_truncated(f, D)
    big = seqmodel.preannihilator_truncated(f, D + 1)
    assert all(big.contains(ell) for ell in small_basis.generators)


@given(family, st.integers(5, 12))
def test_schema_matches_truncated_bruteforce(raw, D):
    f = random_family(raw)
    if not f.generators:
        assert seqmodel.pre_pre_annihilator_c0(f).full
        return
    schema = seqmodel.pre_pre_annihilator_c0(f)
    brute = seqmodel.pre_pre_annihilator_bruteforce(f, D)
    assert schema.same_span(brute) or (not schema.generators and not brute.generators)


def test_pre_pre_examples():
    v = seqmodel.pre_pre_annihilator_c0(SeqSubspace((F1, F2), LINF))
    assert v.dim == 1 and v.generators[0] == EvSeq((1, -1))
    assert seqmodel.pre_pre_annihilator_c0(SeqSubspace((), LINF)).full
    e1 = seqmodel.pre_pre_annihilator_c0(SeqSubspace((EvSeq.unit(1),), LINF))
    assert e1.same_span(SeqSubspace((EvSeq.unit(1),), C0))


def test_preannihilator_of_functionals():
    u = seqmodel.preannihilator_of_functionals([EvSeq.unit(1)])
    assert u.contains(EvSeq((0, 5)))
    assert not u.contains(EvSeq((1,)))
    assert not u.contains(EvSeq((0,), 1))  # not in c_0


def test_hexagon_norm_examples():
    assert seqmodel.hexagon_norm(1, 0) == 1
    assert seqmodel.hexagon_norm(1, 1) == 2
    assert seqmodel.hexagon_norm(1, -1) == 1


@given(small, small)
def test_isometric_embedding(x, y):
    assert (x * F1 + y * F2).sup_norm() == seqmodel.hexagon_norm(x, y)


def test_membership_certificate():
    v = SeqSubspace((EvSeq((1, -1)),), C0)
    u = seqmodel.preannihilator_of_functionals([EvSeq.unit(1), EvSeq.unit(2)])
    alpha, cert = seqmodel.direct_sum_membership(EvSeq.unit(1), v, u)
    assert alpha is None and cert.verify(v, u)
    assert pair(cert.functional, EvSeq.unit(1)) == cert.value != 0
    # (1, -1, 5, 0, ...) is in V (+) U
    alpha, cert = seqmodel.direct_sum_membership(EvSeq((1, -1, 5)), v, u)
    assert alpha == [1] and cert is None


def test_one_dim_lambda():
    assert seqmodel.one_dim_lambda(EvSeq((1, -1))) == 1
    assert seqmodel.one_dim_lambda(EvSeq((Fraction(1, 2), 3, -3))) == 1


def test_kobos_report():
    t = time.perf_counter()
    rep = seqmodel.kobos_report()
    elapsed = time.perf_counter() - t
    assert rep.passed
    assert rep.dim_v == 1
    assert rep.v.generators[0] == EvSeq((1, -1))
    assert rep.g0.same_span(SeqSubspace((EvSeq.unit(1), EvSeq.unit(2)), L1))
    assert rep.certificate_valid
    assert rep.lambda_v == 1
    assert rep.lambda_f == pytest.approx(4 / 3, abs=1e-6)
    d = rep.to_dict()
    assert d["V_basis"] == [{"prefix": ["1", "-1"], "tail": "0"}]
    assert json.dumps(d)  # serializable
    assert elapsed < 1.0
