import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matreg.poly import Polynomial, monomials_of_degree, product_embed, reduce_mod_sphere

coef = st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3)


@st.composite
def polys(draw, n_vars=3, max_degree=3):
    terms = {}
    for d in range(max_degree + 1):
        for e in monomials_of_degree(n_vars, d):
            if draw(st.booleans()):
                terms[e] = draw(coef)
    return Polynomial(n_vars, terms)


@pytest.mark.parametrize("n_vars,degree,count", [(1, 4, 1), (3, 0, 1), (3, 2, 6), (3, 3, 10), (5, 2, 15), (6, 3, 56)])
def test_monomial_count(n_vars, degree, count):
    exps = monomials_of_degree(n_vars, degree)
    assert len(exps) == count == len(set(exps))
    assert all(sum(e) == degree for e in exps)


def test_monomial_order_starts_with_first_variable():
    assert monomials_of_degree(3, 2)[0] == (2, 0, 0)
    assert monomials_of_degree(3, 2)[-1] == (0, 0, 2)


def test_construction_validation():
    with pytest.raises(ValueError):
        Polynomial(0)
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Polynomial(2, {(1, -1): 1.0})
    with pytest.raises(ValueError):
        Polynomial(2) + Polynomial(3)


def test_basic_arithmetic():
    x = Polynomial.coordinate(3, 0)
    y = Polynomial.coordinate(3, 1)
    p = (x + y) ** 2
    assert p.terms == {(2, 0, 0): 1.0, (1, 1, 0): 2.0, (0, 2, 0): 1.0}
    assert (p - p).is_zero()
    assert p.degree == 2 and p.is_homogeneous(2)
    assert not (p + 1.0).is_homogeneous()
    assert (2.0 - x).terms == {(0, 0, 0): 2.0, (1, 0, 0): -1.0}
    assert (p / 2).max_abs_coefficient() == 1.0


@settings(max_examples=50, deadline=None)
@given(polys(), polys(), st.integers(0, 2**31 - 1))
def test_evaluation_is_a_ring_homomorphism(p, q, seed):
    pts = np.random.default_rng(seed).normal(size=(3, 7))
    assert np.allclose((p * q)(pts), p(pts) * q(pts))
    assert np.allclose((p + q)(pts), p(pts) + q(pts))


@settings(max_examples=50, deadline=None)
@given(polys(), polys())
def test_leibniz_rule(p, q):
    for i in range(3):
        assert ((p * q).derivative(i)).close_to(p.derivative(i) * q + p * q.derivative(i), 1e-9)


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=4), st.integers(0, 2**31 - 1))
def test_sphere_reduction_preserves_values_on_sphere(p, seed):
    pts = np.random.default_rng(seed).normal(size=(3, 5))
    pts /= np.linalg.norm(pts, axis=0)
    r = reduce_mod_sphere(p)
    assert np.allclose(r(pts), p(pts), atol=1e-9)
    assert all(e[0] <= 1 for e in r.terms)


def test_sphere_relation_reduces_to_zero():
    x = [Polynomial.coordinate(3, i) for i in range(3)]
    assert reduce_mod_sphere(x[0] ** 2 + x[1] ** 2 + x[2] ** 2 - 1.0).is_zero()
    y = [Polynomial.coordinate(6, i) for i in range(6)]
    rel = (y[3] ** 2 + y[4] ** 2 + y[5] ** 2 - 1.0) * y[0]
    assert reduce_mod_sphere(rel, ((0, 3), (3, 6))).is_zero()


def test_product_embed_and_json_roundtrip():
    p = Polynomial(3, {(1, 0, 2): 0.5, (0, 0, 0): -1.0})
    e = product_embed(p, 3, 6)
    assert e.terms == {(0, 0, 0, 1, 0, 2): 0.5, (0, 0, 0, 0, 0, 0): -1.0}
    assert Polynomial.from_json(6, e.to_json()) == e
    assert hash(Polynomial.from_json(6, e.to_json())) == hash(e)
