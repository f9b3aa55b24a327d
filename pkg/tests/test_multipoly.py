from gmpy2 import mpc, mpfr
from hypothesis import given, strategies as st

from tracespec import MultiPoly

coef = st.integers(-9, 9)
terms2 = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=6)
point = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


def test_constructors():
    one = MultiPoly.constant(2, 1)
    x = MultiPoly.variable(0, 2)
    assert one(mpfr(3), mpfr(4)) == 1
    assert x(mpfr(3), mpfr(4)) == 3
    assert MultiPoly(2, {(1, 0): 0}).is_zero()
    assert (x * x + one).degree() == 2


@given(terms2, terms2, point)
def test_ring_operations_pointwise(t1, t2, pt):
    p, q = MultiPoly(2, t1), MultiPoly(2, t2)
    x, y = (mpfr(v) for v in pt)
    assert (p + q)(x, y) == p(x, y) + q(x, y)
    assert (p - q)(x, y) == p(x, y) - q(x, y)
    assert (p * q)(x, y) == p(x, y) * q(x, y)
    assert (p**2)(x, y) == p(x, y) ** 2


@given(terms2)
def test_dense_roundtrip(t):
    p = MultiPoly(2, t)
    assert MultiPoly.from_dense2(p.to_dense2()) == p


@given(terms2, point)
def test_swap_and_conj(t, pt):
    p = MultiPoly(2, {k: mpc(v, v + 1) for k, v in t.items()})
    x, y = (mpfr(v) for v in pt)
    assert p.swap2()(x, y) == p(y, x)
    if not p.is_zero():
        assert p.conj()(x, y) == mpc(p(x, y)).conjugate()


def test_embed():
    p = MultiPoly(2, {(1, 1): 2, (0, 1): 1})
    q = p.embed(3, (2, 0))
    # q(r0, r1, r2) = p(r2, r0)
    assert q(mpfr(5), mpfr(7), mpfr(3)) == p(mpfr(3), mpfr(5))
