import itertools
import random
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, strategies as st

from helpers import random_points, rel_err, tol
from tracespec import (
    FactorKernel,
    GaussianIntegrand,
    GaussianKernel,
    MultiPoly,
    PolyGaussianKernel,
    compose,
    eval_kernel,
    integrate,
    l2_norm_sq,
    to_factor,
    trace,
)
from tracespec.errors import DegreeCap, Divergent, SingularForm
from tracespec.moments import gaussian_moment, polygauss_moment_wick
from tracespec.normbound import decompose_gaussian


def _mp(x):
    if isinstance(x, mpc):
        return mpmath.mpc(str(x.real), str(x.imag))
    return mpmath.mpf(str(x))


def _integrand1(M, poly, F=0):
    return GaussianIntegrand(M=((M,),), v=(mpfr(0),), F=mpfr(F), poly=poly)


def test_standard_integrals():
    one = MultiPoly.constant(1, 1)
    x2 = MultiPoly(1, {(2,): 1})
    sqrt_pi = gmpy2.sqrt(gmpy2.const_pi())
    assert rel_err(integrate(_integrand1(mpfr(1), one)), sqrt_pi) < tol(4)
    assert rel_err(integrate(_integrand1(mpfr(1), x2)), sqrt_pi / 2) < tol(4)


def test_complex_one_dimensional_against_quadrature():
    mpmath.mp.dps = 40
    a, v = mpc(mpfr(2), mpfr(1)), mpc(mpfr("0.5"), mpfr("-0.25"))
    poly = MultiPoly(1, {(3,): 1, (1,): -2, (0,): 1})
    ours = integrate(GaussianIntegrand(M=((a,),), v=(v,), F=mpfr(0), poly=poly))
    A, V = _mp(a), _mp(v)
    ref = mpmath.quad(lambda x: (x**3 - 2 * x + 1) * mpmath.exp(-A * x * x - V * x), [-mpmath.inf, 0, mpmath.inf])
    assert abs(_mp(ours) - ref) < mpmath.mpf("1e-30") * abs(ref)


@pytest.mark.parametrize("A, C, expected", [(1, 4, 2), (1, 1, 1)])
def test_hilbert_schmidt_norm_against_quadrature(A, C, expected):
    k = GaussianKernel(A=A, C=C)
    ours = l2_norm_sq(k)
    assert rel_err(ours, mpfr(expected)) < tol(16)

    # independent direct 2-D quadrature of |K|^2 from its defining formula
    mpmath.mp.dps = 30
    a, c = mpmath.mpf(A), mpmath.mpf(C)
    n0 = 2 * mpmath.sqrt(c / mpmath.pi)
    lim = [-mpmath.inf, 0, mpmath.inf]
    ref = mpmath.quad(lambda x, y: n0**2 * mpmath.exp(-2 * a * (x - y) ** 2 - 2 * c * (x + y) ** 2), lim, lim)
    assert abs(_mp(ours) - ref) < mpmath.mpf("1e-20") * ref


coef = st.integers(-5, 5)
poly2 = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=5)


@given(poly2, poly2, coef, coef)
def test_integrate_linear_in_poly(t1, t2, s1, s2):
    M = ((mpfr(2), mpfr("0.5")), (mpfr("0.5"), mpfr(1)))
    v = (mpfr("0.25"), mpfr(-1))
    p, q = MultiPoly(2, t1), MultiPoly(2, t2)
    lhs = integrate(GaussianIntegrand(M=M, v=v, F=mpfr(0), poly=p * s1 + q * s2))
    rhs = s1 * integrate(GaussianIntegrand(M=M, v=v, F=mpfr(0), poly=p)) + s2 * integrate(
        GaussianIntegrand(M=M, v=v, F=mpfr(0), poly=q)
    )
    scale = max(abs(lhs), abs(rhs), mpfr(1))
    assert abs(lhs - rhs) <= tol(16) * scale


def _hermite_rule(npts):
    """High-precision Gauss-Hermite rule from the roots of H_npts."""
    H = mpmath.hermite
    nodes = sorted(mpmath.polyroots([c for c in _hermite_coeffs(npts)], maxsteps=200, extraprec=200))
    w = [
        2 ** (npts - 1) * mpmath.factorial(npts) * mpmath.sqrt(mpmath.pi) / (npts**2 * H(npts - 1, x) ** 2)
        for x in nodes
    ]
    return nodes, w


def _hermite_coeffs(n):
    # physicists' Hermite polynomial, highest degree first
    h0, h1 = [1], [2, 0]
    if n == 0:
        return h0
    for k in range(1, n):
        nxt = [2 * c for c in h1] + [0]
        for i, c in enumerate(h0):
            nxt[i + 2] -= 2 * k * c
        h0, h1 = h1, nxt
    return h1


def _gh_oracle(M, v, exps):
    """Tensor Gauss-Hermite evaluation after completing the square, in mpmath."""
    n = len(v)
    Mm = mpmath.matrix([[mpmath.mpf(str(Fraction(x))) for x in row] for row in M])
    vm = mpmath.matrix([mpmath.mpf(str(Fraction(x))) for x in v])
    Minv = Mm**-1
    mu = -(Minv * vm) / 2
    const = mpmath.exp((vm.T * Minv * vm)[0] / 4)
    L = mpmath.cholesky(Mm)
    LinvT = (L**-1).T
    nodes, w = _hermite_rule(4)
    total = mpmath.mpf(0)
    for idx in itertools.product(range(4), repeat=n):
        t = mpmath.matrix([nodes[i] for i in idx])
        r = mu + LinvT * t
        val = mpmath.mpf(1)
        for j in range(n):
            val *= r[j] ** exps[j]
        wt = mpmath.mpf(1)
        for i in idx:
            wt *= w[i]
        total += wt * val
    return const * total / mpmath.det(L)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("seed", [0, 1])
def test_isserlis_against_quadrature(n, seed):
    mpmath.mp.dps = 50
    rng = random.Random(100 * n + seed)
    Q = [[Fraction(rng.randint(-4, 4), 4) for _ in range(n)] for _ in range(n)]
    M = [[sum(Q[k][i] * Q[k][j] for k in range(n)) + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    v = [Fraction(rng.randint(-4, 4), 4) for _ in range(n)]
    for _ in range(3):
        deg = rng.randint(0, 6)
        exps = [0] * n
        for _ in range(deg):
            exps[rng.randrange(n)] += 1
        exps = tuple(exps)
        ours = integrate(
            GaussianIntegrand(
                M=tuple(tuple(mpfr(gmpy2.mpq(x.numerator, x.denominator)) for x in row) for row in M),
                v=tuple(mpfr(gmpy2.mpq(x.numerator, x.denominator)) for x in v),
                F=mpfr(0),
                poly=MultiPoly(n, {exps: 1}),
            )
        )
        ref = _gh_oracle(M, v, exps)
        assert abs(_mp(ours) - ref) <= mpmath.mpf("1e-15") * max(abs(ref), mpmath.mpf("1e-30"))


def test_engine_errors():
    one = MultiPoly.constant(1, 1)
    with pytest.raises(Divergent):
        integrate(_integrand1(mpfr(-1), one))
    with pytest.raises(DegreeCap):
        integrate(_integrand1(mpfr(1), MultiPoly(1, {(65,): 1})))
    with pytest.raises(SingularForm):
        M = ((mpfr(1), mpfr(1)), (mpfr(1), mpfr(1) + mpfr(2) ** -200))
        integrate(GaussianIntegrand(M=M, v=(mpfr(0), mpfr(0)), F=mpfr(0), poly=MultiPoly.constant(2, 1)))


def test_compose_of_gaussian_has_trace_m2(gauss14):
    k2 = compose(gauss14, gauss14)
    assert rel_err(trace(k2), mpfr(2)) < tol(16)


def test_compose_against_quadrature(cp5_kernel):
    mpmath.mp.dps = 30
    k = cp5_kernel
    kk = compose(k, k)
    for x, y in random_points(3, seed=5, spread=1.0):
        ref = mpmath.quad(
            lambda z: _mp(eval_kernel(k, x, mpfr(str(z)))) * _mp(eval_kernel(k, mpfr(str(z)), y)),
            [-mpmath.inf, 0, mpmath.inf],
        )
        assert abs(_mp(eval_kernel(kk, x, y)) - ref) < mpmath.mpf("1e-25") * max(abs(ref), 1)


pos = st.fractions(Fraction(1, 2), 4)
small = st.fractions(-1, 1)


@st.composite
def kernels(draw):
    g = GaussianKernel(A=draw(pos), C=draw(pos), B=draw(small), D=draw(small), E=draw(small))
    if draw(st.booleans()):
        return g
    return PolyGaussianKernel(gauss=g, A_P=draw(small), B_P=draw(small), C_P=draw(small),
                              D_P=draw(small), E_P=draw(small), F_P=4)


@given(kernels(), kernels(), kernels())
def test_compose_associative(k1, k2, k3):
    left = compose(compose(k1, k2), k3)
    right = compose(k1, compose(k2, k3))
    for x, y in random_points(4, seed=9, spread=1.0):
        a, b = eval_kernel(left, x, y), eval_kernel(right, x, y)
        assert abs(a - b) <= tol(40) * max(abs(a), abs(b), mpfr("1e-30"))


@given(kernels())
def test_trace_of_square_is_second_moment(k):
    m2 = trace(compose(k, k))
    m2 = m2.real if isinstance(m2, mpc) else m2
    if isinstance(k, GaussianKernel):
        ref = gaussian_moment(k, 2)
    else:
        ref = polygauss_moment_wick(k, 2)
    assert rel_err(m2, ref) < tol(40)
    # the Hilbert-Schmidt norm of a self-adjoint kernel is the same number
    assert rel_err(l2_norm_sq(k), ref) < tol(40)


def test_decomposition_reproduces_kernel(gauss14):
    d = decompose_gaussian(gauss14, mpfr("0.5"))
    kk = compose(d.k1, d.k2)
    for x, y in random_points(25, seed=1):
        a, b = eval_kernel(kk, x, y), eval_kernel(gauss14, x, y)
        assert abs(a - b) <= tol(32) * abs(b)


def test_factor_norms_closed_form(gauss14):
    A, C, w = mpfr(1), mpfr(4), mpfr("0.5")
    d = decompose_gaussian(gauss14, w, check=False)
    pi = gmpy2.const_pi()
    first = C * (w * w - A * C) ** 2 / (pi * gmpy2.sqrt(A * C) * w * (A - w) * (C - w))
    assert rel_err(l2_norm_sq(d.k1), first) < tol(16)
    assert rel_err(l2_norm_sq(d.k2), pi / 8) < tol(16)


def test_nonself_adjoint_factor_kernel_trace():
    # K(x, y) = x exp(-x^2 - y^2): trace int x exp(-2x^2) dx = 0
    f = FactorKernel(A=1, B=1, C=0, D=0, E=0, poly=MultiPoly(2, {(1, 0): 1}))
    assert abs(trace(f)) < tol(8)
    assert to_factor(f) is f
