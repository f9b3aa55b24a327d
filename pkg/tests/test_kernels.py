from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, strategies as st

from helpers import random_points, rel_err, tol
from tracespec import (
    GaussianKernel,
    PolyGaussianKernel,
    ValidationError,
    eval_kernel,
    to_factor,
    trace,
    validate,
)
from tracespec.normbound import decompose_gaussian

pos = st.fractions(Fraction(1, 4), 6).filter(lambda v: v > 0)
real = st.fractions(-2, 2)


@st.composite
def gaussians(draw, complex_ok=True):
    A, C = draw(pos), draw(pos)
    if complex_ok:
        B, D, E = draw(real), draw(real), draw(real)
    else:
        B = D = E = 0
    return GaussianKernel(A=A, C=C, B=B, D=D, E=E)


@st.composite
def polygaussians(draw):
    g = draw(gaussians())
    ps = {name: draw(real) for name in ("A_P", "B_P", "C_P", "D_P", "E_P")}
    k = PolyGaussianKernel(gauss=g, F_P=1, **ps)
    if k.derived_n() == 0:
        k = PolyGaussianKernel(gauss=g, F_P=2, **ps)
    return k


def _mp_kernel(k, x, y):
    """Direct evaluation from the defining formula with mpmath."""
    mpmath.mp.prec = 256
    if isinstance(k, PolyGaussianKernel):
        g = k.gauss
    else:
        g = k
    A, B, C, D, E = (mpmath.mpf(str(Fraction(v))) for v in (g.A, g.B, g.C, g.D, g.E))
    x, y = mpmath.mpf(str(x)), mpmath.mpf(str(y))
    n0 = 2 * mpmath.sqrt(C / mpmath.pi) * mpmath.exp(-E**2 / (4 * C))
    val = n0 * mpmath.exp(
        -A * (x - y) ** 2 - 1j * B * (x**2 - y**2) - C * (x + y) ** 2 - 1j * D * (x - y) - E * (x + y)
    )
    if isinstance(k, PolyGaussianKernel):
        AP, BP, CP, DP, EP, FP = (mpmath.mpf(str(Fraction(v))) for v in (k.A_P, k.B_P, k.C_P, k.D_P, k.E_P, k.F_P))
        N = FP + (CP - EP * E) / (2 * C) + CP * E**2 / (4 * C**2)
        P = AP * (x - y) ** 2 + 1j * BP * (x**2 - y**2) + CP * (x + y) ** 2 + 1j * DP * (x - y) + EP * (x + y) + FP
        val = val * P / N
    return val


def _close(ours, ref, rtol):
    if isinstance(ours, mpc):
        ours = mpmath.mpc(str(ours.real), str(ours.imag))
    else:
        ours = mpmath.mpf(str(ours))
    return abs(ours - ref) <= rtol * max(abs(ref), mpmath.mpf("1e-300"))


def test_gaussian_at_origin(gauss14):
    assert eval_kernel(gauss14, 0, 0) == 2 * gmpy2.sqrt(4 / gmpy2.const_pi())


def test_polygauss_at_origin(cp5_kernel):
    n0 = 2 * gmpy2.sqrt(1 / gmpy2.const_pi())
    assert cp5_kernel.derived_n() == mpfr("3.5")
    assert rel_err(eval_kernel(cp5_kernel, 0, 0), n0 / mpfr("3.5")) < tol(4)


def test_traces(gauss14, cp5_kernel):
    assert rel_err(trace(gauss14), mpfr(1)) < tol(16)
    assert rel_err(trace(cp5_kernel), mpfr(1)) < tol(16)
    raw = PolyGaussianKernel(gauss=cp5_kernel.gauss, A_P=-1, C_P=5, F_P=1, normalized=False)
    assert rel_err(trace(raw), mpfr("3.5")) < tol(16)


def test_trace_against_quadrature(cp5_kernel):
    mpmath.mp.prec = 200
    ref = mpmath.quad(lambda x: _mp_kernel(cp5_kernel, x, x).real, [-mpmath.inf, 0, mpmath.inf])
    assert abs(trace(cp5_kernel) - 1) < tol(16)
    assert abs(ref - 1) < mpmath.mpf("1e-40")


@given(polygaussians())
def test_matches_defining_formula(k):
    for x, y in random_points(5, seed=11):
        assert _close(eval_kernel(k, x, y), _mp_kernel(k, x, y), mpmath.mpf("1e-60"))


@given(st.one_of(gaussians(), polygaussians()))
def test_self_adjoint(k):
    for x, y in random_points(100, seed=3):
        kxy = eval_kernel(k, x, y)
        kyx = eval_kernel(k, y, x)
        conj = kyx.conjugate() if isinstance(kyx, mpc) else kyx
        assert abs(kxy - conj) <= tol(8) * max(abs(kxy), mpfr("1e-300"))


@given(st.one_of(gaussians(), polygaussians()))
def test_normalized_trace_is_one(k):
    assert abs(trace(k) - 1) <= tol(16)


def test_factor_trace_agrees_with_closed_form():
    k = PolyGaussianKernel(gauss=GaussianKernel(A=2, C=Fraction(1, 2), B=1, D=Fraction(-1, 3), E=Fraction(1, 5)),
                           A_P=1, B_P=Fraction(1, 2), C_P=3, D_P=-1, E_P=2, F_P=1)
    assert abs(trace(to_factor(k)) - 1) <= tol(16)


def test_validate_examples():
    assert validate(GaussianKernel(A=-1, C=1)) == ["A > 0"]
    assert validate(GaussianKernel(A=1, C=4)) == []
    d = decompose_gaussian(GaussianKernel(A=1, C=4), mpfr("0.5"), check=False)
    assert validate(d.k1) == [] and validate(d.k2) == []
    zero_n = PolyGaussianKernel(gauss=GaussianKernel(A=1, C=2), C_P=2, F_P=Fraction(-1, 2))
    assert zero_n.derived_n() == 0
    assert validate(zero_n) == ["N != 0"]


def test_stored_scale_checked():
    GaussianKernel(A=1, C=4, N0=2 * gmpy2.sqrt(4 / gmpy2.const_pi()))
    with pytest.raises(ValidationError):
        GaussianKernel(A=1, C=4, N0="2.25")
    with pytest.raises(ValidationError):
        PolyGaussianKernel(gauss=GaussianKernel(A=Fraction(3, 2), C=1), A_P=-1, C_P=5, F_P=1, N=4)
    PolyGaussianKernel(gauss=GaussianKernel(A=Fraction(3, 2), C=1), A_P=-1, C_P=5, F_P=1, N="3.5")
