import os
import random
import subprocess
import sys
from fractions import Fraction

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr

from helpers import rel_err, tol
from tracespec import (
    FactorKernel,
    GaussianKernel,
    NonHermitianResidual,
    UniPoly,
    exact_gaussian_spectrum,
    gauss_hermite,
    gaussian_moment,
    nystrom_spectrum,
    oracle_quantities,
    real_roots,
)
from tracespec._accel import HAVE_NUMBA, jacobi_float
from tracespec.oracle import gauss_hermite_scaled, jacobi_eigenvalues
from tracespec.presets import polygauss_family

GAUSS14_EXACT = [
    "1.333333333", "-0.4444444444", "0.1481481481", "-0.04938271605", "0.01646090535",
    "-0.00548696845", "0.001828989483", "-0.00060966316", "0.00020322", "-0.00006774",
]


def test_gauss_hermite_small():
    t, w = gauss_hermite(1, exact=True)
    assert t == [0] and rel_err(w[0], gmpy2.sqrt(gmpy2.const_pi())) < tol(8)
    t, w = gauss_hermite(2, exact=True)
    h = 1 / gmpy2.sqrt(mpfr(2))
    assert rel_err(t[1], h) < tol(8) and t[0] == -t[1]
    for wi in w:
        assert rel_err(wi, gmpy2.sqrt(gmpy2.const_pi()) / 2) < tol(8)


def test_gauss_hermite_40_self_test():
    t, ws = gauss_hermite_scaled(40, exact=True)
    # integrate exp(-x^2) with the scaled weights
    total = sum(w * gmpy2.exp(-x * x) for x, w in zip(t, ws))
    assert abs(total - gmpy2.sqrt(gmpy2.const_pi())) < mpfr("1e-25")
    # exact for polynomials up to degree 79: int x^10 exp(-x^2) = Gamma(11/2)
    m10 = sum(w * gmpy2.exp(-x * x) * x**10 for x, w in zip(t, ws))
    assert rel_err(m10, gmpy2.gamma(mpfr(11) / 2)) < mpfr("1e-60")


def test_gauss_hermite_float_matches_numpy():
    t, w = gauss_hermite(60)
    tn, wn = np.polynomial.hermite.hermgauss(60)
    assert np.max(np.abs(t - tn)) < 1e-12
    assert np.max(np.abs(w - wn) / wn) < 1e-10


def test_exact_spectrum_table1(gauss14):
    spec = exact_gaussian_spectrum(gauss14, 10)
    for lam, printed in zip(spec.eigenvalues, GAUSS14_EXACT):
        digits = len(printed.lstrip("-0.").replace(".", ""))
        assert abs(lam - mpfr(printed)) <= abs(lam) * mpfr(10) ** (1 - digits)
    assert rel_err(spec.l1_norm, mpfr(2)) < tol(8)
    assert exact_gaussian_spectrum(GaussianKernel(A=3, C=3), 4).eigenvalues == (1, 0, 0, 0)


def test_exact_spectrum_power_sums(gauss14):
    lam = exact_gaussian_spectrum(gauss14, 400).eigenvalues
    for ell in range(1, 7):
        assert abs(sum(l**ell for l in lam) - gaussian_moment(gauss14, ell)) < mpfr("1e-30")


def test_nystrom_gaussian_matches_exact(gauss14):
    model = nystrom_spectrum(gauss14, 120)
    exact = exact_gaussian_spectrum(gauss14, 10).eigenvalues
    assert np.max(np.abs(model.eigenvalues[:10] - np.array([float(v) for v in exact]))) < 1e-8
    l1, lmin, neg, tr = oracle_quantities(model)
    assert abs(l1 - 2) < 1e-8
    assert abs(lmin + 4 / 9) < 1e-10
    assert abs(neg - 0.5) < 1e-8
    assert abs(tr - 1) < 1e-6


def test_nystrom_complex_gaussian_same_spectrum():
    # phases B, D are a unitary similarity; the spectrum stays (1 - beta) beta^i
    k = GaussianKernel(A=1, C=4, B=Fraction(1, 2), D=-1, E=Fraction(1, 3))
    model = nystrom_spectrum(k, 100)
    exact = exact_gaussian_spectrum(GaussianKernel(A=1, C=4), 8).eigenvalues
    assert np.max(np.abs(model.eigenvalues[:8] - np.array([float(v) for v in exact]))) < 1e-8


def test_nystrom_psd_kernel(cp1_kernel):
    model = nystrom_spectrum(cp1_kernel, 200)
    assert model.eigenvalues.min() >= -1e-8
    _, _, neg, tr = oracle_quantities(model)
    assert neg <= 1e-8 and abs(tr - 1) < 1e-6


def test_nystrom_cp40_kernel(cp40_kernel):
    l1, lmin, neg, tr = oracle_quantities(nystrom_spectrum(cp40_kernel, 200))
    assert abs(l1 - 1.16445) <= 1e-3
    assert abs(lmin + 0.082228) <= 1e-4
    # a single negative eigenvalue carries the negativity (l1 - 1)/2
    assert abs(neg - (l1 - tr) / 2) < 1e-12
    assert abs(neg - abs(lmin)) < 1e-3


@pytest.mark.parametrize("name", ["gauss", "cp5", "cp40"])
def test_nystrom_cauchy_in_m(name):
    k = GaussianKernel(A=1, C=4) if name == "gauss" else polygauss_family(int(name[2:]))
    a = nystrom_spectrum(k, 200).eigenvalues[:10]
    b = nystrom_spectrum(k, 400).eigenvalues[:10]
    assert np.max(np.abs(a - b)) <= 1e-8


def test_nystrom_rejects_small_m(gauss14):
    with pytest.raises(ValueError):
        nystrom_spectrum(gauss14, 4)


def test_nystrom_rejects_non_hermitian():
    f = FactorKernel(A=1, B=2, C=0, D=0, E=0)
    with pytest.raises(NonHermitianResidual):
        nystrom_spectrum(f, 20, scale=0.5, shift=0.0)


def _charpoly(A):
    """Exact characteristic polynomial coefficients (ascending) by Faddeev-LeVerrier."""
    n = len(A)
    M = [[Fraction(0)] * n for _ in range(n)]
    c = [Fraction(0)] * (n + 1)
    c[n] = Fraction(1)
    for k in range(1, n + 1):
        # M <- A M + c_{n-k+1} I
        AM = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] += c[n - k + 1]
        M = AM
        AM2 = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        c[n - k] = -sum(AM2[i][i] for i in range(n)) / k
    return c


def test_extended_jacobi_matches_charpoly_roots():
    rng = random.Random(20)
    n = 20
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = A[j][i] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    coeffs = [mpfr(gmpy2.mpq(c.numerator, c.denominator)) for c in _charpoly(A)]
    roots = real_roots(UniPoly(coeffs))
    a = np.array([[mpfr(gmpy2.mpq(x.numerator, x.denominator)) for x in row] for row in A], dtype=object)
    vals = sorted(jacobi_eigenvalues(a))
    assert len(roots) == n
    for r, v in zip(roots, vals):
        assert abs(r - v) < mpfr("1e-20")


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not available")
def test_numba_and_numpy_paths_agree():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((40, 40))
    a = a + a.T
    v1, _, _ = jacobi_float(a, use_numba=True)
    v2, _, _ = jacobi_float(a, use_numba=False)
    ref = np.linalg.eigvalsh(a)
    assert np.max(np.abs(np.sort(v1) - ref)) < 1e-12
    assert np.max(np.abs(np.sort(v2) - ref)) < 1e-12
    k = polygauss_family(5)
    e1 = nystrom_spectrum(k, 60, use_numba=True).eigenvalues
    e2 = nystrom_spectrum(k, 60, use_numba=False).eigenvalues
    assert np.max(np.abs(e1 - e2)) < 1e-13


def test_jacobi_vectors():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((12, 12))
    a = a + a.T
    for use in (False, True):
        vals, vecs, _ = jacobi_float(a, want_vectors=True, use_numba=use)
        assert np.max(np.abs(a @ vecs - vecs * vals)) < 1e-12


def test_disable_flag_selects_numpy_path():
    env = dict(os.environ, TRACESPEC_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import tracespec._accel as a; print(a.HAVE_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "False"
