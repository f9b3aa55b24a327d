"""Closed-form Gaussian integrals of polynomials.

The engine evaluates

    I = int_{R^n} poly(r) exp(-r^T M r - v^T r + F) dr

for complex symmetric ``M`` with positive definite real part by completing
the square and taking Gaussian expectations of the shifted polynomial.
Kernel composition integrates out the middle variable in the same way, but
keeps the outer variables symbolic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import DegreeCap, Divergent, SingularForm
from .kernels import FactorKernel, Kernel, factor_trace, to_factor
from .multipoly import MultiPoly
from .precision import at_precision, get_precision

__all__ = [
    "GaussianIntegrand",
    "QuadForm",
    "quad_form",
    "integrate",
    "compose",
    "l2_norm_sq",
    "DEGREE_CAP",
    "power_traces",
]

DEGREE_CAP = 64


def _zero():
    return mpfr(0)


def _re(v):
    return v.real if isinstance(v, mpc) else v


def _collapse(v):
    if isinstance(v, mpc) and v.imag == 0:
        return v.real
    return v


@dataclass(frozen=True)
class GaussianIntegrand:
    """``poly(r) * exp(-r^T M r - v^T r + F)`` over ``R^n``.

    ``M`` is a nested sequence (n x n), ``v`` a length-n sequence.
    """

    M: tuple
    v: tuple
    F: object
    poly: MultiPoly

    @property
    def n(self) -> int:
        return len(self.v)


@dataclass(frozen=True)
class QuadForm:
    """Completed square: mean ``-M^{-1} v / 2``, covariance ``M^{-1} / 2``."""

    mean: tuple
    covariance: tuple
    gaussian_mass: object


def _ldl(M):
    """Complex-symmetric LDL^T without pivoting; returns (L, D)."""
    n = len(M)
    L = [[_zero() for _ in range(n)] for _ in range(n)]
    D = [_zero()] * n
    for j in range(n):
        s = M[j][j]
        for k in range(j):
            s = s - L[j][k] * L[j][k] * D[k]
        D[j] = s
        L[j][j] = mpfr(1)
        for i in range(j + 1, n):
            s = M[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k] * D[k]
            L[i][j] = s / D[j]
    return L, D


def _ldl_inverse(L, D):
    n = len(D)
    inv = [[_zero() for _ in range(n)] for _ in range(n)]
    for col in range(n):
        # forward solve L y = e_col, scale by D, back solve L^T x = z
        y = [_zero()] * n
        for i in range(n):
            s = mpfr(1) if i == col else _zero()
            for k in range(i):
                s = s - L[i][k] * y[k]
            y[i] = s
        z = [y[i] / D[i] for i in range(n)]
        x = [_zero()] * n
        for i in reversed(range(n)):
            s = z[i]
            for k in range(i + 1, n):
                s = s - L[k][i] * x[k]
            x[i] = s
        for i in range(n):
            inv[i][col] = x[i]
    return inv


def _real_pd(M) -> bool:
    """Cholesky test of the real part."""
    n = len(M)
    R = [[_re(M[i][j]) for j in range(n)] for i in range(n)]
    for j in range(n):
        s = R[j][j] - sum((R[j][k] * R[j][k] for k in range(j)), _zero())
        if not s > 0:
            return False
        R[j][j] = gmpy2.sqrt(s)
        for i in range(j + 1, n):
            R[i][j] = (R[i][j] - sum((R[i][k] * R[j][k] for k in range(j)), _zero())) / R[j][j]
    return True


@at_precision
def quad_form(M, v, F=0):
    """Complete the square for ``exp(-r^T M r - v^T r + F)``.

    Raises
    ------
    Divergent
        If the real part of ``M`` is not positive definite.
    SingularForm
        If ``|det M| < 2**-(P/2) ||M||^n``.
    """
    n = len(M)
    for i in range(n):
        if len(M[i]) != n:
            raise ValueError("M must be square")
        for j in range(i):
            if M[i][j] != M[j][i]:
                raise ValueError("M must be symmetric")
    if not _real_pd(M):
        raise Divergent("real part of the quadratic form is not positive definite")
    L, D = _ldl(M)
    det = mpfr(1)
    for d in D:
        det = det * d
    norm = gmpy2.sqrt(sum((abs(M[i][j]) ** 2 for i in range(n) for j in range(n)), _zero()))
    if abs(det) < mpfr(2) ** (-(get_precision() // 2)) * norm**n:
        raise SingularForm("quadratic form is numerically singular")
    inv = _ldl_inverse(L, D)
    w = [sum((inv[i][j] * v[j] for j in range(n)), _zero()) for i in range(n)]
    vMv = sum((v[i] * w[i] for i in range(n)), _zero())
    sqrt_det = mpfr(1)
    for d in D:
        # each pivot has positive real part, so the principal roots multiply
        # to the branch continued from the real positive definite case
        sqrt_det = sqrt_det * gmpy2.sqrt(d)
    mass = gmpy2.const_pi() ** (mpfr(n) / 2) / sqrt_det * gmpy2.exp(F + vMv / 4)
    mean = tuple(_collapse(-wi / 2) for wi in w)
    cov = tuple(tuple(_collapse(inv[i][j] / 2) for j in range(n)) for i in range(n))
    return QuadForm(mean=mean, covariance=cov, gaussian_mass=_collapse(mass))


def _shift(poly: MultiPoly, mean) -> dict:
    """Coefficients of ``poly(mean + z)`` as a polynomial in ``z``."""
    out: dict = {}
    for exps, c in poly.terms.items():
        partial = {(): c}
        for i, k in enumerate(exps):
            nxt = {}
            mu = mean[i]
            for pre, val in partial.items():
                for j in range(k + 1):
                    if mu == 0 and j != k:
                        continue
                    t = val * comb(k, j)
                    if k - j:
                        t = t * mu ** (k - j)
                    key = pre + (j,)
                    nxt[key] = nxt[key] + t if key in nxt else t
            partial = nxt
        for key, val in partial.items():
            out[key] = out[key] + val if key in out else val
    return out


def _central_moments(cov):
    n = len(cov)

    @lru_cache(maxsize=None)
    def mom(beta):
        if sum(beta) % 2:
            return _zero()
        if not any(beta):
            return mpfr(1)
        j = next(i for i, b in enumerate(beta) if b)
        rest = list(beta)
        rest[j] -= 1
        total = _zero()
        for i in range(n):
            if rest[i] and cov[j][i] != 0:
                nb = list(rest)
                nb[i] -= 1
                total = total + rest[i] * cov[j][i] * mom(tuple(nb))
        return total

    return mom


@at_precision
def integrate(g: GaussianIntegrand):
    """Exact value of the Gaussian integral ``g``.

    ``gaussian_mass * E[poly(mu + Z)]`` with ``Z`` centred Gaussian of
    covariance ``M^{-1}/2``; central moments follow from Isserlis' theorem in
    its recursive form ``E[Z_j Z^b] = sum_i Sigma_ji b_i E[Z^(b - e_i)]``.

    Raises
    ------
    DegreeCap
        If the total polynomial degree exceeds ``DEGREE_CAP``.
    """
    if g.poly.nvars != g.n:
        raise ValueError("polynomial and form dimensions differ")
    if g.poly.degree() > DEGREE_CAP:
        raise DegreeCap(f"polynomial degree {g.poly.degree()} exceeds {DEGREE_CAP}")
    qf = quad_form(g.M, g.v, g.F)
    if g.poly.is_zero():
        return _zero()
    shifted = _shift(g.poly, qf.mean)
    mom = _central_moments(qf.covariance)
    total = _zero()
    for beta, c in shifted.items():
        if sum(beta) % 2 == 0:
            total = total + c * mom(beta)
    return _collapse(qf.gaussian_mass * total)


def _mul_linear(b, u, v, w):
    """Multiply a dense bivariate array by ``u x + v y + w``; the result is one larger per axis."""
    r, c = b.shape
    out = np.full((r + 1, c + 1), _zero(), dtype=object)
    if w != 0:
        out[:r, :c] = b * w
    if u != 0:
        out[1:, :c] += b * u
    if v != 0:
        out[:r, 1:] += b * v
    return out


def _trim(arr):
    rows = [i for i in range(arr.shape[0]) if any(c != 0 for c in arr[i, :])]
    cols = [j for j in range(arr.shape[1]) if any(c != 0 for c in arr[:, j])]
    if not rows:
        return np.full((1, 1), _zero(), dtype=object)
    return arr[: max(rows) + 1, : max(cols) + 1]


def _to_poly(arr) -> MultiPoly:
    terms = {}
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            c = arr[i, j]
            if c != 0:
                terms[(i, j)] = _collapse(c)
    return MultiPoly(2, terms)


@at_precision
def compose(k1: Kernel, k2: Kernel) -> FactorKernel:
    """Kernel of the operator product: ``int K1(x, z) K2(z, y) dz`` in closed form.

    Raises
    ------
    Divergent
        If the real part of the ``z**2`` coefficient is not positive.
    """
    f1, f2 = to_factor(k1), to_factor(k2)
    a1, b1, c1, d1, e1 = f1.exponents()
    a2, b2, c2, d2, e2 = f2.exponents()
    alpha = b1 + a2
    if not _re(alpha) > 0:
        raise Divergent("middle variable is not integrable")
    s = e1 + d2
    a = a1 - c1 * c1 / (4 * alpha)
    b = b2 - c2 * c2 / (4 * alpha)
    c = -c1 * c2 / (2 * alpha)
    d = d1 - c1 * s / (2 * alpha)
    e = e2 - c2 * s / (2 * alpha)
    scale = (
        f1.scale() * f2.scale() * gmpy2.sqrt(gmpy2.const_pi() / alpha) * gmpy2.exp(s * s / (4 * alpha))
    )
    # z = mu + Z with mu = u x + v y + w and var(Z) = 1/(2 alpha)
    u = -c1 / (2 * alpha)
    v = -c2 / (2 * alpha)
    w = -s / (2 * alpha)
    var = 1 / (2 * alpha)

    P1, P2 = f1.dense, f2.dense
    nx, nz1 = P1.shape
    nz2, ny = P2.shape
    kmax = nz1 + nz2 - 2

    def R(k):
        out = np.full((nx, ny), _zero(), dtype=object)
        for i in range(max(0, k - nz2 + 1), min(k, nz1 - 1) + 1):
            out += np.multiply.outer(P1[:, i], P2[k - i, :])
        return out

    # Clenshaw for sum_k R_k m_k with m_{k+1} = mu m_k + k var m_{k-1};
    # b_k has x-degree < nx + kmax - k and y-degree < ny + kmax - k
    b_next = None
    b_next2 = None
    for k in range(kmax, -1, -1):
        ext = kmax - k
        cur = np.full((nx + ext, ny + ext), _zero(), dtype=object)
        cur[:nx, :ny] += R(k)
        if b_next is not None:
            cur += _mul_linear(b_next, u, v, w)
        if b_next2 is not None:
            r2, c2 = b_next2.shape
            cur[:r2, :c2] += b_next2 * ((k + 1) * var)
        b_next2, b_next = b_next, cur
    poly = _to_poly(_trim(b_next))
    return FactorKernel(
        A=_collapse(a), B=_collapse(b), C=_collapse(c), D=_collapse(d), E=_collapse(e),
        N=_collapse(scale), poly=poly,
    )


@at_precision
def l2_norm_sq(k: Kernel) -> mpfr:
    """Squared Hilbert-Schmidt norm ``int int |K(x, y)|^2 dx dy``."""
    f = to_factor(k)
    a, b, c, d, e = (_re(x) for x in f.exponents())
    M = ((2 * a, c), (c, 2 * b))
    v = (2 * d, 2 * e)
    g = GaussianIntegrand(M=M, v=v, F=mpfr(0), poly=f.poly * f.poly.conj())
    val = integrate(g)
    return _re(val) * abs(f.scale()) ** 2


@at_precision
def power_traces(k: Kernel, n: int) -> list:
    """``[Tr K, Tr K^2, ..., Tr K^n]`` by repeated exact composition."""
    f = to_factor(k)
    out = [factor_trace(f)]
    cur = f
    for _ in range(1, n):
        cur = compose(cur, f)
        out.append(factor_trace(cur))
    return out
