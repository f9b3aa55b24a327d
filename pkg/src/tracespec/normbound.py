"""Upper bounds on the trace norm through Hilbert-Schmidt factorizations.

If ``K = K1 K2`` then Hoelder's inequality gives

    ||K||_1 <= ||K1||_2 ||K2||_2 = sqrt(R(w)),

where ``w`` parametrizes a one-parameter family of Gaussian factorizations.
For Gaussian kernels ``R`` has a closed form; for quadratic-polynomial
Gaussians ``K2`` carries a quadratic prefactor fixed by a 6x6 linear system
and ``R`` is evaluated numerically at each ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import DisallowedW, NegativeRadicand, SingularSystem
from .gauss import compose, l2_norm_sq
from .kernels import FactorKernel, GaussianKernel, PolyGaussianKernel, eval_kernel, to_factor, trace
from .multipoly import MultiPoly
from .numerics import minimize_scalar
from .precision import at_precision, big, bigc, get_precision

__all__ = [
    "Decomposition",
    "NormBoundResult",
    "allowed_w",
    "decompose_gaussian",
    "decompose_polygauss",
    "gaussian_product_R",
    "product_R",
    "w_min_gaussian",
    "w_min_gaussian_branches",
    "minimize_R",
    "probe_grid",
]

PROBE_POINTS = 15


@dataclass(frozen=True)
class Decomposition:
    """``K(x, y) = int K1(x, z) K2(z, y) dz`` at parameter ``w``.

    ``residual`` is the largest pointwise deviation of ``compose(k1, k2)``
    from ``K`` on the probe grid and ``kernel_max`` the largest ``|K|`` there.
    """

    w: mpfr
    k1: FactorKernel
    k2: FactorKernel
    residual: mpfr
    kernel_max: mpfr


@dataclass(frozen=True)
class NormBoundResult:
    """Optimized factorization bound and the eigenvalue bounds it implies.

    ``neg_upper = (bound_1norm - trace)/2`` bounds the negativity and
    ``lambda_min_lower = -neg_upper`` bounds the smallest eigenvalue from below.
    """

    w_min: mpfr
    r_min: mpfr
    bound_1norm: mpfr
    intervals: tuple
    trace: mpfr
    neg_upper: mpfr
    lambda_min_lower: mpfr


def _gauss_of(k):
    if isinstance(k, GaussianKernel):
        return k
    if isinstance(k, PolyGaussianKernel):
        return k.gauss
    raise TypeError(f"unsupported kernel type {type(k).__name__}")


@at_precision
def allowed_w(A, C, upper_factor=10):
    """Open intervals ``(0, min(A, C))`` and ``(max(A, C), upper_factor*max(A, C))``."""
    A, C = big(A), big(C)
    lo, hi = min(A, C), max(A, C)
    return ((mpfr(0), lo), (hi, upper_factor * hi))


def _check_w(A, C, w):
    if not (0 < w < min(A, C) or w > max(A, C)):
        raise DisallowedW(f"w={w} is outside (0, {min(A, C)}) and ({max(A, C)}, inf)")


def probe_grid(k, points: int = PROBE_POINTS) -> list:
    """Tensor grid over +-3 standard deviations of the kernel's Gaussian envelope.

    The envelope width is taken from the narrower of the two Gaussian
    directions, ``sigma = 1/sqrt(8 min(A, C))``, centred at ``-E/(4C)``.
    """
    A, _, C, _, E = _gauss_of(k).params()
    sigma = 1 / gmpy2.sqrt(8 * min(A, C))
    centre = -E / (4 * C)
    xs = [centre + 3 * sigma * (2 * mpfr(i) / (points - 1) - 1) for i in range(points)]
    return [(x, y) for x in xs for y in xs]


def _residual(k, k1, k2):
    prod = compose(k1, k2)
    res = mpfr(0)
    kmax = mpfr(0)
    for x, y in probe_grid(k):
        kv = eval_kernel(k, x, y)
        res = max(res, abs(eval_kernel(prod, x, y) - kv))
        kmax = max(kmax, abs(kv))
    return res, kmax


def _gaussian_factors(g: GaussianKernel, w):
    A, B, C, D, E = g.params()
    _check_w(A, C, w)
    rad = (w * w - A * C) ** 2 / (w * (A - w) * (C - w))
    if rad < 0:
        raise NegativeRadicand(f"N1 radicand is negative at w={w}")
    AC = A * C
    pi = gmpy2.const_pi()
    n1 = (
        2 * gmpy2.sqrt(C) / pi * gmpy2.sqrt(rad)
        * gmpy2.exp(-(AC - w * w) * E * E / (4 * w * (C - w) * C))
    )
    if g.normalized is False:
        n1 = n1 * g.scale() / g.derived_n0()
    k1 = FactorKernel(
        A=bigc(w + AC / w, B),
        B=bigc(w + AC / w, -B),
        C=-2 * (w - AC / w),
        D=bigc(A * E / w, D),
        E=bigc(A * E / w, -D),
        N=n1,
    )
    s = (A - w) * C / (C - w)
    t = A * (C - w) / (A - w)
    h = (A - w) * E / (C - w)
    k2 = FactorKernel(A=bigc(s + t, B), B=bigc(s + t, -B), C=2 * (s - t), D=bigc(h, D), E=bigc(h, -D), N=1)
    return k1, k2


@at_precision
def decompose_gaussian(k: GaussianKernel, w, check: bool = True) -> Decomposition:
    """Explicit Gaussian factorization ``K_G = K1 K2`` at parameter ``w``.

    Raises
    ------
    DisallowedW
        If ``w`` lies outside the allowed intervals.
    """
    w = big(w)
    k1, k2 = _gaussian_factors(k, w)
    if check:
        res, kmax = _residual(k, k1, k2)
    else:
        res, kmax = mpfr("nan"), mpfr("nan")
    return Decomposition(w=w, k1=k1, k2=k2, residual=res, kernel_max=kmax)


@at_precision
def gaussian_product_R(k: GaussianKernel, w) -> mpfr:
    """Closed form ``(w^2 - AC)^2 / (4 A w (A - w)(C - w))``."""
    A, _, C, _, _ = k.params()
    w = big(w)
    _check_w(A, C, w)
    # factored so that w - sqrt(AC) is exact near w = A = C
    s = gmpy2.sqrt(A * C)
    return ((w - s) * (w + s)) ** 2 / (4 * A * w * (A - w) * (C - w))


@at_precision
def w_min_gaussian_branches(A, C):
    """Both stationary points ``X -+ sqrt(X^2 - AC)`` with ``X = max(A, C)``."""
    A, C = big(A), big(C)
    X = A if A >= C else C
    r = gmpy2.sqrt(X * X - A * C)
    return X - r, X + r


@at_precision
def w_min_gaussian(A, C) -> mpfr:
    """Minimizer of the Gaussian product in ``(0, min(A, C)]`` (the minus branch)."""
    return w_min_gaussian_branches(A, C)[0]


_BASIS = (
    {(2, 0): 1, (0, 2): 1, (1, 1): -2},
    {(2, 0): 1j, (0, 2): -1j},
    {(2, 0): 1, (0, 2): 1, (1, 1): 2},
    {(1, 0): 1j, (0, 1): -1j},
    {(1, 0): 1, (0, 1): 1},
    {(0, 0): 1},
)
_MONOMIALS = ((2, 0), (0, 2), (1, 1), (1, 0), (0, 1), (0, 0))


def _basis_poly(r) -> MultiPoly:
    return MultiPoly(2, {e: (bigc(v.real, v.imag) if isinstance(v, complex) else v) for e, v in _BASIS[r].items()})


def _solve(Mat, rhs):
    """Gaussian elimination with partial pivoting; SingularSystem on rank loss."""
    n = len(rhs)
    A = [list(row) + [rhs[i]] for i, row in enumerate(Mat)]
    scale = max(abs(v) for row in Mat for v in row)
    tol = mpfr(2) ** (-(get_precision() // 2)) * scale
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col]))
        if abs(A[piv][col]) <= tol:
            raise SingularSystem("decomposition system is rank deficient")
        A[col], A[piv] = A[piv], A[col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f != 0:
                for j in range(col, n + 1):
                    A[r][j] = A[r][j] - f * A[col][j]
    x = [mpfr(0)] * n
    for i in reversed(range(n)):
        s = A[i][n]
        for j in range(i + 1, n):
            s = s - A[i][j] * x[j]
        x[i] = s / A[i][i]
    return x


def _collapse(v):
    if isinstance(v, mpc) and v.imag == 0:
        return v.real
    return v


@at_precision
def decompose_polygauss(k: PolyGaussianKernel, w, check: bool = True) -> Decomposition:
    """Factorization ``K = K1 K2`` with Gaussian ``K1`` and quadratic-prefactor ``K2``.

    ``K1`` is the Gaussian factor of :func:`decompose_gaussian` (its scale
    absorbs the free overall constant).  The prefactor of ``K2`` is expanded in
    the basis ``(x-y)^2, i(x^2-y^2), (x+y)^2, i(x-y), x+y, 1``; composing
    each basis kernel with ``K1`` and matching monomial coefficients against
    ``K`` gives a 6x6 linear system.

    Raises
    ------
    DisallowedW
        If ``w`` lies outside the allowed intervals.
    SingularSystem
        If the matching system is rank deficient at tolerance ``2**-(P/2)``.
    """
    w = big(w)
    k1, g2 = _gaussian_factors(k.gauss, w)
    target = to_factor(k)
    cols = []
    for r in range(6):
        part = compose(k1, FactorKernel(A=g2.A, B=g2.B, C=g2.C, D=g2.D, E=g2.E, N=1, poly=_basis_poly(r)))
        sc = part.scale()
        cols.append([sc * part.poly.terms.get(m, mpfr(0)) for m in _MONOMIALS])
    Mat = [[cols[r][i] for r in range(6)] for i in range(6)]
    rhs = [target.scale() * target.poly.terms.get(m, mpfr(0)) for m in _MONOMIALS]
    u = [_collapse(v) for v in _solve(Mat, rhs)]
    poly = MultiPoly(2, {})
    for r in range(6):
        if u[r] != 0:
            poly = poly + _basis_poly(r) * u[r]
    k2 = FactorKernel(A=g2.A, B=g2.B, C=g2.C, D=g2.D, E=g2.E, N=1, poly=poly)
    if check:
        res, kmax = _residual(k, k1, k2)
    else:
        res, kmax = mpfr("nan"), mpfr("nan")
    return Decomposition(w=w, k1=k1, k2=k2, residual=res, kernel_max=kmax)


@at_precision
def product_R(k, w) -> mpfr:
    """``R(w) = ||K1||_2^2 ||K2||_2^2`` for the factorization at ``w``."""
    if isinstance(k, GaussianKernel):
        d = decompose_gaussian(k, w, check=False)
    else:
        d = decompose_polygauss(k, w, check=False)
    return l2_norm_sq(d.k1) * l2_norm_sq(d.k2)


def _objective(k):
    if isinstance(k, GaussianKernel):
        return lambda w: gaussian_product_R(k, w)

    def f(w):
        try:
            return product_R(k, w)
        except (SingularSystem, ZeroDivisionError):
            return mpfr("inf")

    return f


@at_precision
def minimize_R(k, samples: int = 128, max_doublings: int = 8) -> NormBoundResult:
    """Minimize ``R(w)`` over both allowed intervals.

    The unbounded interval starts at ``(max(A, C), 10 max(A, C))`` and its right
    end is doubled while the minimizer sits in its last grid cell.
    """
    g = _gauss_of(k)
    A, _, C, _, _ = g.params()
    f = _objective(k)
    lower, upper = allowed_w(A, C)
    best = minimize_scalar(f, lower, samples=samples)
    lo, hi = upper
    for _ in range(max_doublings + 1):
        cand = minimize_scalar(f, (lo, hi), samples=samples)
        if cand[0] < hi - (hi - lo) / (samples + 1):
            break
        hi = 2 * hi
    if cand[1] < best[1]:
        best = cand
    w_min, r_min = best
    bound = gmpy2.sqrt(r_min)
    tr = trace(k)
    neg = (bound - tr) / 2
    return NormBoundResult(
        w_min=w_min,
        r_min=r_min,
        bound_1norm=bound,
        intervals=(lower, (lo, hi)),
        trace=tr,
        neg_upper=neg,
        lambda_min_lower=-neg,
    )
