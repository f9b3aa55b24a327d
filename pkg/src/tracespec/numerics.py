"""Univariate polynomials, real root isolation and 1-D search at extended precision.

Root isolation works down the derivative chain: the real roots of ``p'`` split
the real line into intervals on which ``p`` is monotone, so every sign change
between consecutive critical points brackets exactly one simple root.  This
handles roots spread over many decades (the truncated generating functions
have roots from ~1 up to ~1e20), which a uniform scan grid cannot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, ZeroPolynomial
from .precision import at_precision, big, get_precision

__all__ = [
    "UniPoly",
    "Bracket",
    "eval_unipoly",
    "real_roots",
    "min_positive_root",
    "minimize_scalar",
    "default_tol",
    "root_bound",
    "normal_moments",
]


def default_tol() -> mpfr:
    """Relative root tolerance 2**-(P/2) (2**-128 at the default 256 bits)."""
    return mpfr(2) ** (-(get_precision() // 2))


@dataclass(frozen=True)
class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable):
        cs = [c if isinstance(c, mpfr) else big(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return _horner(self.coeffs, x)

    def derivative(self) -> "UniPoly":
        return UniPoly(k * c for k, c in enumerate(self.coeffs) if k)


@dataclass(frozen=True)
class Bracket:
    lo: mpfr
    hi: mpfr
    flo: mpfr
    fhi: mpfr

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bracket needs lo < hi")
        if self.flo == 0 or self.fhi == 0 or _sign(self.flo) == _sign(self.fhi):
            raise ValueError("bracket endpoints must have nonzero values of opposite sign")


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _horner(cs: Sequence, x):
    acc = mpfr(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _horner2(cs: Sequence, x):
    """Value and first derivative."""
    p = mpfr(0)
    dp = mpfr(0)
    for c in reversed(cs):
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _abs_sum(cs: Sequence, x):
    ax = abs(x)
    acc = mpfr(0)
    for c in reversed(cs):
        acc = acc * ax + abs(c)
    return acc


@at_precision
def eval_unipoly(p: UniPoly, x) -> mpfr:
    """Horner evaluation of ``p`` at ``x``."""
    return _horner(p.coeffs, big(x))


def root_bound(cs: Sequence) -> mpfr:
    """Strict upper bound on |root|: the smaller of the Cauchy and Fujiwara bounds."""
    n = len(cs) - 1
    lead = abs(cs[-1])
    cauchy = 1 + max(abs(c) for c in cs[:-1]) / lead
    terms = []
    for k in range(1, n + 1):
        a = abs(cs[n - k]) / lead
        if k == n:
            a = a / 2
        if a:
            terms.append(gmpy2.root(a, k))
    fujiwara = 2 * max(terms) if terms else mpfr(0)
    # pad so the endpoints are never roots themselves
    return min(cauchy, fujiwara) * (1 + mpfr(2) ** -20) + mpfr(2) ** -(get_precision() // 2)


def _split_point(lo, hi):
    # geometric bisection for brackets spanning several decades away from zero
    if lo > 0 and hi > 4 * lo:
        return gmpy2.sqrt(lo * hi)
    if hi < 0 and lo < 4 * hi:
        return -gmpy2.sqrt(lo * hi)
    return (lo + hi) / 2


def _refine_poly_root(cs, lo, hi, flo, tol):
    """Safeguarded Newton on a bracket with a sign change; bisection fallback."""
    slo = _sign(flo)
    x = _split_point(lo, hi)
    width = hi - lo
    max_iter = 4 * get_precision() + 200
    for _ in range(max_iter):
        fx, dfx = _horner2(cs, x)
        if fx == 0:
            return x
        if _sign(fx) == slo:
            lo = x
        else:
            hi = x
        new_width = hi - lo
        xn = None
        if dfx != 0:
            step = fx / dfx
            cand = x - step
            if lo < cand < hi and new_width < width * mpfr("0.75"):
                xn = cand
                if abs(step) <= tol * abs(cand):
                    return cand
            elif lo < cand < hi and abs(step) <= tol * abs(cand):
                return cand
        if xn is None:
            xn = _split_point(lo, hi)
        width = new_width
        if hi - lo <= tol * max(abs(lo), abs(hi)):
            return xn
        x = xn
    return x


def _dedup(sorted_roots, rel):
    out = []
    for r in sorted_roots:
        if out and abs(r - out[-1]) <= rel * max(abs(r), abs(out[-1])):
            continue
        out.append(r)
    return out


def _roots_rec(cs, tol, floor):
    n = len(cs) - 1
    if n <= 0:
        return []
    if n == 1:
        return [-cs[0] / cs[1]]
    dcs = [k * c for k, c in enumerate(cs) if k]
    crit = _roots_rec(dcs, tol, floor)
    bound = root_bound(cs)
    pts = [-bound] + [x for x in crit if -bound < x < bound] + [bound]
    vals = [_horner(cs, x) for x in pts]
    roots = []
    # even-multiplicity roots: the polynomial touches zero at a critical point
    for x, fx in zip(pts[1:-1], vals[1:-1]):
        if abs(fx) <= floor * _abs_sum(cs, x):
            roots.append(x)
    for (u, fu), (v, fv) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        if fu == 0 or fv == 0:
            continue
        if _sign(fu) != _sign(fv):
            roots.append(_refine_poly_root(cs, u, v, fu, tol))
    roots.sort()
    return _dedup(roots, max(tol, floor))


@at_precision
def real_roots(p: UniPoly, tol_rel=None) -> list:
    """All distinct real roots of ``p``, sorted ascending.

    Roots are refined to relative tolerance ``tol_rel`` (default 2**-(P/2)).
    Clusters of nearly coincident roots are reported once; a root of even
    multiplicity is detected when ``|p|`` at a critical point falls below
    2**-(P/2) times the absolute-value sum of the terms (best effort).
    """
    cs = list(p.coeffs)
    if not cs:
        raise ZeroPolynomial("all coefficients are zero")
    tol = default_tol() if tol_rel is None else big(tol_rel)
    floor = mpfr(2) ** (-(get_precision() // 2))
    zero_root = False
    while cs[0] == 0:
        cs.pop(0)
        zero_root = True
    roots = _roots_rec(cs, tol, floor)
    if zero_root:
        roots.append(mpfr(0))
        roots.sort()
    return roots


def _illinois(f, lo, hi, flo, fhi, tol, max_iter):
    """Regula falsi with the Illinois modification; bisects when it stalls."""
    side = 0
    x = (lo + hi) / 2
    for it in range(max_iter):
        if hi - lo <= tol * max(abs(lo), abs(hi)):
            break
        if it % 4 == 3:
            x = (lo + hi) / 2
        else:
            x = (lo * fhi - hi * flo) / (fhi - flo)
            if not lo < x < hi:
                x = (lo + hi) / 2
        fx = f(x)
        if fx == 0:
            return x
        if _sign(fx) == _sign(flo):
            lo, flo = x, fx
            if side == -1:
                fhi = fhi / 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo = flo / 2
            side = 1
    return (lo + hi) / 2


@at_precision
def min_positive_root(f: Callable, search_hi, tol_rel=None, grid: int = 64, max_grid: int = 1 << 14):
    """Smallest ``x`` in ``(0, search_hi]`` with ``f(x) = 0``, or ``None``.

    The first sign change is located on uniform grids that are doubled until two
    successive levels agree on the crossing cell (or ``max_grid`` is reached),
    then polished by Illinois/bisection.  ``None`` encodes ``min(empty) = +inf``.
    """
    hi = big(search_hi)
    tol = default_tol() if tol_rel is None else big(tol_rel)
    f0 = f(mpfr(0))
    if f0 == 0:
        raise DomainError("f(0) must be nonzero")
    s0 = _sign(f0)
    prev = None
    m = grid
    while m <= max_grid:
        found = None
        fprev = f0
        for i in range(1, m + 1):
            x = hi * i / m
            fx = f(x)
            if fx == 0:
                found = (x, x, fx, fx)
                break
            if _sign(fx) != s0:
                found = (hi * (i - 1) / m, x, fprev, fx)
                break
            fprev = fx
        if found is not None and prev is not None and found[1] >= prev[0] and found[0] <= prev[1]:
            break
        prev = found
        m *= 2
    else:
        found = prev
    if found is None:
        return None
    lo, xh, flo, fhi = found
    if lo == xh:
        return lo
    return _illinois(f, lo, xh, flo, fhi, tol, 4 * get_precision() + 100)


def _finite(v) -> bool:
    try:
        return bool(gmpy2.is_finite(v))
    except TypeError:
        return math.isfinite(v)


@at_precision
def minimize_scalar(f: Callable, interval, tol=None, samples: int = 128):
    """Global-ish 1-D minimization on an open interval.

    ``samples`` interior grid points seed the bracket around the leftmost grid
    minimum, which golden-section search then narrows to width ``tol``.
    Returns ``(x_min, f_min)``.
    """
    lo, hi = (big(v) for v in interval)
    if not lo < hi:
        raise ValueError("interval needs lo < hi")
    tol = (hi - lo) * default_tol() if tol is None else big(tol)
    xs = [lo + (hi - lo) * i / (samples + 1) for i in range(1, samples + 1)]
    best = None
    for i, x in enumerate(xs):
        v = f(x)
        if _finite(v) and (best is None or v < best[1]):
            best = (i, v)
    if best is None:
        raise DomainError("objective is non-finite at every sample")

    def g(x):
        v = f(x)
        return v if _finite(v) else mpfr("inf")

    i = best[0]
    a = xs[i - 1] if i > 0 else lo
    b = xs[i + 1] if i + 1 < samples else hi
    invphi = (gmpy2.sqrt(mpfr(5)) - 1) / 2
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = g(x2)
    xm, fm = (x1, f1) if f1 <= f2 else (x2, f2)
    if best[1] < fm:
        return xs[best[0]], best[1]
    return xm, fm


def normal_moments(mean, var, kmax: int) -> list:
    """Raw moments ``E[(mean + Z)**k]``, ``k = 0..kmax``, for ``Z ~ N(0, var)``.

    Uses ``m[k+1] = mean*m[k] + k*var*m[k-1]``; ``mean`` and ``var`` may be
    complex (analytic continuation), or any ring element supporting ``+`` and ``*``.
    """
    out = [mpfr(1)]
    if kmax >= 1:
        out.append(mean)
    for k in range(1, kmax):
        out.append(mean * out[k] + k * var * out[k - 1])
    return out
