"""Spectrum and minimal-eigenvalue estimators built on the truncations of ``g``.

``g_n(x) = sum_{k<=n} e_k x^k`` is the degree-``n`` truncation of
``g(x) = prod_i (1 + lambda_i x)``.  Its real roots give the spectral
approximation ``Lambda_n = {-1/x}``; its smallest positive root gives
``q_{n,0}``.  Subtracting the worst-case tail allowed by a 1-norm budget
``c`` gives ``h_{n,c}``, whose smallest positive root yields the monotone
lower bound ``q_{n,c}`` of the minimal eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr

from .elemsym import ElemSymSequence, check_ek_bound
from .errors import BoundViolated, EmptySet, InsufficientMoments
from .numerics import UniPoly, min_positive_root, real_roots
from .precision import at_precision, big, get_precision

__all__ = [
    "SpectrumEstimate",
    "LowerBoundSeries",
    "RateReport",
    "lambda_n",
    "hausdorff",
    "q_n0",
    "h_nc",
    "q_nc",
    "exp_tail",
    "q_series",
    "rate_report",
    "theorem_delta",
]


@dataclass(frozen=True)
class SpectrumEstimate:
    """Elements of ``Lambda_n``, ascending and by decreasing magnitude."""

    n: int
    lambda_set: tuple
    by_abs: tuple


@dataclass(frozen=True)
class LowerBoundSeries:
    """``q_{n,0}`` (``kind='q0'``) or ``q_{n,c}`` (``kind='qc'``) for ``n`` in ``ns``.

    ``None`` marks orders where ``g_n`` has no positive root.
    """

    kind: str
    c: object
    ns: tuple
    values: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.ns, self.values))


@dataclass(frozen=True)
class RateReport:
    """Observed gaps ``|q_n - lambda_min|`` against the super-exponential rate.

    ``delta_bound[i]`` is ``(e alpha/(n+1))^((n+1)/alpha)``; the allowed gap is
    ``delta/(1-delta) |lambda_min|`` and ``flags`` lists the orders
    ``n >= n_threshold`` where the observed gap exceeds it by more than 1e-6
    relative.  ``delta_exact`` solves ``x^alpha = 2 tail(alpha (1-x))`` and
    holds for every ``n``.
    """

    alpha: object
    n_threshold: object
    ns: tuple
    delta_bound: tuple
    delta_exact: tuple
    observed_gap: tuple
    allowed_gap: tuple
    flags: tuple = field(default=())


def _seq(e) -> tuple:
    if isinstance(e, ElemSymSequence):
        return e.e
    return tuple(v if isinstance(v, mpfr) else big(v) for v in e)


def _head(e, n: int) -> tuple:
    s = _seq(e)
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(s) < n + 1:
        raise InsufficientMoments(f"need e_0..e_{n}, have e_0..e_{len(s) - 1}")
    return s[: n + 1]


@at_precision
def lambda_n(e, n: int) -> SpectrumEstimate:
    """``Lambda_n = {-1/x : g_n(x) = 0, x real}``."""
    p = UniPoly(_head(e, n))
    if p.degree < 1:
        vals = ()
    else:
        vals = tuple(sorted(-1 / x for x in real_roots(p) if x != 0))
    return SpectrumEstimate(n=n, lambda_set=vals, by_abs=tuple(sorted(vals, key=lambda v: -abs(v))))


@at_precision
def hausdorff(a: Iterable, b: Iterable) -> mpfr:
    """Hausdorff distance between two finite sets of reals."""
    a = [big(x) if not isinstance(x, mpfr) else x for x in a]
    b = [big(x) if not isinstance(x, mpfr) else x for x in b]
    if not a or not b:
        raise EmptySet("both sets must be non-empty")

    def directed(s, t):
        return max(min(abs(x - y) for y in t) for x in s)

    return max(directed(a, b), directed(b, a))


@at_precision
def q_n0(e, n: int):
    """``-1/(smallest positive root of g_n)``, or ``None`` when there is none."""
    p = UniPoly(_head(e, n))
    if p.degree < 1:
        return None
    pos = [x for x in real_roots(p) if x > 0]
    if not pos:
        return None
    return -1 / min(pos)


@at_precision
def exp_tail(y, n: int) -> mpfr:
    """``sum_{k>n} y^k/k! = exp(y) - sum_{k<=n} y^k/k!`` for ``y >= 0``.

    For ``y <= (n+2)/2`` the terms decay at least geometrically with ratio 1/2,
    so the series is summed directly (no cancellation); beyond that the
    exponential dominates and the subtraction is benign.
    """
    y = big(y)
    if y == 0:
        return mpfr(0)
    if y <= mpfr(n + 2) / 2:
        term = y ** (n + 1) / gmpy2.fac(n + 1)
        total = mpfr(0)
        k = n + 1
        eps = mpfr(2) ** (-get_precision() - 4)
        while term > eps * total or total == 0:
            total = total + term
            k += 1
            term = term * y / k
            if term == 0:
                break
        return total
    partial = mpfr(0)
    term = mpfr(1)
    for k in range(n + 1):
        partial = partial + term
        term = term * y / (k + 1)
    return gmpy2.exp(y) - partial


def _horner(cs, x):
    acc = mpfr(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


@at_precision
def h_nc(e, c, n: int, x) -> mpfr:
    """``h_{n,c}(x) = g_n(x) - sum_{k>n} (c x)^k/k!``."""
    x, c = big(x), big(c)
    return _horner(_head(e, n), x) - exp_tail(c * x, n)


def _h_ceiling(es, c, n):
    # a point where the tail alone exceeds |g_n| + 1, hence h < 0
    abs_cs = [abs(v) for v in es]
    x = 1 / c
    while exp_tail(c * x, n) <= _horner(abs_cs, x) + 1:
        x = x * 2
    return x


@at_precision
def q_nc(e, c, n: int):
    """``-1/(smallest positive root of h_{n,c})``; a lower bound on ``lambda_min``.

    Raises
    ------
    BoundViolated
        If ``|e_k| > c^k/k!`` for some ``k <= n`` (``c`` is not a valid budget).
    """
    es = _head(e, n)
    c = big(c)
    k = check_ek_bound(es, c)
    if k is not None:
        raise BoundViolated(f"|e_{k}| exceeds c^{k}/{k}! for c={c}", k=k)
    hi = _h_ceiling(es, c, n)
    root = min_positive_root(lambda x: _horner(es, x) - exp_tail(c * x, n), hi)
    return -1 / root


@at_precision
def q_series(e, kind: str, ns: Sequence[int], c=None) -> LowerBoundSeries:
    """Evaluate ``q_{n,0}`` or ``q_{n,c}`` over the orders ``ns``."""
    if kind == "q0":
        vals = tuple(q_n0(e, n) for n in ns)
        c = mpfr(0)
    elif kind == "qc":
        if c is None:
            raise ValueError("q_{n,c} needs a budget c")
        c = big(c)
        vals = tuple(q_nc(e, c, n) for n in ns)
    else:
        raise ValueError(f"unknown series kind {kind!r}")
    return LowerBoundSeries(kind=kind, c=c, ns=tuple(ns), values=vals)


@at_precision
def theorem_delta(alpha, n: int) -> mpfr:
    """``(e alpha/(n+1))^((n+1)/alpha)``."""
    alpha = big(alpha)
    return (gmpy2.exp(1) * alpha / (n + 1)) ** ((n + 1) / alpha)


def _delta_exact(alpha, n):
    # unique root in (0, 1) of x^alpha - 2 tail(alpha (1 - x))
    def f(x):
        return x**alpha - 2 * exp_tail(alpha * (1 - x), n)

    lo, hi = mpfr(0), mpfr(1)
    for _ in range(get_precision() // 2 + 8):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


@at_precision
def rate_report(series: LowerBoundSeries, lambda_min_ref, c, ref_tol=0) -> RateReport:
    """Compare observed gaps with the theorem's rate for ``n >= max(3, 2(alpha-1))``.

    ``ref_tol`` is the absolute uncertainty of ``lambda_min_ref`` (for example a
    float64 Nystrom value); a gap is flagged only when it exceeds the allowed gap
    by more than that.
    """
    lam = big(lambda_min_ref)
    ref_tol = big(ref_tol)
    if not lam < 0:
        raise ValueError("lambda_min_ref must be negative")
    c = big(c)
    alpha = c / abs(lam)
    n0 = max(mpfr(3), 2 * (alpha - 1))
    bounds, exact, gaps, allowed, flags = [], [], [], [], []
    for n, q in zip(series.ns, series.values):
        d = theorem_delta(alpha, n)
        bounds.append(d)
        exact.append(_delta_exact(alpha, n))
        gap = None if q is None else abs(q - lam)
        gaps.append(gap)
        lim = d / (1 - d) * abs(lam) if d < 1 else mpfr("inf")
        allowed.append(lim)
        if n >= n0 and gap is not None and gap > lim * (1 + mpfr("1e-6")) + ref_tol:
            flags.append(n)
    return RateReport(
        alpha=alpha,
        n_threshold=n0,
        ns=tuple(series.ns),
        delta_bound=tuple(bounds),
        delta_exact=tuple(exact),
        observed_gap=tuple(gaps),
        allowed_gap=tuple(allowed),
        flags=tuple(flags),
    )
