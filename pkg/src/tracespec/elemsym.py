"""Elementary symmetric functions of the eigenvalues.

``e_k`` are the coefficients of ``g(x) = prod_i (1 + lambda_i x)``.  They follow
from the moments through Newton's identities

    k e_k = sum_{i=1}^{k} (-1)^(i-1) e_{k-i} M_i,

which is the primary path.  The equivalent Hessenberg determinant is kept as
an independent check.

Both suffer cancellation once ``e_k`` is much smaller than the terms of the
recurrence (``e_k`` of a Gaussian kernel decays like ``beta^(k(k-1)/2)``).
When the moments come with their kernel, the bits lost are estimated from the
recurrence and the moments are recomputed with that many extra bits, so the
returned ``e_k`` keep their relative accuracy at the working precision.
The recomputation is capped at ``MAX_PRECISION_FACTOR`` times the working
precision (more for closed-form Gaussian moments); past the cap small ``e_k`` are only accurate relative to the size
of the recurrence terms.  Plain moment lists are used as given.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import gmpy2
from gmpy2 import mpfr

from .errors import BoundViolated, InsufficientMoments
from .kernels import GaussianKernel
from .moments import MomentSequence, moment_sequence
from .precision import at_precision, big, get_precision, precision

GUARD_BITS = 32
MAX_PRECISION_FACTOR = 4
# closed-form Gaussian moments are cheap at any precision
MAX_PRECISION_FACTOR_GAUSSIAN = 64

__all__ = [
    "ElemSymSequence",
    "ek_newton",
    "ek_determinant",
    "ek_gaussian_closed",
    "check_ek_bound",
]


@dataclass(frozen=True)
class ElemSymSequence:
    """``e[0] = 1, e[1], ..., e[n]`` with an optional 1-norm budget ``c``.

    When ``c`` is given the constructor enforces ``|e_k| <= c^k/k!``
    (relative slack ``2**-(P-32)``) and raises :class:`BoundViolated` otherwise.
    """

    e: tuple
    source: MomentSequence | None = None
    c: object = None

    def __post_init__(self):
        if not self.e or self.e[0] != 1:
            raise ValueError("e[0] must equal 1")
        if self.c is not None:
            k = _first_violation(self.e, big(self.c))
            if k is not None:
                raise BoundViolated(f"|e_{k}| exceeds c^{k}/{k}! for c={self.c}", k=k)

    @property
    def n(self) -> int:
        return len(self.e) - 1

    def __getitem__(self, k):
        return self.e[k]

    def __len__(self):
        return len(self.e)

    def truncated(self, n: int) -> "ElemSymSequence":
        if n > self.n:
            raise InsufficientMoments(f"need e_0..e_{n}, have up to e_{self.n}")
        return ElemSymSequence(e=self.e[: n + 1], source=self.source, c=self.c)


def _as_seq(e) -> tuple:
    if isinstance(e, ElemSymSequence):
        return e.e
    return tuple(v if isinstance(v, mpfr) else big(v) for v in e)


def _moment_list(m, k: int) -> list:
    vals = list(m.values) if isinstance(m, MomentSequence) else [big(v) for v in m]
    if len(vals) < k:
        raise InsufficientMoments(f"need moments up to order {k}, have {len(vals)}")
    return vals


def _newton(M, n: int):
    """Newton's identities; also returns the worst cancellation in bits."""
    e = [mpfr(1)]
    lost = 0.0
    for k in range(1, n + 1):
        s = mpfr(0)
        mag = mpfr(0)
        for i in range(1, k + 1):
            t = e[k - i] * M[i - 1]
            s = s + t if i % 2 else s - t
            mag = mag + abs(t)
        e.append(s / k)
        if mag:
            lost = max(lost, math.inf if s == 0 else float(gmpy2.log2(mag / abs(s))))
    return e, lost


def _accurate_moments(m, n: int):
    """Moments good enough for ``e_0..e_n`` at the working precision, and their precision."""
    M = _moment_list(m, n)
    P = get_precision()
    if not isinstance(m, MomentSequence) or m.kernel is None:
        return M[:n], P
    _, lost = _newton(M, n)
    bits = P
    factor = MAX_PRECISION_FACTOR_GAUSSIAN if isinstance(m.kernel, GaussianKernel) else MAX_PRECISION_FACTOR
    cap = factor * P
    while lost > GUARD_BITS and bits < cap:
        bits = cap if math.isinf(lost) else min(cap, max(bits + GUARD_BITS, P + math.ceil(lost) + GUARD_BITS))
        with precision(bits):
            M = list(moment_sequence(m.kernel, n).values)
            _, lost_hi = _newton(M, n)
        # lost is measured against the higher precision now
        lost = lost_hi - (bits - P)
    return M[:n], bits


def _round(v, bits):
    return gmpy2.mpfr(v, bits)


@at_precision
def ek_newton(m: MomentSequence | Sequence, n: int) -> ElemSymSequence:
    """``e_0..e_n`` from ``M_1..M_n`` by Newton's identities."""
    P = get_precision()
    M, bits = _accurate_moments(m, n)
    with precision(bits):
        e, _ = _newton(M, n)
    e = [_round(v, P) for v in e]
    return ElemSymSequence(e=tuple(e), source=m if isinstance(m, MomentSequence) else None)


@at_precision
def ek_determinant(m: MomentSequence | Sequence, k: int) -> mpfr:
    """``e_k`` as ``det(H_k) / k!`` with ``H_k`` the lower-Hessenberg moment matrix.

    The determinant is taken by Gaussian elimination with partial pivoting.
    """
    if k == 0:
        return mpfr(1)
    P = get_precision()
    M, bits = _accurate_moments(m, k)
    with precision(bits):
        return _round(_hessenberg_det(M, k), P)


def _hessenberg_det(M, k: int) -> mpfr:
    H = [[mpfr(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1):
            H[i][j] = M[i - j]
        if i + 1 < k:
            H[i][i + 1] = mpfr(i + 1)
    det = mpfr(1)
    for col in range(k):
        piv = max(range(col, k), key=lambda r: abs(H[r][col]))
        if H[piv][col] == 0:
            return mpfr(0)
        if piv != col:
            H[col], H[piv] = H[piv], H[col]
            det = -det
        det = det * H[col][col]
        for r in range(col + 1, k):
            f = H[r][col] / H[col][col]
            if f != 0:
                for j in range(col, k):
                    H[r][j] = H[r][j] - f * H[col][j]
    return det / gmpy2.fac(k)


@at_precision
def ek_gaussian_closed(beta, k: int) -> mpfr:
    """``(1-beta)^k beta^(k(k-1)/2) / prod_{i=1..k} (1 - beta^i)``."""
    beta = big(beta)
    if not abs(beta) < 1:
        raise ValueError("|beta| must be below 1")
    den = mpfr(1)
    for i in range(1, k + 1):
        den = den * (1 - beta**i)
    return (1 - beta) ** k * beta ** (k * (k - 1) // 2) / den


def _first_violation(e, c):
    slack = 1 + mpfr(2) ** (-(get_precision() - 32))
    bound = mpfr(1)
    for k, ek in enumerate(e):
        if k:
            bound = bound * c / k
        if abs(ek) > bound * slack:
            return k
    return None


@at_precision
def check_ek_bound(e: ElemSymSequence | Sequence, c) -> int | None:
    """First ``k`` with ``|e_k| > c^k/k!``, or ``None`` when the bound holds throughout."""
    c = big(c)
    if not c > 0:
        raise ValueError("c must be positive")
    return _first_violation(_as_seq(e), c)
