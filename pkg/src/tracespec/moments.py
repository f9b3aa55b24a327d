"""Moments ``M_l = Tr K^l`` of Gaussian and polynomial-Gaussian kernels.

Gaussian kernels have the closed form ``M_l = (1 - beta)^l / (1 - beta^l)``.
For polynomial-Gaussian kernels the default path composes the kernel with
itself exactly (the family is closed under composition) and takes the trace
of every power, so a sweep up to order ``n`` costs ``n - 1`` compositions.
The one-shot ``l``-variable cyclic integral is kept as
:func:`polygauss_moment_wick`; its Wick expansion grows combinatorially with
``l`` and is only practical for small orders, where it serves as a check.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import NonHermitianResidual
from .gauss import GaussianIntegrand, compose, integrate
from .kernels import FactorKernel, GaussianKernel, PolyGaussianKernel, factor_trace, to_factor, trace
from .multipoly import MultiPoly
from .precision import at_precision, get_precision

__all__ = [
    "MomentSequence",
    "gaussian_beta",
    "gaussian_moment",
    "polygauss_moment",
    "polygauss_moment_wick",
    "moment_sequence",
    "clear_cache",
]


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``values[l - 1] = M_l`` for ``l = 1..max_order``."""

    values: tuple
    kernel: object
    max_order: int

    def __getitem__(self, ell: int):
        if not 1 <= ell <= self.max_order:
            raise IndexError(f"moment order {ell} outside 1..{self.max_order}")
        return self.values[ell - 1]

    def __len__(self):
        return self.max_order


@at_precision
def gaussian_beta(k: GaussianKernel) -> mpfr:
    """``beta = (sqrt(A) - sqrt(C)) / (sqrt(A) + sqrt(C))``."""
    A, _, C, _, _ = k.params()
    sa, sc = gmpy2.sqrt(A), gmpy2.sqrt(C)
    return (sa - sc) / (sa + sc)


@at_precision
def gaussian_moment(k: GaussianKernel, ell: int) -> mpfr:
    """Closed-form ``M_l`` of a Gaussian kernel (scaled by its trace when unnormalized)."""
    if ell < 1:
        raise ValueError("moment order must be at least 1")
    beta = gaussian_beta(k)
    m = (1 - beta) ** ell / (1 - beta**ell)
    if not k.normalized:
        m = m * trace(k) ** ell
    return m


def _realize(val, what: str) -> mpfr:
    if not isinstance(val, mpc):
        return val
    tol = mpfr(2) ** (-(get_precision() - 16))
    if abs(val.imag) > tol * abs(val.real):
        raise NonHermitianResidual(f"{what} has imaginary part {val.imag}")
    return val.real


class _PowerCache:
    """Per-(kernel, precision) store of ``[Tr K, ..., Tr K^j]`` and ``K^j``."""

    def __init__(self):
        self._lock = threading.Lock()
        self._store: dict = {}

    def traces(self, k, n: int) -> list:
        key = (k, get_precision())
        with self._lock:
            entry = self._store.get(key)
            if entry is None:
                f = to_factor(k)
                entry = {"base": f, "power": f, "traces": [factor_trace(f)]}
                self._store[key] = entry
            while len(entry["traces"]) < n:
                entry["power"] = compose(entry["power"], entry["base"])
                entry["traces"].append(factor_trace(entry["power"]))
            return list(entry["traces"][:n])

    def clear(self):
        with self._lock:
            self._store.clear()


_cache = _PowerCache()


def clear_cache() -> None:
    """Drop all cached kernel powers."""
    _cache.clear()


def _cacheable(k) -> bool:
    try:
        hash(k)
    except TypeError:
        return False
    return True


def _power_traces(k, n: int) -> list:
    if _cacheable(k):
        return _cache.traces(k, n)
    f = to_factor(k)
    out = [factor_trace(f)]
    cur = f
    for _ in range(1, n):
        cur = compose(cur, f)
        out.append(factor_trace(cur))
    return out


@at_precision
def polygauss_moment(k: PolyGaussianKernel | FactorKernel, ell: int) -> mpfr:
    """``M_l`` of a polynomial-Gaussian kernel via exact repeated composition."""
    if ell < 1:
        raise ValueError("moment order must be at least 1")
    return _realize(_power_traces(k, ell)[ell - 1], f"M_{ell}")


@at_precision
def polygauss_moment_wick(k: PolyGaussianKernel | FactorKernel, ell: int) -> mpfr:
    """``M_l`` as one cyclic ``l``-variable Gaussian integral.

    The integrand ``prod_j K(x_j, x_{j+1})`` (indices mod ``l``) is assembled as
    a single :class:`GaussianIntegrand` and evaluated by the Isserlis engine.
    """
    if ell < 1:
        raise ValueError("moment order must be at least 1")
    f = to_factor(k)
    a, b, c, d, e = f.exponents()
    M = [[mpfr(0)] * ell for _ in range(ell)]
    v = [mpfr(0)] * ell
    poly = MultiPoly.constant(ell, 1)
    for j in range(ell):
        p, q = j, (j + 1) % ell
        M[p][p] += a
        M[q][q] += b
        M[p][q] += c / 2
        M[q][p] += c / 2
        v[p] += d
        v[q] += e
        poly = poly * f.poly.embed(ell, (p, q))
    g = GaussianIntegrand(M=tuple(map(tuple, M)), v=tuple(v), F=mpfr(0), poly=poly)
    return _realize(integrate(g) * f.scale() ** ell, f"M_{ell}")


@at_precision
def moment_sequence(k, n: int) -> MomentSequence:
    """``M_1..M_n`` for any supported kernel."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(k, GaussianKernel):
        vals = tuple(gaussian_moment(k, ell) for ell in range(1, n + 1))
    else:
        vals = tuple(_realize(t, f"M_{i + 1}") for i, t in enumerate(_power_traces(k, n)))
    return MomentSequence(values=vals, kernel=k, max_order=n)
