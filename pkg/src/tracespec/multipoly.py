"""Sparse multivariate polynomials with extended-precision coefficients."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np
from gmpy2 import mpc, mpfr

from .precision import big


def _coerce(c):
    if isinstance(c, (mpfr, mpc)):
        return c
    if isinstance(c, complex):
        return mpc(c)
    return big(c)


class MultiPoly:
    """Polynomial in ``nvars`` variables stored as ``{exponents: coefficient}``.

    Treated as immutable; arithmetic returns new objects.  Zero coefficients
    are never stored.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | Iterable = ()):
        self.nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        out = {}
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for {self.nvars} variables")
            c = _coerce(c)
            if exps in out:
                c = out[exps] + c
            out[exps] = c
        self.terms = {k: v for k, v in out.items() if v != 0}

    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def from_dense2(cls, arr) -> "MultiPoly":
        """From a 2-D coefficient array ``arr[i, j]`` of ``x**i * y**j``."""
        terms = {}
        rows, cols = arr.shape
        for i in range(rows):
            for j in range(cols):
                c = arr[i, j]
                if c != 0:
                    terms[(i, j)] = c
        return cls(2, terms)

    def to_dense2(self, shape=None) -> np.ndarray:
        if self.nvars != 2:
            raise ValueError("to_dense2 needs a 2-variable polynomial")
        if shape is None:
            dx = max((e[0] for e in self.terms), default=0)
            dy = max((e[1] for e in self.terms), default=0)
            shape = (dx + 1, dy + 1)
        arr = np.full(shape, mpfr(0), dtype=object)
        for (i, j), c in self.terms.items():
            arr[i, j] = c
        return arr

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiPoly) else -_coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = _coerce(other)
            return MultiPoly(self.nvars, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                out[e] = out[e] + v if e in out else v
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MultiPoly.constant(self.nvars, 1)
        for _ in range(int(k)):
            out = out * self
        return out

    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")

    def conj(self) -> "MultiPoly":
        """Conjugate the coefficients (the polynomial's conjugate on real points)."""
        return MultiPoly(
            self.nvars,
            {e: (c.conjugate() if isinstance(c, mpc) else c) for e, c in self.terms.items()},
        )

    def embed(self, nvars: int, index_map) -> "MultiPoly":
        """Re-index variables: old variable ``i`` becomes new variable ``index_map[i]``."""
        out: dict = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, k in enumerate(e):
                ne[index_map[i]] += k
            ne = tuple(ne)
            out[ne] = out[ne] + c if ne in out else c
        return MultiPoly(nvars, out)

    def swap2(self) -> "MultiPoly":
        """Exchange the two variables of a bivariate polynomial."""
        return self.embed(2, (1, 0))

    def __call__(self, *point):
        if len(point) != self.nvars:
            raise ValueError("wrong number of coordinates")
        total = mpfr(0)
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * x**k
            total = total + t
        return total

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {len(self.terms)} terms, degree {self.degree()})"
