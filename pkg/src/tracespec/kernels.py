"""Self-adjoint Gaussian and polynomial-Gaussian kernels in one dimension.

A Gaussian kernel is

    K_G(x, y) = N0 exp{-A(x-y)^2 - iB(x^2-y^2) - C(x+y)^2 - iD(x-y) - E(x+y)}

with ``A, C > 0``.  A polynomial-Gaussian kernel multiplies it by

    P(x, y) = [A_P(x-y)^2 + iB_P(x^2-y^2) + C_P(x+y)^2 + iD_P(x-y) + E_P(x+y) + F_P] / N.

Both are mapped onto the general :class:`FactorKernel`

    K(x, y) = N P(x, y) exp(-A x^2 - B y^2 - C xy - D x - E y)

with complex exponent coefficients, which is the form used for composition,
decompositions and Hilbert-Schmidt norms.

Parameters are stored as given (strings, fractions, ints or ``mpfr``) and are
converted at the active working precision whenever they are used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Union

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import ValidationError
from .multipoly import MultiPoly
from .numerics import normal_moments
from .precision import at_precision, big, bigc, get_precision, precision

__all__ = [
    "GaussianKernel",
    "PolyGaussianKernel",
    "FactorKernel",
    "eval_kernel",
    "trace",
    "validate",
    "to_factor",
]


def _check_scale(name, given, derived):
    tol = mpfr(2) ** (-(get_precision() - 8))
    if abs(big(given) - derived) > tol * abs(derived):
        raise ValidationError(
            f"{name}={given} does not match the derived value {derived}",
            [f"{name} mismatch"],
        )


@dataclass(frozen=True, kw_only=True)
class GaussianKernel:
    """Self-adjoint 1-D Gaussian kernel.

    Parameters
    ----------
    A, C : real
        Width parameters; a valid kernel has ``A > 0`` and ``C > 0``.
    B, D, E : real, optional
        Phase and shift parameters (default 0).
    normalized : bool
        If True the scale is ``N0 = 2 sqrt(C/pi) exp(-E^2/(4C))`` (unit trace).
        If False the scale is ``N0`` when given, else 1.
    N0 : real, optional
        Stored scale.  For normalized kernels it is checked against the
        derived value to relative ``2**-(P-8)``.
    """

    A: Any
    C: Any
    B: Any = 0
    D: Any = 0
    E: Any = 0
    normalized: bool = True
    N0: Any = None

    def __post_init__(self):
        if self.normalized and self.N0 is not None:
            with precision(get_precision()):
                if big(self.C) > 0:
                    _check_scale("N0", self.N0, self.derived_n0())

    def params(self):
        """``(A, B, C, D, E)`` at the working precision."""
        return tuple(big(v) for v in (self.A, self.B, self.C, self.D, self.E))

    def derived_n0(self) -> mpfr:
        C, E = big(self.C), big(self.E)
        return 2 * gmpy2.sqrt(C / gmpy2.const_pi()) * gmpy2.exp(-E * E / (4 * C))

    def scale(self) -> mpfr:
        if self.normalized:
            return self.derived_n0()
        return mpfr(1) if self.N0 is None else big(self.N0)

    @property
    def is_complex(self) -> bool:
        return big(self.B) != 0 or big(self.D) != 0


@dataclass(frozen=True, kw_only=True)
class PolyGaussianKernel:
    """Quadratic self-adjoint polynomial times a unit-trace Gaussian kernel.

    Parameters
    ----------
    gauss : GaussianKernel
        The Gaussian part (its own normalization is always applied).
    A_P, B_P, C_P, D_P, E_P, F_P : real
        Polynomial parameters.
    normalized : bool
        If True the polynomial is divided by
        ``N = F_P + (C_P - E_P E)/(2C) + C_P E^2/(4C^2)`` so the trace is 1;
        otherwise by ``N`` when given, else by 1.
    N : real, optional
        Stored normalization, checked like ``GaussianKernel.N0``.
    """

    gauss: GaussianKernel
    A_P: Any = 0
    B_P: Any = 0
    C_P: Any = 0
    D_P: Any = 0
    E_P: Any = 0
    F_P: Any = 0
    normalized: bool = True
    N: Any = None

    def __post_init__(self):
        if self.normalized and self.N is not None:
            with precision(get_precision()):
                if big(self.gauss.C) > 0:
                    _check_scale("N", self.N, self.derived_n())

    def poly_params(self):
        return tuple(big(v) for v in (self.A_P, self.B_P, self.C_P, self.D_P, self.E_P, self.F_P))

    def derived_n(self) -> mpfr:
        _, _, C, _, E = self.gauss.params()
        _, _, CP, _, EP, FP = self.poly_params()
        return FP + (CP - EP * E) / (2 * C) + CP * E * E / (4 * C * C)

    def norm_divisor(self) -> mpfr:
        if self.normalized:
            return self.derived_n()
        return mpfr(1) if self.N is None else big(self.N)

    def scale(self) -> mpfr:
        return self.gauss.scale() / self.norm_divisor()

    @property
    def is_complex(self) -> bool:
        return self.gauss.is_complex or big(self.B_P) != 0 or big(self.D_P) != 0


@dataclass(frozen=True, kw_only=True)
class FactorKernel:
    """``N * poly(x, y) * exp(-A x^2 - B y^2 - C xy - D x - E y)``.

    Exponent coefficients and scale may be complex; the kernel need not be
    self-adjoint.  ``poly`` is a bivariate :class:`MultiPoly`.
    """

    A: Any
    B: Any
    C: Any
    D: Any
    E: Any
    N: Any = 1
    poly: MultiPoly = field(default_factory=lambda: MultiPoly.constant(2, 1))

    def __post_init__(self):
        if self.poly.nvars != 2:
            raise ValueError("FactorKernel prefactor must be bivariate")

    @cached_property
    def dense(self):
        """Prefactor coefficients as a 2-D object array, ``[i, j]`` for ``x**i y**j``."""
        return self.poly.to_dense2()

    def exponents(self):
        return tuple(_num(v) for v in (self.A, self.B, self.C, self.D, self.E))

    def scale(self):
        return _num(self.N)

    def dagger(self) -> "FactorKernel":
        """Kernel of the adjoint operator, ``conj(K(y, x))``."""
        return FactorKernel(
            A=_conj(_num(self.B)),
            B=_conj(_num(self.A)),
            C=_conj(_num(self.C)),
            D=_conj(_num(self.E)),
            E=_conj(_num(self.D)),
            N=_conj(_num(self.N)),
            poly=self.poly.swap2().conj(),
        )


Kernel = Union[GaussianKernel, PolyGaussianKernel, FactorKernel]


def _num(v):
    if isinstance(v, (mpfr, mpc)):
        return v
    if isinstance(v, complex):
        return bigc(v.real, v.imag)
    return big(v)


def _conj(v):
    return v.conjugate() if isinstance(v, mpc) else v


def _gauss_exponent(g: GaussianKernel):
    A, B, C, D, E = g.params()
    a = bigc(A + C, B)
    b = bigc(A + C, -B)
    c = 2 * (C - A)
    d = bigc(E, D)
    e = bigc(E, -D)
    return a, b, c, d, e


def _poly_numerator(k: PolyGaussianKernel) -> MultiPoly:
    AP, BP, CP, DP, EP, FP = k.poly_params()
    return MultiPoly(
        2,
        {
            (2, 0): bigc(AP + CP, BP),
            (0, 2): bigc(AP + CP, -BP),
            (1, 1): 2 * CP - 2 * AP,
            (1, 0): bigc(EP, DP),
            (0, 1): bigc(EP, -DP),
            (0, 0): FP,
        },
    )


@at_precision
def to_factor(k: Kernel) -> FactorKernel:
    """Rewrite any supported kernel in :class:`FactorKernel` form."""
    if isinstance(k, FactorKernel):
        return k
    if isinstance(k, GaussianKernel):
        a, b, c, d, e = _gauss_exponent(k)
        return FactorKernel(A=a, B=b, C=c, D=d, E=e, N=k.scale())
    if isinstance(k, PolyGaussianKernel):
        a, b, c, d, e = _gauss_exponent(k.gauss)
        return FactorKernel(A=a, B=b, C=c, D=d, E=e, N=k.scale(), poly=_poly_numerator(k))
    raise TypeError(f"unsupported kernel type {type(k).__name__}")


@at_precision
def eval_kernel(k: Kernel, x, y):
    """Pointwise kernel value including normalization."""
    f = to_factor(k)
    x, y = big(x), big(y)
    a, b, c, d, e = f.exponents()
    expo = -(a * x * x + b * y * y + c * x * y + d * x + e * y)
    val = f.scale() * f.poly(x, y) * gmpy2.exp(expo)
    if isinstance(val, mpc) and val.imag == 0:
        return val.real
    return val


@at_precision
def factor_trace(f: FactorKernel):
    """``int K(x, x) dx`` for a factor kernel (complex in general)."""
    a, b, c, d, e = f.exponents()
    alpha = a + b + c
    beta = d + e
    Q = f.dense
    deg = Q.shape[0] + Q.shape[1] - 2
    q = [mpfr(0)] * (deg + 1)
    for i in range(Q.shape[0]):
        for j in range(Q.shape[1]):
            if Q[i, j] != 0:
                q[i + j] = q[i + j] + Q[i, j]
    mean = -beta / (2 * alpha)
    var = 1 / (2 * alpha)
    m = normal_moments(mean, var, deg)
    mass = gmpy2.sqrt(gmpy2.const_pi() / alpha) * gmpy2.exp(beta * beta / (4 * alpha))
    return f.scale() * mass * sum((qk * mk for qk, mk in zip(q, m)), mpfr(0))


@at_precision
def trace(k: Kernel):
    """Closed-form trace ``int K(x, x) dx``; real for the self-adjoint types."""
    if isinstance(k, FactorKernel):
        return factor_trace(k)
    if isinstance(k, GaussianKernel):
        _, _, C, _, E = k.params()
        return k.scale() * gmpy2.sqrt(gmpy2.const_pi() / (4 * C)) * gmpy2.exp(E * E / (4 * C))
    if isinstance(k, PolyGaussianKernel):
        return trace(k.gauss) * k.derived_n() / k.norm_divisor()
    raise TypeError(f"unsupported kernel type {type(k).__name__}")


@at_precision
def validate(k: Kernel) -> list:
    """List of violated invariants; an empty list means the kernel is valid."""
    out = []
    if isinstance(k, GaussianKernel):
        A, _, C, _, _ = k.params()
        if not A > 0:
            out.append("A > 0")
        if not C > 0:
            out.append("C > 0")
        if not k.normalized and k.N0 is not None and big(k.N0) == 0:
            out.append("N0 != 0")
    elif isinstance(k, PolyGaussianKernel):
        out.extend(validate(k.gauss))
        if not out:
            if k.derived_n() == 0 or k.norm_divisor() == 0:
                out.append("N != 0")
    elif isinstance(k, FactorKernel):
        a, b, c, _, _ = k.exponents()
        ra, rb, rc = (v.real if isinstance(v, mpc) else v for v in (a, b, c))
        if not (ra > 0 and ra * rb - rc * rc / 4 > 0):
            out.append("Re quadratic form positive definite")
        if k.poly.is_zero():
            out.append("prefactor nonzero")
    else:
        raise TypeError(f"unsupported kernel type {type(k).__name__}")
    return out
