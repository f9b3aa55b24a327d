"""Working precision for the extended-precision scalars.

All heavy arithmetic uses ``gmpy2.mpfr`` / ``gmpy2.mpc`` (MPFR, round to
nearest).  The package keeps its own notion of the current precision in a
context variable so that nested calls inherit the caller's setting:

>>> from tracespec.precision import precision, big
>>> with precision(128):
...     x = big("0.1")
>>> x.precision
128
"""

from __future__ import annotations

import contextlib
import contextvars
import functools
from fractions import Fraction
from numbers import Integral

import gmpy2
from gmpy2 import mpc, mpfr, mpq

DEFAULT_PRECISION = 256
MIN_PRECISION = 64

_current = contextvars.ContextVar("tracespec_precision", default=DEFAULT_PRECISION)


def get_precision() -> int:
    """Return the active working precision in bits."""
    return _current.get()


@contextlib.contextmanager
def precision(bits: int):
    """Run a block at ``bits`` bits of binary precision."""
    bits = int(bits)
    if bits < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits, got {bits}")
    token = _current.set(bits)
    try:
        with gmpy2.context(precision=bits):
            yield bits
    finally:
        _current.reset(token)


def at_precision(func):
    """Decorator adding a ``prec=`` keyword; ``None`` inherits the active precision."""

    @functools.wraps(func)
    def wrapper(*args, prec: int | None = None, **kwargs):
        bits = get_precision() if prec is None else prec
        with precision(bits):
            return func(*args, **kwargs)

    return wrapper


def eps() -> mpfr:
    """Unit roundoff 2**-P at the active precision."""
    return mpfr(2) ** (-get_precision())


def two_pow(k) -> mpfr:
    return mpfr(2) ** k


def big(x) -> mpfr:
    """Convert ``x`` to an ``mpfr`` at the active precision without a double round-trip.

    Strings may be decimal literals (``"1.16445"``) or ratios (``"3/2"``).
    """
    if isinstance(x, mpc):
        if x.imag != 0:
            raise TypeError(f"expected a real number, got {x}")
        return mpfr(x.real)
    if isinstance(x, mpfr):
        return mpfr(x)
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Integral):
        return mpfr(int(x))
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator))
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return big(Fraction(s))
        return mpfr(s)
    if isinstance(x, float):
        return mpfr(x)
    if isinstance(x, mpq):
        return mpfr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an extended-precision real")


def bigc(re, im=0):
    """Complex scalar; collapses to ``mpfr`` when the imaginary part is exactly zero."""
    re = big(re)
    im = big(im)
    if im == 0:
        return re
    return mpc(re, im)


def is_complex(x) -> bool:
    return isinstance(x, mpc)


def real_part(x) -> mpfr:
    return x.real if isinstance(x, mpc) else mpfr(x)


def imag_part(x) -> mpfr:
    return x.imag if isinstance(x, mpc) else mpfr(0)


def cabs(x) -> mpfr:
    return abs(x)


def csqrt(x):
    """Principal square root; real for non-negative reals, complex otherwise."""
    if isinstance(x, mpc):
        return gmpy2.sqrt(x)
    if x < 0:
        return gmpy2.sqrt(mpc(x, 0))
    return gmpy2.sqrt(x)


def cexp(x):
    return gmpy2.exp(x)


def conj(x):
    if isinstance(x, mpc):
        return x.conjugate()
    return x


def simplify(x, rel: mpfr | None = None):
    """Drop an imaginary part that is exactly zero (or below ``rel`` relative)."""
    if isinstance(x, mpc):
        if x.imag == 0:
            return x.real
        if rel is not None and abs(x.imag) <= rel * abs(x.real):
            return x.real
    return x


def fmt(x, digits: int = 20) -> str:
    """Scientific notation with ``digits`` significant digits (deterministic)."""
    if x is None:
        return ""
    if isinstance(x, mpc):
        return f"{fmt(x.real, digits)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag), digits)}j"
    x = mpfr(x) if not isinstance(x, mpfr) else x
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp10, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp10 - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"
