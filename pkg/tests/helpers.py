"""Small shared helpers for the test modules."""

import random

import gmpy2
from gmpy2 import mpfr


def rel_err(a, b):
    d = abs(a - b)
    s = max(abs(a), abs(b))
    return d / s if s else d


def tol(bits_lost: int):
    """``2**-(P - bits_lost)`` at the current working precision."""
    return mpfr(2) ** (-(gmpy2.get_context().precision - bits_lost))


def random_points(count: int, seed: int, spread: float = 1.5):
    rng = random.Random(seed)
    return [(mpfr(rng.uniform(-spread, spread)), mpfr(rng.uniform(-spread, spread))) for _ in range(count)]
