"""Reference kernels used throughout the tests, benchmarks and CLI."""

from __future__ import annotations

from fractions import Fraction

from .kernels import GaussianKernel, PolyGaussianKernel

__all__ = ["gaussian_1_4", "polygauss_family", "PRESETS", "preset"]


def gaussian_1_4() -> GaussianKernel:
    """Gaussian kernel with ``A = 1, C = 4`` (``beta = -1/3``)."""
    return GaussianKernel(A=1, C=4)


def polygauss_family(C_P) -> PolyGaussianKernel:
    """``A = 3/2, C = 1, A_P = -1, F_P = 1`` with free ``C_P``.

    ``C_P = 1`` is positive semidefinite, ``C_P = 5`` and ``C_P = 40`` are not.
    """
    return PolyGaussianKernel(gauss=GaussianKernel(A=Fraction(3, 2), C=1), A_P=-1, C_P=C_P, F_P=1)


PRESETS = {
    "gauss-1-4": gaussian_1_4,
    "polygauss-cp1": lambda: polygauss_family(1),
    "polygauss-cp5": lambda: polygauss_family(5),
    "polygauss-cp40": lambda: polygauss_family(40),
}


def preset(name: str):
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
