"""Independent reference spectra.

Gaussian kernels have the exact spectrum ``lambda_i = (1 - beta) beta^i``.
Other kernels are discretized by the Nystrom method on Gauss-Hermite nodes,

    B_ij = sqrt(W_i) K(x_i, x_j) sqrt(W_j),   W_j = s w_j exp(t_j^2),

where ``x = x0 + s t`` maps the standard nodes ``t`` onto the kernel's
envelope.  ``B`` is similar to the Nystrom matrix, so its eigenvalues
approximate the operator spectrum; they are computed by cyclic Jacobi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ._accel import jacobi_float, jacobi_numpy
from .errors import NonHermitianResidual
from .kernels import GaussianKernel, PolyGaussianKernel, to_factor, trace
from .moments import gaussian_beta
from .precision import at_precision, get_precision

__all__ = [
    "ExactGaussianSpectrum",
    "NystromModel",
    "exact_gaussian_spectrum",
    "gauss_hermite",
    "gauss_hermite_scaled",
    "jacobi_eigenvalues",
    "nystrom_spectrum",
    "oracle_quantities",
    "envelope_scale",
]


@dataclass(frozen=True)
class ExactGaussianSpectrum:
    beta: mpfr
    eigenvalues: tuple

    @property
    def l1_norm(self) -> mpfr:
        """``sum_i |lambda_i|`` over all ``i``: ``(1 - beta)/(1 - |beta|)``."""
        b = self.beta
        return (1 - b) / (1 - abs(b))


@dataclass(frozen=True)
class NystromModel:
    """Discretized operator; ``eigenvalues`` sorted by decreasing magnitude."""

    m: int
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    eigenvalues: np.ndarray
    scale: float
    shift: float


@at_precision
def exact_gaussian_spectrum(k: GaussianKernel, count: int) -> ExactGaussianSpectrum:
    """First ``count`` eigenvalues of a Gaussian kernel, in index order."""
    if count < 1:
        raise ValueError("count must be at least 1")
    beta = gaussian_beta(k)
    t = trace(k)
    lam = tuple(t * (1 - beta) * beta**i for i in range(count))
    return ExactGaussianSpectrum(beta=beta, eigenvalues=lam)


def jacobi_eigenvalues(a, tol=None, use_numba=None):
    """Eigenvalues of a real symmetric matrix (float64 or ``object``/mpfr entries).

    Extended-precision input stops at off-diagonal norm ``2**-(P/2)`` relative
    and then sweeps once more; float64 input uses ``1e-14``.
    """
    a = np.asarray(a)
    if a.dtype == object:
        with gmpy2.context(precision=get_precision()):
            tol = mpfr(2) ** (-(get_precision() // 2)) if tol is None else tol
            vals, _, _ = jacobi_numpy(a, tol=tol, sqrt=gmpy2.sqrt)
        return vals
    vals, _, _ = jacobi_float(a, tol=1e-14 if tol is None else tol, use_numba=use_numba)
    return vals


def _hermite_functions(x, m):
    """``phi_0..phi_m`` (orthonormal Hermite functions) at ``x``."""
    if isinstance(x, (mpfr, mpc)):
        pi = gmpy2.const_pi()
        phi = [gmpy2.exp(-x * x / 2) / gmpy2.root(pi, 4)]
        sqrt = gmpy2.sqrt
    else:
        phi = [np.exp(-x * x / 2) / math.pi**0.25]
        sqrt = math.sqrt
    if m >= 1:
        phi.append(sqrt(2) * x * phi[0])
    for k in range(1, m):
        phi.append(sqrt(mpfr(2) / (k + 1) if isinstance(x, mpfr) else 2 / (k + 1)) * x * phi[k]
                   - sqrt(mpfr(k) / (k + 1) if isinstance(x, mpfr) else k / (k + 1)) * phi[k - 1])
    return phi


def _gh_core(m: int, exact: bool):
    if m < 1:
        raise ValueError("m must be at least 1")
    if exact:
        J = np.full((m, m), mpfr(0), dtype=object)
        for k in range(1, m):
            J[k - 1, k] = J[k, k - 1] = gmpy2.sqrt(mpfr(k) / 2)
        t = sorted(jacobi_eigenvalues(J))
        sqrt = gmpy2.sqrt
    else:
        J = np.zeros((m, m))
        for k in range(1, m):
            J[k - 1, k] = J[k, k - 1] = math.sqrt(k / 2)
        t = sorted(jacobi_eigenvalues(J))
        sqrt = math.sqrt
    nodes = []
    scaled = []
    for x in t:
        # Newton polish on phi_m, phi_m' = sqrt(2m) phi_{m-1} - x phi_m
        for _ in range(8):
            phi = _hermite_functions(x, m)
            d = sqrt(2 * m) * phi[m - 1] - x * phi[m]
            if d == 0:
                break
            step = phi[m] / d
            x = x - step
            if abs(step) <= (mpfr(2) ** -get_precision() if exact else 1e-17) * max(1, abs(x)):
                break
        phi = _hermite_functions(x, m - 1)
        nodes.append(x)
        scaled.append(1 / sum(p * p for p in phi))
    # enforce exact symmetry of the rule
    for i in range(m // 2):
        j = m - 1 - i
        h = (nodes[j] - nodes[i]) / 2
        nodes[i], nodes[j] = -h, h
        sw = (scaled[i] + scaled[j]) / 2
        scaled[i] = scaled[j] = sw
    if m % 2:
        nodes[m // 2] = mpfr(0) if exact else 0.0
    return nodes, scaled


@at_precision
def gauss_hermite_scaled(m: int, exact: bool = False):
    """Nodes ``t_i`` and scaled weights ``w_i exp(t_i^2)`` of the ``m``-point rule."""
    nodes, scaled = _gh_core(m, exact)
    if exact:
        return nodes, scaled
    return np.array(nodes, dtype=float), np.array(scaled, dtype=float)


@at_precision
def gauss_hermite(m: int, exact: bool = False):
    """Gauss-Hermite nodes and weights for ``int f(t) exp(-t^2) dt``.

    Nodes come from the eigenvalues of the Golub-Welsch Jacobi matrix
    (off-diagonal ``sqrt(k/2)``), polished by Newton on the Hermite function
    ``phi_m``; weights are ``1/sum_{k<m} phi_k(t)^2 * exp(-t^2)``.  With
    ``exact=True`` the result is a pair of ``mpfr`` lists at working precision.
    """
    nodes, scaled = _gh_core(m, exact)
    if exact:
        return nodes, [s * gmpy2.exp(-x * x) for x, s in zip(nodes, scaled)]
    t = np.array(nodes, dtype=float)
    return t, np.array(scaled, dtype=float) * np.exp(-t * t)


def envelope_scale(k) -> tuple:
    """``(s, x0)``: node scale ``(4 sqrt(AC))^(-1/2)`` and centre ``-E/(4C)``.

    ``4 sqrt(AC)`` is the width parameter of the Gaussian kernel's
    Hermite-function eigenbasis, so the quadrature is matched to it.
    """
    g = k.gauss if isinstance(k, PolyGaussianKernel) else k
    if not isinstance(g, GaussianKernel):
        raise TypeError("envelope needs a Gaussian or polynomial-Gaussian kernel; pass scale and shift")
    A, _, C, _, E = (float(v) for v in g.params())
    return 1.0 / math.sqrt(4.0 * math.sqrt(A * C)), -E / (4.0 * C)


def _kernel_matrix(f, xs):
    a, b, c, d, e = (complex(v) for v in f.exponents())
    N = complex(f.scale())
    X = xs[:, None]
    Y = xs[None, :]
    expo = -(a * X * X + b * Y * Y + c * X * Y + d * X + e * Y)
    P = np.zeros_like(expo)
    for (i, j), coef in f.poly.terms.items():
        P = P + complex(coef) * X**i * Y**j
    return N * P * np.exp(expo)


@at_precision
def nystrom_spectrum(k, m: int, scale=None, shift=None, use_numba=None) -> NystromModel:
    """Nystrom discretization on ``m`` Gauss-Hermite nodes and its eigenvalues.

    Raises
    ------
    NonHermitianResidual
        If the symmetrized matrix is not Hermitian to ``1e-10`` relative.
    """
    if m < 8:
        raise ValueError("m must be at least 8")
    if scale is None or shift is None:
        s0, x00 = envelope_scale(k)
    s = s0 if scale is None else float(scale)
    x0 = x00 if shift is None else float(shift)
    t, ws = gauss_hermite_scaled(m)
    xs = x0 + s * t
    W = s * ws
    f = to_factor(k)
    Kmat = _kernel_matrix(f, xs)
    rw = np.sqrt(W)
    B = rw[:, None] * Kmat * rw[None, :]
    norm = np.linalg.norm(B)
    if np.max(np.abs(B - B.conj().T)) > 1e-10 * norm:
        raise NonHermitianResidual("discretized kernel is not Hermitian")
    B = (B + B.conj().T) / 2
    if np.max(np.abs(B.imag)) > 0:
        # real embedding: every eigenvalue appears twice
        emb = np.block([[B.real, -B.imag], [B.imag, B.real]])
        vals = np.sort(jacobi_eigenvalues(emb, use_numba=use_numba))[::2]
    else:
        B = B.real
        vals = jacobi_eigenvalues(B, use_numba=use_numba)
    order = np.argsort(-np.abs(vals), kind="stable")
    return NystromModel(
        m=m, nodes=xs, weights=W, matrix=B, eigenvalues=np.asarray(vals)[order], scale=s, shift=x0
    )


def oracle_quantities(model: NystromModel):
    """``(l1_norm, lambda_min, negativity, trace)`` of the discrete spectrum.

    ``lambda_min`` is ``min(0, min lambda)`` and the negativity is the summed
    magnitude of the negative eigenvalues.
    """
    lam = np.asarray(model.eigenvalues, dtype=float)
    l1 = float(np.sum(np.abs(lam)))
    lmin = float(min(0.0, lam.min()))
    neg = float(-np.sum(lam[lam < 0]))
    return l1, lmin, neg, float(np.sum(lam))
