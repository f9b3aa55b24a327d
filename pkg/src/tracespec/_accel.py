"""Cyclic Jacobi eigenvalue kernels.

The float64 path is compiled with numba when it is importable and the
environment variable ``TRACESPEC_DISABLE_NUMBA`` is unset (or ``0``).  The
pure-numpy path vectorizes each rotation over rows and columns; it also runs
on ``object`` arrays of ``gmpy2.mpfr`` entries, which is how the
extended-precision solver is implemented.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("TRACESPEC_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by TRACESPEC_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def _rotation(app, aqq, apq, sqrt):
    theta = (aqq - app) / (2 * apq)
    if abs(theta) > 1e150:
        t = 1 / (2 * theta)
    else:
        t = 1 / (abs(theta) + sqrt(theta * theta + 1))
        if theta < 0:
            t = -t
    c = 1 / sqrt(1 + t * t)
    return c, t * c


@njit(cache=True)
def _offdiag_nb(a):
    n = a.shape[0]
    s = 0.0
    for p in range(n):
        for q in range(p + 1, n):
            s += a[p, q] * a[p, q]
    return math.sqrt(2.0 * s)


@njit(cache=True)
def _sweep_nb(a, v, want_v):
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 1.0 / (2.0 * theta)
            else:
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            for r in range(n):
                arp = a[r, p]
                arq = a[r, q]
                a[r, p] = c * arp - s * arq
                a[r, q] = s * arp + c * arq
            for r in range(n):
                apr = a[p, r]
                aqr = a[q, r]
                a[p, r] = c * apr - s * aqr
                a[q, r] = s * apr + c * aqr
            a[p, q] = 0.0
            a[q, p] = 0.0
            if want_v:
                for r in range(n):
                    vrp = v[r, p]
                    vrq = v[r, q]
                    v[r, p] = c * vrp - s * vrq
                    v[r, q] = s * vrp + c * vrq


@njit(cache=True)
def _jacobi_nb(a, v, want_v, tol, max_sweeps):
    scale = math.sqrt(np.sum(a * a))
    sweeps = 0
    while sweeps < max_sweeps:
        if _offdiag_nb(a) <= tol * scale:
            _sweep_nb(a, v, want_v)
            sweeps += 1
            break
        _sweep_nb(a, v, want_v)
        sweeps += 1
    return sweeps


def _offdiag_np(a):
    off = a - np.diag(np.diag(a))
    return np.sum(off * off)


def _sweep_np(a, v, sqrt, zero):
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0:
                continue
            c, s = _rotation(a[p, p], a[q, q], apq, sqrt)
            ap = a[:, p].copy()
            aq = a[:, q]
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            ap = a[p, :].copy()
            aq = a[q, :]
            a[p, :] = ap * c - aq * s
            a[q, :] = ap * s + aq * c
            a[p, q] = zero
            a[q, p] = zero
            if v is not None:
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = vp * c - vq * s
                v[:, q] = vp * s + vq * c


def jacobi_numpy(a, want_vectors=False, tol=1e-14, max_sweeps=100, sqrt=math.sqrt):
    """Numpy cyclic Jacobi; works for float64 and ``object`` (mpfr) arrays.

    Iterates until the off-diagonal Frobenius norm is at most ``tol`` times
    the Frobenius norm of the input, then performs one more sweep.
    Returns ``(eigenvalues, eigenvectors or None, sweeps)``.
    """
    a = np.array(a, copy=True)
    n = a.shape[0]
    zero = a.dtype.type(0) if a.dtype != object else a[0, 0] * 0
    if want_vectors:
        v = np.empty_like(a)
        v[...] = zero
        for i in range(n):
            v[i, i] = zero + 1
    else:
        v = None
    scale2 = np.sum(a * a)
    tol2 = tol * tol * scale2
    sweeps = 0
    while sweeps < max_sweeps:
        done = _offdiag_np(a) <= tol2
        _sweep_np(a, v, sqrt, zero)
        sweeps += 1
        if done:
            break
    return np.diag(a).copy(), v, sweeps


def jacobi_float(a, want_vectors=False, tol=1e-14, max_sweeps=100, use_numba=None):
    """Float64 cyclic Jacobi, numba-compiled unless disabled."""
    a = np.array(a, dtype=np.float64, copy=True)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        n = a.shape[0]
        v = np.eye(n) if want_vectors else np.zeros((1, 1))
        sweeps = _jacobi_nb(a, v, want_vectors, tol, max_sweeps)
        return np.diag(a).copy(), (v if want_vectors else None), sweeps
    return jacobi_numpy(a, want_vectors=want_vectors, tol=tol, max_sweeps=max_sweeps)
