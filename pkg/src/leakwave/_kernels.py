"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

Both implementations accumulate in the same order (band index ascending,
no fastmath) so results agree to the last few ULP; the test suite pins
them against each other.
"""

from __future__ import annotations

import numpy as np

from ._backend import BACKEND, HAVE_NUMBA

if HAVE_NUMBA:
    from numba import njit, prange


def _cosine_bank_numpy(t, amps, omegas, phases, out):
    for j in range(amps.size):
        out += amps[j] * np.cos(omegas[j] * t + phases[j])
    return out


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _cosine_bank_numba(t, amps, omegas, phases, out):  # pragma: no cover
        for i in prange(t.size):
            acc = 0.0
            for j in range(amps.size):
                acc += amps[j] * np.cos(omegas[j] * t[i] + phases[j])
            out[i] += acc
        return out


def cosine_bank(t: np.ndarray, amps: np.ndarray, omegas: np.ndarray,
                phases: np.ndarray) -> np.ndarray:
    """Sum of cosines  sum_j amps[j] * cos(omegas[j] * t + phases[j])."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    omegas = np.ascontiguousarray(omegas, dtype=np.float64)
    phases = np.ascontiguousarray(phases, dtype=np.float64)
    out = np.zeros_like(t)
    if BACKEND == "numba":
        return _cosine_bank_numba(t, amps, omegas, phases, out)
    return _cosine_bank_numpy(t, amps, omegas, phases, out)


def _solve4_batch_numpy(a, b):
    return np.linalg.solve(a, b[..., None])[..., 0]


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _solve4_batch_numba(a, b):  # pragma: no cover
        n = a.shape[0]
        m = a.shape[1]
        x = np.empty((n, m), dtype=np.complex128)
        for idx in prange(n):
            lu = a[idx].copy()
            rhs = b[idx].copy()
            # forward elimination with partial pivoting
            for col in range(m):
                piv = col
                best = abs(lu[col, col])
                for row in range(col + 1, m):
                    mag = abs(lu[row, col])
                    if mag > best:
                        best = mag
                        piv = row
                if piv != col:
                    for c2 in range(m):
                        tmp = lu[col, c2]
                        lu[col, c2] = lu[piv, c2]
                        lu[piv, c2] = tmp
                    tmpv = rhs[col]
                    rhs[col] = rhs[piv]
                    rhs[piv] = tmpv
                for row in range(col + 1, m):
                    f = lu[row, col] / lu[col, col]
                    if f != 0:
                        for c2 in range(col, m):
                            lu[row, c2] -= f * lu[col, c2]
                        rhs[row] -= f * rhs[col]
            # back substitution
            for col in range(m - 1, -1, -1):
                acc = rhs[col]
                for c2 in range(col + 1, m):
                    acc -= lu[col, c2] * x[idx, c2]
                x[idx, col] = acc / lu[col, col]
        return x


def solve_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a stack of small dense complex systems a[i] @ x[i] = b[i].

    a: (n, m, m) complex, b: (n, m) complex -> (n, m) complex.
    Direct solve with partial pivoting on both backends.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if BACKEND == "numba":
        return _solve4_batch_numba(a, b)
    return _solve4_batch_numpy(a, b)
