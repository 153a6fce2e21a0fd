"""Numeric kernels for the hot per-frame path.

Three operations dominate a comparison tick: the pairwise quaternion
dissimilarity matrix, the DTW cost-table fill, and component-wise Kalman
smoothing. Each exists twice, as a numba ``@njit`` kernel and as a pure
numpy fallback with identical semantics. The active backend is chosen at
import time from the ``STROKECOACH_BACKEND`` environment variable
(``numba`` or ``numpy``; default numba when importable).

All kernels take and return float64 arrays and never touch shared state.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("STROKECOACH_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"STROKECOACH_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

_numba_ok = False
if _requested != "numpy":
    try:
        from numba import njit

        _numba_ok = True
    except ImportError:
        if _requested == "numba":
            raise
        _numba_ok = False


# ---------------------------------------------------------------------------
# numpy implementations


def diss_matrix_numpy(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Pairwise dissimilarity 1 - |<q1[i,k], q2[j,k]>| per channel.

    q1: (N, K, 4), q2: (M, K, 4) unit quaternions. Returns (N, M, K).
    """
    dots = np.einsum("ikc,jkc->ijk", q1, q2)
    return 1.0 - np.minimum(np.abs(dots), 1.0)


def dtw_fill_numpy(diss: np.ndarray) -> np.ndarray:
    """Accumulated DTW cost table with a virtual infinity boundary.

    diss: (N, M, K) local costs. Returns (N+1, M+1, K) where cell [i, j, k]
    (1-based in i, j) is the optimal cost of warping the first i elements of
    the query onto the first j of the reference for channel k; row 0 and
    column 0 are the boundary (inf except [0, 0] = 0).
    """
    n, m, k = diss.shape
    cost = np.full((n + 1, m + 1, k), np.inf)
    cost[0, 0, :] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = np.minimum(cost[i - 1, j], cost[i, j - 1])
            np.minimum(best, cost[i - 1, j - 1], out=best)
            cost[i, j] = diss[i - 1, j - 1] + best
    return cost


def kalman_smooth_numpy(
    z: np.ndarray, process_var: float, measure_var: float, init_var: float
) -> np.ndarray:
    """Constant-position scalar Kalman filter applied to each column of z.

    z: (T, C) measurements. State per column is the position itself;
    prediction inflates variance by process_var, update blends the new
    measurement weighted by measure_var. Returns the (T, C) filtered track.
    """
    t, c = z.shape
    out = np.empty((t, c))
    x = z[0].copy()
    out[0] = x
    p = init_var
    for i in range(1, t):
        p_pred = p + process_var
        gain = p_pred / (p_pred + measure_var)
        x = x + gain * (z[i] - x)
        p = (1.0 - gain) * p_pred
        out[i] = x
    return out


# ---------------------------------------------------------------------------
# numba implementations

if _numba_ok:

    @njit(cache=True, fastmath=True)
    def diss_matrix_numba(q1, q2):  # pragma: no cover - exercised via dispatch
        n = q1.shape[0]
        m = q2.shape[0]
        k = q1.shape[1]
        out = np.empty((n, m, k))
        for i in range(n):
            for j in range(m):
                for a in range(k):
                    dot = (
                        q1[i, a, 0] * q2[j, a, 0]
                        + q1[i, a, 1] * q2[j, a, 1]
                        + q1[i, a, 2] * q2[j, a, 2]
                        + q1[i, a, 3] * q2[j, a, 3]
                    )
                    if dot < 0.0:
                        dot = -dot
                    if dot > 1.0:
                        dot = 1.0
                    out[i, j, a] = 1.0 - dot
        return out

    @njit(cache=True)
    def dtw_fill_numba(diss):  # pragma: no cover - exercised via dispatch
        n = diss.shape[0]
        m = diss.shape[1]
        k = diss.shape[2]
        cost = np.full((n + 1, m + 1, k), np.inf)
        for a in range(k):
            cost[0, 0, a] = 0.0
        for i in range(1, n + 1):
            for j in range(1, m + 1):
                for a in range(k):
                    best = cost[i - 1, j, a]
                    if cost[i, j - 1, a] < best:
                        best = cost[i, j - 1, a]
                    if cost[i - 1, j - 1, a] < best:
                        best = cost[i - 1, j - 1, a]
                    cost[i, j, a] = diss[i - 1, j - 1, a] + best
        return cost

    @njit(cache=True)
    def kalman_smooth_numba(z, process_var, measure_var, init_var):
        # pragma: no cover - exercised via dispatch
        t = z.shape[0]
        c = z.shape[1]
        out = np.empty((t, c))
        x = np.empty(c)
        for a in range(c):
            x[a] = z[0, a]
            out[0, a] = x[a]
        p = init_var
        for i in range(1, t):
            p_pred = p + process_var
            gain = p_pred / (p_pred + measure_var)
            for a in range(c):
                x[a] = x[a] + gain * (z[i, a] - x[a])
                out[i, a] = x[a]
            p = (1.0 - gain) * p_pred
        return out

else:
    diss_matrix_numba = None
    dtw_fill_numba = None
    kalman_smooth_numba = None


# ---------------------------------------------------------------------------
# dispatch

if _numba_ok:
    BACKEND = "numba"
    diss_matrix = diss_matrix_numba
    dtw_fill = dtw_fill_numba
    kalman_smooth = kalman_smooth_numba
else:
    BACKEND = "numpy"
    diss_matrix = diss_matrix_numpy
    dtw_fill = dtw_fill_numpy
    kalman_smooth = kalman_smooth_numpy


def backend_name() -> str:
    return BACKEND


def warmup() -> None:
    """Trigger JIT compilation so first-use latency lands at import, not mid-session."""
    q = np.zeros((2, 1, 4))
    q[:, :, 0] = 1.0
    e = diss_matrix(q, q)
    dtw_fill(e)
    kalman_smooth(np.zeros((2, 4)), 1e-3, 1e-2, 1.0)
