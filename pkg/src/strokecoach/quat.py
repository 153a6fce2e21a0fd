"""Unit-quaternion primitives, the stroke dissimilarity metric, and
Kalman smoothing of orientation streams.

Quaternions are float64 arrays ``[w, x, y, z]``. A value is *canonical*
when w > 0, or w == 0 and the first nonzero of x, y, z is positive; q and
-q encode the same rotation, so canonicalization picks one representative
per rotation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateQuaternion, EmptySequence

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

_NORM_FLOOR = 1e-9


def quat(w: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def normalize(q: np.ndarray) -> np.ndarray:
    """Scale q to unit norm.

    Raises DegenerateQuaternion when the norm is at or below 1e-9.
    """
    q = np.asarray(q, dtype=float)
    n = np.sqrt(float(q @ q))
    if n <= _NORM_FLOOR:
        raise DegenerateQuaternion(f"norm {n:.3e} too small to normalize")
    return q / n


def canonicalize(q: np.ndarray) -> np.ndarray:
    """Return q or -q, whichever is the canonical representative."""
    q = np.asarray(q, dtype=float)
    w = q[0]
    if w > 0.0:
        return q
    if w < 0.0:
        return -q
    for component in q[1:]:
        if component > 0.0:
            return q
        if component < 0.0:
            return -q
    return q


def canonicalize_rows(arr: np.ndarray) -> np.ndarray:
    """Canonicalize an (..., 4) stack of quaternions, rowwise."""
    arr = np.asarray(arr, dtype=float)
    flat = arr.reshape(-1, 4).copy()
    sign = np.sign(flat[:, 0])
    undecided = np.flatnonzero(sign == 0.0)
    for i in undecided:
        s = 1.0
        for component in flat[i, 1:]:
            if component != 0.0:
                s = np.sign(component)
                break
        sign[i] = s
    flat *= sign[:, None]
    return flat.reshape(arr.shape)


def quaternion_dissimilarity(q1: np.ndarray, q2: np.ndarray) -> float:
    """1 minus the absolute inner product of two unit quaternions.

    Zero iff the rotations coincide, 1 - cos(theta/2) for a relative
    rotation of theta, at most 1 for opposing rotations. Symmetric and
    invariant to the sign of either operand.
    """
    q1 = normalize(q1)
    q2 = normalize(q2)
    dot = abs(float(q1 @ q2))
    return 1.0 - min(dot, 1.0)


def from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    """Rotation of angle_rad about axis, as a canonical unit quaternion."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n <= _NORM_FLOOR:
        raise DegenerateQuaternion("rotation axis has zero length")
    half = 0.5 * angle_rad
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = (np.sin(half) / n) * axis
    return canonicalize(normalize(q))


def multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def rotate_vector(q: np.ndarray, v) -> np.ndarray:
    """Apply the rotation q to a 3-vector."""
    v = np.asarray(v, dtype=float)
    w = q[0]
    u = q[1:]
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def rotation_angle_between(q1: np.ndarray, q2: np.ndarray) -> float:
    """Angle in radians of the relative rotation between q1 and q2."""
    dot = min(abs(float(np.asarray(q1) @ np.asarray(q2))), 1.0)
    return 2.0 * np.arccos(dot)


def slerp(q0: np.ndarray, q1: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation from q0 (t=0) to q1 (t=1), shortest arc."""
    q0 = normalize(q0)
    q1 = normalize(q1)
    dot = float(q0 @ q1)
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 0.9995:
        # nearly parallel: lerp then renormalize avoids sin(0)/sin(0)
        return canonicalize(normalize(q0 + t * (q1 - q0)))
    theta = np.arccos(min(dot, 1.0))
    s0 = np.sin((1.0 - t) * theta) / np.sin(theta)
    s1 = np.sin(t * theta) / np.sin(theta)
    return canonicalize(normalize(s0 * q0 + s1 * q1))


@dataclass(frozen=True)
class KalmanParams:
    """Noise model for the constant-position orientation filter.

    The smoother runs four independent scalar filters, one per quaternion
    component, then renormalizes. All variances must be strictly positive.
    """

    process_noise: float = 1e-3
    measurement_noise: float = 1e-2
    initial_covariance: float = 1.0

    def __post_init__(self):
        for name in ("process_noise", "measurement_noise", "initial_covariance"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_KALMAN = KalmanParams()


def _sign_continuous_stack(arr: np.ndarray) -> np.ndarray:
    """Flip rows of a (T, J, 4) stack into one continuous hemisphere branch.

    Row 0 is made canonical per joint; each later row is flipped wherever
    its inner product with the (already adjusted) previous row is negative.
    The gain schedule of the scalar filter is data-independent, so this is
    the only sequential preprocessing the smoother needs.
    """
    first = canonicalize_rows(arr[0])
    s0 = np.where(np.einsum("jc,jc->j", first, arr[0]) < 0.0, -1.0, 1.0)
    t, j, _ = arr.shape
    if t == 1:
        return first[None, :, :].copy()
    dots = np.einsum("tjc,tjc->tj", arr[1:], arr[:-1])
    steps = np.where(dots < 0.0, -1.0, 1.0)
    signs = s0[None, :] * np.vstack([np.ones((1, j)), np.cumprod(steps, axis=0)])
    return arr * signs[:, :, None]


def _smooth_stack(arr: np.ndarray, params: KalmanParams) -> np.ndarray:
    t, j, _ = arr.shape
    norms = np.linalg.norm(arr, axis=2)
    if np.any(norms <= _NORM_FLOOR):
        raise DegenerateQuaternion("sequence contains a near-zero quaternion")
    arr = _sign_continuous_stack(arr / norms[:, :, None])
    smoothed = _kernels.kalman_smooth(
        np.ascontiguousarray(arr.reshape(t, j * 4)),
        params.process_noise,
        params.measurement_noise,
        params.initial_covariance,
    ).reshape(t, j, 4)
    out_norms = np.linalg.norm(smoothed, axis=2)
    if np.any(out_norms <= _NORM_FLOOR):
        raise DegenerateQuaternion("filter output collapsed to zero norm")
    return canonicalize_rows(smoothed / out_norms[:, :, None])


def kalman_filter(seq, params: KalmanParams | None = None) -> np.ndarray:
    """Smooth a quaternion sequence.

    Accepts a (T, 4) array (or anything that converts to one), returns a
    (T, 4) array of unit, canonical quaternions. The first output equals
    the canonicalized first input; a constant input passes through
    unchanged. Raises EmptySequence for zero-length input.
    """
    arr = np.asarray(seq, dtype=float)
    if arr.size == 0:
        raise EmptySequence("cannot filter an empty quaternion sequence")
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"expected a (T, 4) sequence, got shape {arr.shape}")
    return _smooth_stack(arr[:, None, :], params or DEFAULT_KALMAN)[:, 0, :]


def kalman_filter_joints(seq: np.ndarray, params: KalmanParams | None = None) -> np.ndarray:
    """Smooth a (T, J, 4) stack of per-joint quaternion tracks.

    Each joint column is treated as an independent sequence; see
    kalman_filter for the single-track contract.
    """
    arr = np.asarray(seq, dtype=float)
    if arr.size == 0:
        raise EmptySequence("cannot filter an empty quaternion sequence")
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise ValueError(f"expected a (T, J, 4) stack, got shape {arr.shape}")
    return _smooth_stack(arr, params or DEFAULT_KALMAN)
