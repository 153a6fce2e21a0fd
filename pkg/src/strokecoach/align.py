"""Quaternion-dissimilarity DTW over body and paddle streams.

Each comparison joint gets its own independent DTW table; the paddle gets
one more. A table is (N+1, M+1) with a virtual infinity boundary, cell
[0, 0] = 0, and 1-based filling, so ``costs[n, m]`` is the optimal warping
cost of the whole pair. Scores are terminal costs divided by the
query-side length N, flagged against a strict threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptySequence, JointSetMismatch, WindowUnderfilled
from .quat import KalmanParams, kalman_filter, kalman_filter_joints

DEFAULT_WINDOW = 10
DEFAULT_XI = 0.1


@dataclass(frozen=True)
class BodyCostTensor:
    """Accumulated per-joint DTW cost, shape (n+1, m+1, j_count)."""

    costs: np.ndarray
    n: int
    m: int
    j_count: int

    def terminal(self) -> np.ndarray:
        """Optimal warping cost per joint, shape (j_count,)."""
        return self.costs[self.n, self.m, :]


@dataclass(frozen=True)
class PaddleCostMatrix:
    """Accumulated paddle DTW cost, shape (n+1, m+1)."""

    costs: np.ndarray
    n: int
    m: int

    def terminal(self) -> float:
        return float(self.costs[self.n, self.m])


@dataclass(frozen=True)
class ComparisonResult:
    """Normalized scores and threshold flags for one comparison.

    joint_errors holds the names whose score strictly exceeds xi_joint;
    a score exactly at the threshold is not an error. window_span is the
    inclusive expert-side frame span that was compared.
    """

    joint_names: tuple[str, ...]
    per_joint_score: np.ndarray
    joint_errors: tuple[str, ...]
    paddle_score: float
    paddle_error: bool
    window_span: tuple[int, int]

    def scores_by_name(self) -> dict[str, float]:
        return {j: float(s) for j, s in zip(self.joint_names, self.per_joint_score)}


def as_angle_tensor(seq) -> np.ndarray:
    """Coerce a sequence of JointAngleFrame (or an array) to (T, J, 4)."""
    if isinstance(seq, np.ndarray):
        arr = seq
    else:
        frames = list(seq)
        if not frames:
            raise EmptySequence("empty joint-angle sequence")
        arr = np.stack([f.angles for f in frames])
    if arr.size == 0:
        raise EmptySequence("empty joint-angle sequence")
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise ValueError(f"expected (T, J, 4) joint angles, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=float)


def as_paddle_tensor(seq) -> np.ndarray:
    """Coerce a sequence of PaddleFrame (or an array) to (T, 4)."""
    if isinstance(seq, np.ndarray):
        arr = seq
    else:
        frames = list(seq)
        if not frames:
            raise EmptySequence("empty paddle sequence")
        arr = np.stack([f.orientation for f in frames])
    if arr.size == 0:
        raise EmptySequence("empty paddle sequence")
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"expected (T, 4) paddle orientations, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=float)


def dtw_body(
    user,
    expert,
    params: KalmanParams | None = None,
    *,
    filter_inputs: bool = True,
) -> BodyCostTensor:
    """Per-joint DTW of a user joint-angle sequence against an expert's.

    Both sequences are Kalman-smoothed before alignment unless
    filter_inputs is False (useful when the caller already filtered).
    """
    u = as_angle_tensor(user)
    e = as_angle_tensor(expert)
    if u.shape[1] != e.shape[1]:
        raise JointSetMismatch(
            f"user has {u.shape[1]} comparison joints, expert has {e.shape[1]}"
        )
    if filter_inputs:
        u = kalman_filter_joints(u, params)
        e = kalman_filter_joints(e, params)
    diss = _kernels.diss_matrix(u, e)
    costs = _kernels.dtw_fill(diss)
    return BodyCostTensor(costs=costs, n=u.shape[0], m=e.shape[0], j_count=u.shape[1])


def dtw_paddle(
    user,
    expert,
    params: KalmanParams | None = None,
    *,
    filter_inputs: bool = True,
) -> PaddleCostMatrix:
    """DTW of two paddle orientation sequences."""
    u = as_paddle_tensor(user)
    e = as_paddle_tensor(expert)
    if filter_inputs:
        u = kalman_filter(u, params)
        e = kalman_filter(e, params)
    diss = _kernels.diss_matrix(u[:, None, :], e[:, None, :])
    costs = _kernels.dtw_fill(diss)
    return PaddleCostMatrix(costs=costs[:, :, 0], n=u.shape[0], m=e.shape[0])


def classify(
    body: BodyCostTensor,
    paddle: PaddleCostMatrix,
    xi_joint: float = DEFAULT_XI,
    xi_paddle: float = DEFAULT_XI,
    *,
    joint_names: tuple[str, ...] | None = None,
    window_span: tuple[int, int] | None = None,
) -> ComparisonResult:
    """Normalize terminal costs by the query length and flag errors.

    A joint is in error iff its normalized cost strictly exceeds xi_joint;
    the paddle analogously against xi_paddle. Thresholds are expected in
    (0, 1).
    """
    names = joint_names or tuple(f"joint_{k}" for k in range(body.j_count))
    if len(names) != body.j_count:
        raise JointSetMismatch(
            f"{len(names)} joint names for {body.j_count} cost columns"
        )
    scores = body.terminal() / body.n
    paddle_score = paddle.terminal() / paddle.n
    errors = tuple(j for j, s in zip(names, scores) if s > xi_joint)
    return ComparisonResult(
        joint_names=tuple(names),
        per_joint_score=scores,
        joint_errors=errors,
        paddle_score=paddle_score,
        paddle_error=paddle_score > xi_paddle,
        window_span=window_span if window_span is not None else (0, body.m - 1),
    )


def aggregate_alignment_path(
    user,
    expert,
    params: KalmanParams | None = None,
    *,
    filter_inputs: bool = True,
) -> list[tuple[int, int]]:
    """Optimal warping path under the joint-averaged dissimilarity.

    Per-joint tables warp independently, which is right for scoring but
    gives no single frame correspondence; averaging the local cost over
    joints yields one path usable for keyframe alignment. Returns 0-based
    (user_frame, expert_frame) pairs from (0, 0) to (N-1, M-1); ties prefer
    the diagonal step.
    """
    u = as_angle_tensor(user)
    e = as_angle_tensor(expert)
    if u.shape[1] != e.shape[1]:
        raise JointSetMismatch(
            f"user has {u.shape[1]} comparison joints, expert has {e.shape[1]}"
        )
    if filter_inputs:
        u = kalman_filter_joints(u, params)
        e = kalman_filter_joints(e, params)
    diss = _kernels.diss_matrix(u, e).mean(axis=2)
    costs = _kernels.dtw_fill(np.ascontiguousarray(diss[:, :, None]))[:, :, 0]
    i, j = u.shape[0], e.shape[0]
    path = [(i - 1, j - 1)]
    while (i, j) != (1, 1):
        steps = (
            (costs[i - 1, j - 1], i - 1, j - 1),
            (costs[i - 1, j], i - 1, j),
            (costs[i, j - 1], i, j - 1),
        )
        _, i, j = min(steps, key=lambda s: s[0])
        path.append((i - 1, j - 1))
    path.reverse()
    return path


def window_compare(
    user_angles,
    user_paddle,
    expert_angles,
    expert_paddle,
    xi_joint: float = DEFAULT_XI,
    xi_paddle: float = DEFAULT_XI,
    *,
    joint_names: tuple[str, ...] | None = None,
    window: int = DEFAULT_WINDOW,
    params: KalmanParams | None = None,
    window_span: tuple[int, int] | None = None,
) -> ComparisonResult:
    """Fixed-size windowed comparison for the real-time path.

    Equivalent to dtw_body + dtw_paddle + classify on the four windows, but
    each input must hold exactly ``window`` frames (WindowUnderfilled
    otherwise), which keeps the per-tick cost constant.
    """
    ua = as_angle_tensor(user_angles)
    ea = as_angle_tensor(expert_angles)
    up = as_paddle_tensor(user_paddle)
    ep = as_paddle_tensor(expert_paddle)
    for label, arr in (
        ("user angle", ua),
        ("expert angle", ea),
        ("user paddle", up),
        ("expert paddle", ep),
    ):
        if arr.shape[0] != window:
            raise WindowUnderfilled(
                f"{label} window has {arr.shape[0]} frames, need {window}"
            )
    body = dtw_body(ua, ea, params)
    paddle = dtw_paddle(up, ep, params)
    return classify(
        body,
        paddle,
        xi_joint,
        xi_paddle,
        joint_names=joint_names,
        window_span=window_span,
    )
