"""Offline comparison of two recordings into an error report.

The headline statistic, mean body cost, is the terminal DTW cost divided
by the user-side length, averaged over comparison joints; per-keyframe
rows rate the user's posture at each authored stage marker against the
expert's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .align import aggregate_alignment_path, classify, dtw_body, dtw_paddle
from .errors import TopologyMismatch
from .quat import KalmanParams, kalman_filter, kalman_filter_joints
from .recording import StrokeRecording
from .skeleton import get_topology


@dataclass(frozen=True)
class KeyframeComparison:
    frame: int
    label: str
    user_frame: int
    dissimilarity: float


@dataclass(frozen=True)
class AnalysisReport:
    user_id: str
    expert_id: str
    xi_joint: float
    xi_paddle: float
    per_joint_cost: dict[str, float]
    paddle_cost: float
    flagged_joints: tuple[str, ...]
    paddle_flagged: bool
    keyframes: tuple[KeyframeComparison, ...]
    mean_body_cost: float
    mean_paddle_cost: float

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "user": self.user_id,
            "expert": self.expert_id,
            "xi_joint": self.xi_joint,
            "xi_paddle": self.xi_paddle,
            "per_joint_cost": self.per_joint_cost,
            "paddle_cost": self.paddle_cost,
            "flagged_joints": list(self.flagged_joints),
            "paddle_flagged": self.paddle_flagged,
            "keyframes": [
                {
                    "frame": k.frame,
                    "label": k.label,
                    "user_frame": k.user_frame,
                    "dissimilarity": k.dissimilarity,
                }
                for k in self.keyframes
            ],
            "summary": {
                "mean_body_cost": self.mean_body_cost,
                "mean_paddle_cost": self.mean_paddle_cost,
            },
        }


def analyze(
    user: StrokeRecording,
    expert: StrokeRecording,
    xi_joint: float = 0.1,
    xi_paddle: float = 0.1,
    params: KalmanParams | None = None,
) -> AnalysisReport:
    """Full-sequence DTW of two recordings over their trimmed ranges."""
    if user.topology_name != expert.topology_name:
        raise TopologyMismatch(
            f"user uses {user.topology_name!r}, expert uses {expert.topology_name!r}"
        )
    topo = get_topology(user.topology_name)

    u_angles = np.stack(
        [f.angles for f in user.angle_frames[user.start_frame : user.end_frame + 1]]
    )
    e_angles = np.stack(
        [
            f.angles
            for f in expert.angle_frames[expert.start_frame : expert.end_frame + 1]
        ]
    )
    u_paddle = np.stack(
        [
            f.orientation
            for f in user.paddle_frames[user.start_frame : user.end_frame + 1]
        ]
    )
    e_paddle = np.stack(
        [
            f.orientation
            for f in expert.paddle_frames[expert.start_frame : expert.end_frame + 1]
        ]
    )

    # filter once, reuse for scoring, path, and keyframe rows
    uf = kalman_filter_joints(u_angles, params)
    ef = kalman_filter_joints(e_angles, params)
    body = dtw_body(uf, ef, filter_inputs=False)
    paddle = dtw_paddle(
        kalman_filter(u_paddle, params),
        kalman_filter(e_paddle, params),
        filter_inputs=False,
    )
    result = classify(
        body, paddle, xi_joint, xi_paddle, joint_names=topo.comparison_joints
    )

    keyframes = []
    if expert.keyframes:
        path = aggregate_alignment_path(uf, ef, filter_inputs=False)
        diss = _kernels.diss_matrix(uf, ef)
        for k in expert.keyframes:
            e_idx = k - expert.start_frame
            matched = [i for i, j in path if j == e_idx]
            u_idx = int(np.median(matched))
            keyframes.append(
                KeyframeComparison(
                    frame=k,
                    label=expert.keyframe_labels.get(k, ""),
                    user_frame=u_idx + user.start_frame,
                    dissimilarity=float(diss[u_idx, e_idx].mean()),
                )
            )

    scores = result.scores_by_name()
    return AnalysisReport(
        user_id=user.id,
        expert_id=expert.id,
        xi_joint=xi_joint,
        xi_paddle=xi_paddle,
        per_joint_cost=scores,
        paddle_cost=result.paddle_score,
        flagged_joints=result.joint_errors,
        paddle_flagged=result.paddle_error,
        keyframes=tuple(keyframes),
        mean_body_cost=float(np.mean(list(scores.values()))),
        mean_paddle_cost=result.paddle_score,
    )


def render_table(report: AnalysisReport) -> str:
    """Human-readable console rendering of a report."""
    lines = []
    lines.append(f"user {report.user_id}  vs  expert {report.expert_id}")
    lines.append(f"thresholds: joint {report.xi_joint}  paddle {report.xi_paddle}")
    lines.append("")
    width = max(len(j) for j in report.per_joint_cost)
    lines.append(f"{'joint'.ljust(width)}  {'cost':>10}  flag")
    for j, c in report.per_joint_cost.items():
        flag = "ERROR" if j in report.flagged_joints else ""
        lines.append(f"{j.ljust(width)}  {c:>10.6f}  {flag}")
    flag = "ERROR" if report.paddle_flagged else ""
    lines.append(f"{'paddle'.ljust(width)}  {report.paddle_cost:>10.6f}  {flag}")
    lines.append("")
    if report.keyframes:
        lines.append("keyframes:")
        for k in report.keyframes:
            label = f" ({k.label})" if k.label else ""
            lines.append(
                f"  expert frame {k.frame}{label} ~ user frame {k.user_frame}: "
                f"dissimilarity {k.dissimilarity:.6f}"
            )
        lines.append("")
    lines.append(
        f"mean body cost {report.mean_body_cost:.6f}  "
        f"mean paddle cost {report.mean_paddle_cost:.6f}"
    )
    return "\n".join(lines)
