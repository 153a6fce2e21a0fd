"""Synthetic capture streams for tests, benchmarks, and demos.

Poses are built by forward kinematics from the topology's rest pose with
smooth sinusoidal per-bone swings, so bone lengths stay exact and no frame
is degenerate. The paddle follows an independent smooth orientation track
at IMU rate.
"""

from __future__ import annotations

import numpy as np

from .quat import from_axis_angle, multiply, rotate_vector
from .skeleton import PaddleFrame, PoseFrame, SkeletonTopology, default_topology
from .recording import StrokeRecording, ingest


def synth_pose_stream(
    topo: SkeletonTopology | None = None,
    frames: int = 120,
    fps: float = 30.0,
    seed: int = 0,
    max_swing_deg: float = 15.0,
    origin=(0.0, 0.0, 0.0),
    yaw_deg: float = 0.0,
    frozen=(),
    t0: float = 0.0,
) -> list[PoseFrame]:
    """Generate a smooth synthetic pose stream.

    frozen names bones that stay at their rest direction (useful to keep
    the hip line fixed or to isolate a joint for offset experiments).
    """
    topo = topo or default_topology()
    rng = np.random.default_rng(seed)
    frozen = set(frozen)
    motion = {}
    for j in topo.joints:
        if topo.parent[j] is None or j in frozen:
            continue
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        motion[j] = (
            axis,
            np.radians(max_swing_deg) * rng.uniform(0.3, 1.0),
            rng.uniform(0.5, 1.5),
            rng.uniform(0.0, 2.0 * np.pi),
        )
    origin = np.asarray(origin, dtype=float)
    yaw = np.radians(yaw_deg)
    cy, sy = np.cos(yaw), np.sin(yaw)
    yaw_mat = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])

    out = []
    for i in range(frames):
        positions = np.zeros((len(topo.joints), 3))
        for idx, j in enumerate(topo.joints):
            parent = topo.parent[j]
            if parent is None:
                continue
            bone = topo.rest_positions[j] - topo.rest_positions[parent]
            if j in motion:
                axis, amp, freq, phase = motion[j]
                theta = amp * np.sin(2.0 * np.pi * freq * i / frames + phase)
                bone = rotate_vector(from_axis_angle(axis, theta), bone)
            positions[idx] = positions[topo.index(parent)] + bone
        positions = positions @ yaw_mat.T + origin
        out.append(PoseFrame(t=t0 + i * 1000.0 / fps, positions=positions))
    return out


def synth_paddle_stream(
    duration_ms: float,
    rate_hz: float = 250.0,
    seed: int = 0,
    max_swing_deg: float = 40.0,
    t0: float = 0.0,
) -> list[PaddleFrame]:
    """Smooth synthetic paddle orientation track at IMU rate."""
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    axis2 = rng.normal(size=3)
    axis2 /= np.linalg.norm(axis2)
    amp = np.radians(max_swing_deg)
    n = max(int(duration_ms * rate_hz / 1000.0) + 1, 2)
    out = []
    for i in range(n):
        t = i * 1000.0 / rate_hz
        u = t / max(duration_ms, 1.0)
        combined = multiply(
            from_axis_angle(axis, amp * np.sin(2.0 * np.pi * u)),
            from_axis_angle(axis2, 0.4 * amp * np.sin(4.0 * np.pi * u + 1.0)),
        )
        out.append(PaddleFrame(t=t0 + t, orientation=combined / np.linalg.norm(combined)))
    return out


def offset_joint_bone(
    frames, topo: SkeletonTopology, joint: str, angle_deg: float
) -> list[PoseFrame]:
    """Rigidly rotate one joint's bone by angle_deg in every frame.

    The rotation axis is perpendicular to the joint's rest direction, so a
    bone resting at its rest direction acquires exactly that angular offset
    in angle space. Global forward is preferred as the axis because a
    vertical-axis offset on a hip bone would be cancelled by yaw
    normalization. Descendants translate along so their own bones (and
    hence angles) are untouched.
    """
    rest_dir = topo.rest_directions[joint]
    for candidate in ([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]):
        axis = np.asarray(candidate)
        if abs(axis @ rest_dir) < 1.0 - 1e-6:
            break
    axis = axis - (axis @ rest_dir) * rest_dir
    axis /= np.linalg.norm(axis)
    q = from_axis_angle(axis, np.radians(angle_deg))

    descendants = set()
    for j in topo.joints:
        cur = topo.parent[j]
        while cur is not None:
            if cur == joint:
                descendants.add(j)
                break
            cur = topo.parent[cur]

    out = []
    j_idx = topo.index(joint)
    p_idx = topo.index(topo.parent[joint])
    for f in frames:
        pts = f.positions.copy()
        bone = pts[j_idx] - pts[p_idx]
        delta = (pts[p_idx] + rotate_vector(q, bone)) - pts[j_idx]
        pts[j_idx] += delta
        for d in descendants:
            pts[topo.index(d)] += delta
        out.append(PoseFrame(t=f.t, positions=pts))
    return out


def synth_recording(
    name: str = "synthetic stroke",
    seed: int = 0,
    frames: int = 120,
    fps: float = 30.0,
    expert_height: float = 1.80,
    topo: SkeletonTopology | None = None,
    frozen=(),
) -> StrokeRecording:
    """A complete synthetic recording, ready for the library."""
    topo = topo or default_topology()
    poses = synth_pose_stream(topo, frames=frames, fps=fps, seed=seed, frozen=frozen)
    duration = poses[-1].t - poses[0].t
    paddle = synth_paddle_stream(duration, seed=seed + 1, t0=poses[0].t)
    return ingest(poses, paddle, topo, name, expert_height)
