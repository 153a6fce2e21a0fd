"""Skeleton topology, pose frames, and joint-angle extraction.

A pose arrives as 3D joint positions in camera space. Angles are made
comparable across players by normalizing each pose (pelvis to the origin,
hip line yawed onto the +x axis) and expressing every bone as the
shortest-arc rotation from its rest direction. Leaf joints (head, toes,
wrists) terminate bones but carry no angle of their own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateBone,
    DegeneratePose,
    InvalidHeight,
    SchemaError,
)
from .quat import canonicalize, normalize as quat_normalize

UP = np.array([0.0, 1.0, 0.0])
RIGHT = np.array([1.0, 0.0, 0.0])

_EPS = 1e-6


@dataclass(frozen=True)
class SkeletonTopology:
    """Joint tree plus the rest pose that anchors angle extraction.

    joints are ordered; parent maps every non-root joint to its parent;
    end_joints are leaves excluded from comparison; rest_directions hold
    the unit parent-to-joint bone vector of the canonical rest pose.
    """

    name: str
    joints: tuple[str, ...]
    parent: dict[str, str | None]
    end_joints: frozenset[str]
    rest_directions: dict[str, np.ndarray]
    rest_positions: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        roots = [j for j in self.joints if self.parent.get(j) is None]
        if len(roots) != 1:
            raise ValueError(f"topology must have exactly one root, found {roots}")
        for j in self.joints:
            seen = set()
            cur = j
            while cur is not None:
                if cur in seen:
                    raise ValueError(f"parent map has a cycle through {cur!r}")
                seen.add(cur)
                cur = self.parent.get(cur)
        if not self.end_joints <= set(self.joints):
            raise ValueError("end_joints must be a subset of joints")
        for j in self.comparison_joints:
            d = self.rest_directions.get(j)
            if d is None:
                raise ValueError(f"missing rest direction for {j!r}")
            if abs(np.linalg.norm(d) - 1.0) > _EPS:
                raise ValueError(f"rest direction for {j!r} is not unit length")

    @property
    def root(self) -> str:
        return next(j for j in self.joints if self.parent.get(j) is None)

    @property
    def comparison_joints(self) -> tuple[str, ...]:
        root = next(j for j in self.joints if self.parent.get(j) is None)
        return tuple(
            j for j in self.joints if j != root and j not in self.end_joints
        )

    def index(self, joint: str) -> int:
        return self.joints.index(joint)

    def pose_from_mapping(
        self, t: float, positions: dict, name_map: dict[str, str] | None = None
    ) -> "PoseFrame":
        """Build a PoseFrame from a name->[x,y,z] mapping.

        name_map translates estimator joint names to topology names; joints
        absent from the topology are ignored, missing or non-finite topology
        joints raise SchemaError.
        """
        translated: dict[str, object] = {}
        if name_map:
            for src, xyz in positions.items():
                translated[name_map.get(src, src)] = xyz
        else:
            translated = positions
        pts = np.empty((len(self.joints), 3))
        for i, j in enumerate(self.joints):
            if j not in translated:
                raise SchemaError(f"pose record missing joint {j!r}")
            xyz = np.asarray(translated[j], dtype=float)
            if xyz.shape != (3,):
                raise SchemaError(f"joint {j!r} is not a 3-vector")
            pts[i] = xyz
        if not np.all(np.isfinite(pts)):
            raise SchemaError("pose record contains non-finite coordinates")
        return PoseFrame(t=float(t), positions=pts)


@dataclass(frozen=True)
class PoseFrame:
    """Timestamped joint positions (meters), ordered per the topology."""

    t: float
    positions: np.ndarray

    def joint(self, topo: SkeletonTopology, name: str) -> np.ndarray:
        return self.positions[topo.index(name)]

    def to_mapping(self, topo: SkeletonTopology) -> dict[str, list[float]]:
        return {j: self.positions[i].tolist() for i, j in enumerate(topo.joints)}


@dataclass(frozen=True)
class JointAngleFrame:
    """Timestamped per-joint rotations, ordered per topo.comparison_joints."""

    t: float
    angles: np.ndarray

    def angle(self, topo: SkeletonTopology, name: str) -> np.ndarray:
        return self.angles[topo.comparison_joints.index(name)]


@dataclass(frozen=True)
class PaddleFrame:
    """Timestamped paddle orientation."""

    t: float
    orientation: np.ndarray


def default_topology() -> SkeletonTopology:
    """The built-in 17-joint skeleton.

    Axial chain pelvis-spine-chest-neck-head, arms chest-shoulder-elbow-
    wrist, legs pelvis-hip-knee-toe. Head, toes and wrists are end joints,
    leaving 11 comparison joints. Rest pose is an upright T pose with the
    left-to-right hip line along +x and +y up.
    """
    rest = {
        "pelvis": (0.0, 0.0, 0.0),
        "spine": (0.0, 0.20, 0.0),
        "chest": (0.0, 0.45, 0.0),
        "neck": (0.0, 0.65, 0.0),
        "head": (0.0, 0.80, 0.0),
        "L_shoulder": (-0.20, 0.60, 0.0),
        "L_elbow": (-0.48, 0.60, 0.0),
        "L_wrist": (-0.74, 0.60, 0.0),
        "R_shoulder": (0.20, 0.60, 0.0),
        "R_elbow": (0.48, 0.60, 0.0),
        "R_wrist": (0.74, 0.60, 0.0),
        "L_hip": (-0.10, 0.0, 0.0),
        "L_knee": (-0.10, -0.45, 0.0),
        "L_toe": (-0.10, -0.95, 0.0),
        "R_hip": (0.10, 0.0, 0.0),
        "R_knee": (0.10, -0.45, 0.0),
        "R_toe": (0.10, -0.95, 0.0),
    }
    parent = {
        "pelvis": None,
        "spine": "pelvis",
        "chest": "spine",
        "neck": "chest",
        "head": "neck",
        "L_shoulder": "chest",
        "L_elbow": "L_shoulder",
        "L_wrist": "L_elbow",
        "R_shoulder": "chest",
        "R_elbow": "R_shoulder",
        "R_wrist": "R_elbow",
        "L_hip": "pelvis",
        "L_knee": "L_hip",
        "L_toe": "L_knee",
        "R_hip": "pelvis",
        "R_knee": "R_hip",
        "R_toe": "R_knee",
    }
    positions = {j: np.array(p) for j, p in rest.items()}
    directions = {}
    for j, p in parent.items():
        if p is None:
            continue
        bone = positions[j] - positions[p]
        directions[j] = bone / np.linalg.norm(bone)
    return SkeletonTopology(
        name="default17",
        joints=tuple(rest),
        parent=parent,
        end_joints=frozenset({"head", "L_toe", "R_toe", "L_wrist", "R_wrist"}),
        rest_directions=directions,
        rest_positions=positions,
    )


TOPOLOGIES = {"default17": default_topology}


def get_topology(name: str) -> SkeletonTopology:
    try:
        return TOPOLOGIES[name]()
    except KeyError:
        raise ValueError(f"unknown topology {name!r}") from None


def normalize_pose(frame: PoseFrame, topo: SkeletonTopology) -> PoseFrame:
    """Translate the pelvis to the origin and yaw the hip line onto +x.

    Removes where the player stands and which way they face while
    preserving all distances. Raises DegeneratePose when the left-to-right
    hip vector has no ground-plane component to define a heading.
    """
    pts = frame.positions - frame.positions[topo.index(topo.root)]
    hip = pts[topo.index("R_hip")] - pts[topo.index("L_hip")]
    hx, hz = hip[0], hip[2]
    ground = np.hypot(hx, hz)
    if ground < _EPS:
        raise DegeneratePose("hip line has no ground-plane projection")
    c, s = hx / ground, hz / ground
    rot = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return PoseFrame(t=frame.t, positions=pts @ rot.T)


def _fallback_axis(rest_dir: np.ndarray) -> np.ndarray:
    """Deterministic axis perpendicular to rest_dir for 180-degree bones."""
    for candidate in (UP, RIGHT):
        perp = candidate - (candidate @ rest_dir) * rest_dir
        n = np.linalg.norm(perp)
        if n > _EPS:
            return perp / n
    raise DegenerateBone("no perpendicular axis found")  # unreachable for unit rest_dir


def _shortest_arc(rest_dir: np.ndarray, bone_dir: np.ndarray) -> np.ndarray:
    dot = float(rest_dir @ bone_dir)
    if dot < -1.0 + 1e-9:
        axis = _fallback_axis(rest_dir)
        return canonicalize(np.array([0.0, axis[0], axis[1], axis[2]]))
    cross = np.cross(rest_dir, bone_dir)
    q = np.array([1.0 + dot, cross[0], cross[1], cross[2]])
    return canonicalize(quat_normalize(q))


def joint_angles(frame: PoseFrame, topo: SkeletonTopology) -> JointAngleFrame:
    """Extract per-joint rotations from a pose frame.

    The pose is normalized first; each comparison joint's quaternion is the
    shortest-arc rotation carrying its rest direction onto the current
    parent-to-joint bone direction. Bone lengths below 1e-6 m raise
    DegenerateBone.
    """
    norm = normalize_pose(frame, topo)
    cmp_joints = topo.comparison_joints
    out = np.empty((len(cmp_joints), 4))
    for i, j in enumerate(cmp_joints):
        bone = norm.positions[topo.index(j)] - norm.positions[topo.index(topo.parent[j])]
        length = np.linalg.norm(bone)
        if length < _EPS:
            raise DegenerateBone(f"bone to {j!r} has near-zero length")
        out[i] = _shortest_arc(topo.rest_directions[j], bone / length)
    return JointAngleFrame(t=frame.t, angles=out)


def height_scale(user_height: float, expert_height: float) -> float:
    """Guidance scale factor: user height over expert height."""
    for label, h in (("user", user_height), ("expert", expert_height)):
        if not 0.5 < h < 2.5:
            raise InvalidHeight(f"{label} height {h} m outside (0.5, 2.5)")
    return user_height / expert_height
