"""Wire and file schemas for pose, paddle, and angle records.

Stream files are newline-delimited JSON. A pose record is
``{"t": <ms>, "joints": {<name>: [x, y, z], ...}}``; a paddle record is
``{"t": <ms>, "quat": [w, x, y, z]}``. The same record shapes travel over
the session websocket, one JSON message per record.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .quat import normalize as quat_normalize
from .skeleton import JointAngleFrame, PaddleFrame, PoseFrame, SkeletonTopology


def _require_t(obj: dict) -> float:
    t = obj.get("t")
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise SchemaError("record is missing a numeric 't' field")
    return float(t)


def parse_pose_record(
    obj: dict, topo: SkeletonTopology, name_map: dict[str, str] | None = None
) -> PoseFrame:
    if not isinstance(obj, dict):
        raise SchemaError("pose record must be an object")
    t = _require_t(obj)
    joints = obj.get("joints")
    if not isinstance(joints, dict):
        raise SchemaError("pose record is missing the 'joints' object")
    return topo.pose_from_mapping(t, joints, name_map)


def parse_paddle_record(obj: dict) -> PaddleFrame:
    if not isinstance(obj, dict):
        raise SchemaError("paddle record must be an object")
    t = _require_t(obj)
    raw = obj.get("quat")
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise SchemaError("paddle record needs a 4-element 'quat' field")
    arr = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise SchemaError("paddle quaternion contains non-finite values")
    n = np.linalg.norm(arr)
    if n <= 1e-9:
        raise SchemaError("paddle quaternion has zero norm")
    return PaddleFrame(t=t, orientation=arr / n)


def parse_angle_record(obj: dict, topo: SkeletonTopology) -> JointAngleFrame:
    if not isinstance(obj, dict):
        raise SchemaError("angle record must be an object")
    t = _require_t(obj)
    angles = obj.get("angles")
    if not isinstance(angles, dict):
        raise SchemaError("angle record is missing the 'angles' object")
    cmp_joints = topo.comparison_joints
    out = np.empty((len(cmp_joints), 4))
    for i, j in enumerate(cmp_joints):
        if j not in angles:
            raise SchemaError(f"angle record missing joint {j!r}")
        q = np.asarray(angles[j], dtype=float)
        if q.shape != (4,) or not np.all(np.isfinite(q)):
            raise SchemaError(f"angle for joint {j!r} is not a finite quaternion")
        out[i] = quat_normalize(q)
    return JointAngleFrame(t=t, angles=out)


def pose_record(frame: PoseFrame, topo: SkeletonTopology) -> dict:
    return {"t": frame.t, "joints": frame.to_mapping(topo)}


def paddle_record(frame: PaddleFrame) -> dict:
    return {"t": frame.t, "quat": [float(c) for c in frame.orientation]}


def angle_record(frame: JointAngleFrame, topo: SkeletonTopology) -> dict:
    return {
        "t": frame.t,
        "angles": {
            j: [float(c) for c in frame.angles[i]]
            for i, j in enumerate(topo.comparison_joints)
        },
    }


def load_pose_stream(
    path, topo: SkeletonTopology, name_map: dict[str, str] | None = None
) -> list[PoseFrame]:
    return [
        parse_pose_record(obj, topo, name_map) for obj in read_ndjson(path)
    ]


def load_paddle_stream(path) -> list[PaddleFrame]:
    return [parse_paddle_record(obj) for obj in read_ndjson(path)]


def write_ndjson(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def read_ndjson(path) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
    return out
