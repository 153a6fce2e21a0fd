"""Stroke recordings: ingestion, trimming, keyframes, and the on-disk library.

A recording keeps every captured frame; trimming only moves the start/end
bounds so an editor can always reset. Paddle samples arrive at a much
higher rate than pose frames and are resampled onto the pose timestamps at
ingest, so downstream code sees one paddle orientation per pose frame.
"""

from __future__ import annotations

import json
import uuid
from bisect import bisect_left
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    CorruptFile,
    EmptyStream,
    IndexOutOfRange,
    InvalidHeight,
    InvertedRange,
    NonMonotonicTimestamps,
    NotFound,
)
from .quat import slerp
from .skeleton import (
    JointAngleFrame,
    PaddleFrame,
    PoseFrame,
    SkeletonTopology,
    get_topology,
    joint_angles,
)
from .streams import (
    angle_record,
    paddle_record,
    parse_angle_record,
    parse_paddle_record,
    parse_pose_record,
    pose_record,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StrokeRecording:
    """An authored expert stroke. Immutable; editing ops return new values."""

    id: str
    name: str
    expert_height: float
    pose_frames: tuple[PoseFrame, ...]
    angle_frames: tuple[JointAngleFrame, ...]
    paddle_frames: tuple[PaddleFrame, ...]
    start_frame: int
    end_frame: int
    keyframes: tuple[int, ...]
    keyframe_labels: dict[int, str]
    created_at: str
    topology_name: str

    @property
    def frame_count(self) -> int:
        return len(self.pose_frames)

    @property
    def trimmed_length(self) -> int:
        return self.end_frame - self.start_frame + 1

    @property
    def duration_ms(self) -> float:
        return self.pose_frames[-1].t - self.pose_frames[0].t

    def native_fps(self) -> float:
        """Frame rate implied by the pose timestamps (0 for single frames)."""
        if len(self.pose_frames) < 2:
            return 0.0
        dts = np.diff([f.t for f in self.pose_frames])
        return 1000.0 / float(np.median(dts))

    def validate(self) -> None:
        """Check structural invariants; raises CorruptFile on violation."""
        n = len(self.pose_frames)
        if n == 0:
            raise CorruptFile("recording has no pose frames")
        if not 0 <= self.start_frame <= self.end_frame < n:
            raise CorruptFile(
                f"trim bounds [{self.start_frame}, {self.end_frame}] "
                f"invalid for {n} frames"
            )
        if len(self.angle_frames) != n:
            raise CorruptFile("angle frame count differs from pose frame count")
        if len(self.paddle_frames) != n:
            raise CorruptFile("paddle frame count differs from pose frame count")
        for label, frames in (
            ("pose", self.pose_frames),
            ("paddle", self.paddle_frames),
        ):
            ts = [f.t for f in frames]
            for i in range(1, len(ts)):
                if ts[i] <= ts[i - 1]:
                    raise CorruptFile(f"{label} timestamps not increasing at {i}")
        for k in self.keyframes:
            if not self.start_frame <= k <= self.end_frame:
                raise CorruptFile(f"keyframe {k} outside trim bounds")
        if list(self.keyframes) != sorted(set(self.keyframes)):
            raise CorruptFile("keyframes not sorted and unique")


def _check_increasing(ts, label: str) -> None:
    for i in range(1, len(ts)):
        if ts[i] <= ts[i - 1]:
            raise NonMonotonicTimestamps(
                i, f"{label} timestamp not increasing at index {i}"
            )


def resample_paddle(frames, timestamps) -> list[PaddleFrame]:
    """Resample paddle orientations at the given timestamps.

    Interpolates spherically between the two samples bracketing each
    timestamp; outside the sampled range the nearest sample is used.
    """
    frames = list(frames)
    if not frames:
        raise EmptyStream("paddle stream is empty")
    ts = [f.t for f in frames]
    out = []
    for t in timestamps:
        i = bisect_left(ts, t)
        if i == 0:
            q = frames[0].orientation
        elif i >= len(frames):
            q = frames[-1].orientation
        else:
            lo, hi = frames[i - 1], frames[i]
            if hi.t == t:
                q = hi.orientation
            else:
                u = (t - lo.t) / (hi.t - lo.t)
                q = slerp(lo.orientation, hi.orientation, u)
        out.append(PaddleFrame(t=t, orientation=np.asarray(q, dtype=float)))
    return out


def ingest(
    pose_stream,
    paddle_stream,
    topo: SkeletonTopology,
    name: str,
    expert_height: float,
    rec_id: str | None = None,
) -> StrokeRecording:
    """Build a recording from captured pose and paddle streams.

    Joint angles are derived per pose frame; the paddle stream is resampled
    onto the pose timestamps. Bounds start wide open and no keyframes are
    set.
    """
    poses = tuple(pose_stream)
    if not poses:
        raise EmptyStream("pose stream is empty")
    if not 0.5 < expert_height < 2.5:
        raise InvalidHeight(f"expert height {expert_height} m outside (0.5, 2.5)")
    _check_increasing([f.t for f in poses], "pose")
    paddles = list(paddle_stream)
    if not paddles:
        raise EmptyStream("paddle stream is empty")
    _check_increasing([f.t for f in paddles], "paddle")
    angles = tuple(joint_angles(f, topo) for f in poses)
    resampled = tuple(resample_paddle(paddles, [f.t for f in poses]))
    return StrokeRecording(
        id=rec_id or uuid.uuid4().hex[:12],
        name=name,
        expert_height=expert_height,
        pose_frames=poses,
        angle_frames=angles,
        paddle_frames=resampled,
        start_frame=0,
        end_frame=len(poses) - 1,
        keyframes=(),
        keyframe_labels={},
        created_at=datetime.now(timezone.utc).isoformat(),
        topology_name=topo.name,
    )


def trim(rec: StrokeRecording, start: int, end: int) -> StrokeRecording:
    """Move the playback bounds; frame data is untouched and recoverable."""
    n = len(rec.pose_frames)
    if not (0 <= start < n and 0 <= end < n):
        raise IndexOutOfRange(f"trim bounds ({start}, {end}) outside 0..{n - 1}")
    if start > end:
        raise InvertedRange(f"trim start {start} after end {end}")
    kept = tuple(k for k in rec.keyframes if start <= k <= end)
    labels = {k: v for k, v in rec.keyframe_labels.items() if start <= k <= end}
    return replace(
        rec,
        start_frame=start,
        end_frame=end,
        keyframes=kept,
        keyframe_labels=labels,
    )


def set_keyframes(
    rec: StrokeRecording, indices, labels: dict[int, str] | None = None
) -> StrokeRecording:
    """Replace the keyframe set (sorted, deduplicated, bounds-checked)."""
    cleaned = sorted(set(int(i) for i in indices))
    for k in cleaned:
        if not rec.start_frame <= k <= rec.end_frame:
            raise IndexOutOfRange(
                f"keyframe {k} outside trim bounds "
                f"[{rec.start_frame}, {rec.end_frame}]"
            )
    labels = {k: v for k, v in (labels or {}).items() if k in cleaned}
    return replace(rec, keyframes=tuple(cleaned), keyframe_labels=labels)


def reset(rec: StrokeRecording) -> StrokeRecording:
    """Restore full bounds and clear all keyframes."""
    return replace(
        rec,
        start_frame=0,
        end_frame=len(rec.pose_frames) - 1,
        keyframes=(),
        keyframe_labels={},
    )


def to_document(rec: StrokeRecording, topo: SkeletonTopology) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "id": rec.id,
        "name": rec.name,
        "expert_height_m": rec.expert_height,
        "topology": rec.topology_name,
        "start_frame": rec.start_frame,
        "end_frame": rec.end_frame,
        "keyframes": [
            {"frame": k, "label": rec.keyframe_labels.get(k, "")}
            for k in rec.keyframes
        ],
        "created_at": rec.created_at,
        "pose_frames": [pose_record(f, topo) for f in rec.pose_frames],
        "angle_frames": [angle_record(f, topo) for f in rec.angle_frames],
        "paddle_frames": [paddle_record(f) for f in rec.paddle_frames],
    }


def from_document(doc: dict) -> StrokeRecording:
    try:
        if doc.get("version") != SCHEMA_VERSION:
            raise CorruptFile(f"unsupported schema version {doc.get('version')!r}")
        topo = get_topology(doc["topology"])
        keyframes = tuple(int(k["frame"]) for k in doc["keyframes"])
        labels = {
            int(k["frame"]): k.get("label", "")
            for k in doc["keyframes"]
            if k.get("label")
        }
        rec = StrokeRecording(
            id=str(doc["id"]),
            name=str(doc["name"]),
            expert_height=float(doc["expert_height_m"]),
            pose_frames=tuple(
                parse_pose_record(r, topo) for r in doc["pose_frames"]
            ),
            angle_frames=tuple(
                parse_angle_record(r, topo) for r in doc["angle_frames"]
            ),
            paddle_frames=tuple(
                parse_paddle_record(r) for r in doc["paddle_frames"]
            ),
            start_frame=int(doc["start_frame"]),
            end_frame=int(doc["end_frame"]),
            keyframes=keyframes,
            keyframe_labels=labels,
            created_at=str(doc.get("created_at", "")),
            topology_name=str(doc["topology"]),
        )
    except CorruptFile:
        raise
    except Exception as exc:
        raise CorruptFile(f"recording document malformed: {exc}") from exc
    rec.validate()
    return rec


class StrokeLibrary:
    """Directory-backed store of recordings, one JSON document per stroke.

    Recordings are immutable values; the library is the only mutable thing
    here and follows a single-writer contract (the CLI or the service owns
    it, readers get snapshots).
    """

    def __init__(self, storage_path):
        self.storage_path = Path(storage_path)
        self.storage_path.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, StrokeRecording] = {}

    def _path(self, rec_id: str) -> Path:
        return self.storage_path / f"{rec_id}.json"

    def save(self, rec: StrokeRecording) -> None:
        rec.validate()
        topo = get_topology(rec.topology_name)
        doc = to_document(rec, topo)
        self._path(rec.id).write_text(json.dumps(doc), encoding="utf-8")
        self._cache[rec.id] = rec

    def load(self, rec_id: str) -> StrokeRecording:
        if rec_id in self._cache:
            return self._cache[rec_id]
        path = self._path(rec_id)
        if not path.exists():
            raise NotFound(f"no recording with id {rec_id!r}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"{path}: invalid JSON ({exc.msg})") from None
        rec = from_document(doc)
        self._cache[rec.id] = rec
        return rec

    def ids(self) -> list[str]:
        on_disk = {p.stem for p in self.storage_path.glob("*.json")}
        return sorted(on_disk | set(self._cache))

    def all(self) -> list[StrokeRecording]:
        return [self.load(i) for i in self.ids()]
