"""Live training sessions: playback clock, user stream ingestion, windowed
comparison, and guidance-cue geometry.

A session owns no wall clock. Callers advance playback explicitly
(advance_clock) and push user frames (ingest_user); identical call
timelines therefore produce identical feedback streams, which keeps replay
and testing deterministic. Once the trailing user window fills, every
ingested frame yields exactly one FeedbackEvent comparing it against the
expert window ending at the current playback frame.
"""

from __future__ import annotations

import math
import uuid
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .align import ComparisonResult, DEFAULT_WINDOW, DEFAULT_XI, window_compare
from .errors import (
    InvalidSpeed,
    NonMonotonicTimestamps,
    SchemaError,
    StrokeNotFound,
    NotFound,
)
from .quat import KalmanParams
from .recording import StrokeRecording, StrokeLibrary, resample_paddle
from .skeleton import (
    JointAngleFrame,
    PaddleFrame,
    PoseFrame,
    get_topology,
    height_scale,
    joint_angles,
)

SPEED_STEPS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0)

CUE_NAMES = ("detached_expert", "detached_user", "onbody_body", "onbody_paddle")

PADDLE_CUE_OFFSET = np.array([0.0, 0.0, 0.15])

_PADDLE_BUFFER_LIMIT = 2048


@dataclass
class PlaybackState:
    position: float = 0.0
    speed: float = 1.0
    paused: bool = True
    looping: bool = False


@dataclass
class CueToggles:
    detached_expert: bool = True
    detached_user: bool = True
    onbody_body: bool = True
    onbody_paddle: bool = True

    def flip(self, name: str) -> None:
        if name not in CUE_NAMES:
            raise SchemaError(f"unknown cue {name!r}")
        setattr(self, name, not getattr(self, name))


@dataclass(frozen=True)
class FeedbackEvent:
    """One live comparison tick."""

    session_id: str
    user_frame_timestamp: float
    playback_position: float
    per_joint_score: dict[str, float]
    joint_errors: tuple[str, ...]
    paddle_score: float
    paddle_error: bool
    window_span: tuple[int, int]
    expert_angle_frame: JointAngleFrame
    user_angle_frame: JointAngleFrame


@dataclass(frozen=True)
class GuidanceCue:
    """Expert trajectory for one flagged joint (or the paddle), already
    scaled to the user's height and anchored at their starting position."""

    joint: str
    trajectory: np.ndarray


@dataclass
class SessionConfig:
    window: int = DEFAULT_WINDOW
    xi_joint: float = DEFAULT_XI
    xi_paddle: float = DEFAULT_XI
    guidance_horizon: int = 10
    paddle_hand: str = "R_wrist"
    kalman: KalmanParams | None = None
    detached_offset_m: float = 3.0  # default distance of detached avatars, UI hint


class TrainingSession:
    """Mutable per-learner state machine around one expert stroke."""

    def __init__(
        self,
        recording: StrokeRecording,
        user_height: float,
        anchor,
        config: SessionConfig | None = None,
        session_id: str | None = None,
    ):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.config = config or SessionConfig()
        self.recording = recording
        self.topology = get_topology(recording.topology_name)
        self.user_height = user_height
        self.scale = height_scale(user_height, recording.expert_height)
        self.anchor = np.asarray(anchor, dtype=float).reshape(3)
        self.playback = PlaybackState()
        self.cue_toggles = CueToggles()

        lo, hi = recording.start_frame, recording.end_frame + 1
        self._expert_angles = np.stack(
            [f.angles for f in recording.angle_frames[lo:hi]]
        )
        self._expert_paddle = np.stack(
            [f.orientation for f in recording.paddle_frames[lo:hi]]
        )
        self._expert_positions = np.stack(
            [f.positions for f in recording.pose_frames[lo:hi]]
        )
        self._fps = recording.native_fps()
        self._pelvis_start = self._expert_positions[
            0, self.topology.index(self.topology.root)
        ].copy()

        w = self.config.window
        self._angle_window: deque[JointAngleFrame] = deque(maxlen=w)
        self._paddle_window: deque[PaddleFrame] = deque(maxlen=w)
        self._paddle_buffer: deque[PaddleFrame] = deque(maxlen=_PADDLE_BUFFER_LIMIT)
        self._last_pose_t: float | None = None
        self._last_pose: PoseFrame | None = None
        self._frames_ingested = 0

    # -- playback ---------------------------------------------------------

    @property
    def max_position(self) -> float:
        return float(self.recording.trimmed_length - 1)

    def pause(self) -> None:
        self.playback.paused = True

    def resume(self) -> None:
        self.playback.paused = False

    def set_speed(self, value: float) -> None:
        if value not in SPEED_STEPS:
            raise InvalidSpeed(f"speed {value!r} not in {SPEED_STEPS}")
        self.playback.speed = float(value)

    def seek(self, frame: float) -> None:
        self.playback.position = min(max(float(frame), 0.0), self.max_position)

    def set_loop(self, on: bool) -> None:
        self.playback.looping = bool(on)

    def toggle(self, cue: str) -> None:
        self.cue_toggles.flip(cue)

    def control(self, payload: dict) -> None:
        """Apply one wire control command."""
        cmd = payload.get("command")
        if cmd == "pause":
            self.pause()
        elif cmd == "resume":
            self.resume()
        elif cmd == "set_speed":
            value = payload.get("value")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidSpeed("set_speed needs a numeric 'value'")
            self.set_speed(float(value))
        elif cmd == "seek":
            frame = payload.get("frame")
            if not isinstance(frame, (int, float)) or isinstance(frame, bool):
                raise SchemaError("seek needs a numeric 'frame'")
            self.seek(float(frame))
        elif cmd == "toggle":
            cue = payload.get("cue")
            if not isinstance(cue, str):
                raise SchemaError("toggle needs a 'cue' name")
            self.toggle(cue)
        elif cmd == "loop":
            self.set_loop(bool(payload.get("on")))
        else:
            raise SchemaError(f"unknown command {cmd!r}")

    def advance_clock(self, wall_dt_ms: float) -> None:
        """Move playback forward by wall_dt_ms of wall time at current speed."""
        if wall_dt_ms < 0:
            raise ValueError("wall_dt_ms must be nonnegative")
        if self.playback.paused or self._fps == 0.0:
            return
        pos = self.playback.position + wall_dt_ms * self.playback.speed * self._fps / 1000.0
        end = self.max_position
        if pos > end:
            if self.playback.looping and end > 0:
                pos = math.fmod(pos, end)
            else:
                pos = end
        self.playback.position = pos

    # -- ingestion --------------------------------------------------------

    def current_expert_index(self) -> int:
        return int(round(min(max(self.playback.position, 0.0), self.max_position)))

    def _expert_window_span(self) -> tuple[int, int] | None:
        w = self.config.window
        total = self._expert_angles.shape[0]
        if total < w:
            return None
        end = min(max(self.current_expert_index(), w - 1), total - 1)
        return end - w + 1, end

    def ingest_user(self, pose: PoseFrame, paddle_samples=()) -> FeedbackEvent | None:
        """Push one user pose frame (plus raw paddle samples up to its
        timestamp) and produce a FeedbackEvent once the windows are full.

        Returns None while the trailing window is still filling or the
        stroke is shorter than the window.
        """
        if self._last_pose_t is not None and pose.t <= self._last_pose_t:
            raise NonMonotonicTimestamps(
                self._frames_ingested,
                f"user pose timestamp {pose.t} not after {self._last_pose_t}",
            )
        for sample in paddle_samples:
            if not self._paddle_buffer or sample.t > self._paddle_buffer[-1].t:
                self._paddle_buffer.append(sample)
        angle = joint_angles(pose, self.topology)
        (paddle,) = resample_paddle(self._paddle_buffer, [pose.t])
        self._angle_window.append(angle)
        self._paddle_window.append(paddle)
        self._last_pose_t = pose.t
        self._last_pose = pose
        self._frames_ingested += 1

        if len(self._angle_window) < self.config.window:
            return None
        span = self._expert_window_span()
        if span is None:
            return None
        lo, hi = span
        result = window_compare(
            np.stack([f.angles for f in self._angle_window]),
            np.stack([f.orientation for f in self._paddle_window]),
            self._expert_angles[lo : hi + 1],
            self._expert_paddle[lo : hi + 1],
            self.config.xi_joint,
            self.config.xi_paddle,
            joint_names=self.topology.comparison_joints,
            window=self.config.window,
            params=self.config.kalman,
            window_span=span,
        )
        return self._event_from(result, pose.t, angle)

    def _event_from(
        self, result: ComparisonResult, user_t: float, user_angle: JointAngleFrame
    ) -> FeedbackEvent:
        c = self.current_expert_index()
        expert_angle = self.recording.angle_frames[self.recording.start_frame + c]
        return FeedbackEvent(
            session_id=self.session_id,
            user_frame_timestamp=user_t,
            playback_position=self.playback.position,
            per_joint_score=result.scores_by_name(),
            joint_errors=result.joint_errors,
            paddle_score=result.paddle_score,
            paddle_error=result.paddle_error,
            window_span=result.window_span,
            expert_angle_frame=expert_angle,
            user_angle_frame=user_angle,
        )

    # -- guidance ---------------------------------------------------------

    def _to_user_space(self, points: np.ndarray) -> np.ndarray:
        """Similarity transform from expert capture space to the user anchor."""
        return self.anchor + self.scale * (points - self._pelvis_start)

    def guidance(self, joint_errors, paddle_error: bool = False) -> list[GuidanceCue]:
        """Expert next-horizon trajectories for every flagged joint.

        Each trajectory holds guidance_horizon points (the stroke's last
        frame repeats at the end), scaled about the expert's starting pelvis
        and translated onto the session anchor.
        """
        c = self.current_expert_index()
        total = self._expert_positions.shape[0]
        idx = np.minimum(np.arange(c, c + self.config.guidance_horizon), total - 1)
        cues = []
        for j in joint_errors:
            pts = self._expert_positions[idx, self.topology.index(j)]
            cues.append(GuidanceCue(joint=j, trajectory=self._to_user_space(pts)))
        if paddle_error:
            wrist = self._expert_positions[idx, self.topology.index(self.config.paddle_hand)]
            cues.append(
                GuidanceCue(
                    joint="paddle",
                    trajectory=self._to_user_space(wrist + PADDLE_CUE_OFFSET),
                )
            )
        return cues

    # -- rendering support --------------------------------------------------

    def expert_avatar_positions(self) -> np.ndarray:
        """Expert pose at the current playback frame, in user space."""
        return self._to_user_space(self._expert_positions[self.current_expert_index()])

    def latest_user_pose(self) -> PoseFrame | None:
        return self._last_pose

    def snapshot(self) -> dict:
        """Wire-facing state snapshot."""
        rec = self.recording
        return {
            "session_id": self.session_id,
            "stroke": {
                "id": rec.id,
                "name": rec.name,
                "frame_count": rec.frame_count,
                "start_frame": rec.start_frame,
                "end_frame": rec.end_frame,
                "keyframes": [
                    {"frame": k, "label": rec.keyframe_labels.get(k, "")}
                    for k in rec.keyframes
                ],
            },
            "playback": {
                "position": self.playback.position,
                "speed": self.playback.speed,
                "paused": self.playback.paused,
                "looping": self.playback.looping,
            },
            "cue_toggles": {name: getattr(self.cue_toggles, name) for name in CUE_NAMES},
            "scale": self.scale,
            "user_height_m": self.user_height,
            "anchor": self.anchor.tolist(),
            "window": self.config.window,
            "xi_joint": self.config.xi_joint,
            "xi_paddle": self.config.xi_paddle,
        }


def create_session(
    library: StrokeLibrary,
    stroke_id: str,
    user_height: float,
    anchor=(0.0, 0.0, 0.0),
    config: SessionConfig | None = None,
) -> TrainingSession:
    """Start a paused session at position 0 for the given stroke."""
    try:
        rec = library.load(stroke_id)
    except NotFound:
        raise StrokeNotFound(f"no stroke with id {stroke_id!r}") from None
    return TrainingSession(rec, user_height, anchor, config)
