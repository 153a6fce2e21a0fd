"""HTTP/WebSocket boundary around the stroke library and live sessions.

Request/response endpoints cover library listing and session lifecycle;
each session additionally exposes two persistent streams: ``/in`` accepts
pose and paddle records (same JSON shapes as the stream files, one record
per message) and ``/out`` broadcasts feedback messages to any number of
subscribers. Slow subscribers lose oldest messages rather than ever
blocking ingestion.

Playback advances on stream time: before each ingested pose the session
clock moves by the timestamp delta to the previous pose, scaled by the
playback speed. Identical frame/command timelines therefore produce
identical feedback streams, wall clock regardless.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import _kernels
from .align import DEFAULT_WINDOW, DEFAULT_XI
from .errors import EngineError, InvalidHeight, InvalidSpeed, NotFound, SchemaError
from .recording import StrokeLibrary, StrokeRecording
from .session import SessionConfig, TrainingSession, create_session
from .skeleton import get_topology
from .streams import parse_paddle_record, parse_pose_record

WIRE_VERSION = 1

CLOSE_NOT_FOUND = 4404

_SUBSCRIBER_QUEUE = 64

_CLOSE = object()


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8016
    window: int = DEFAULT_WINDOW
    xi_joint: float = DEFAULT_XI
    xi_paddle: float = DEFAULT_XI

    def session_config(self) -> SessionConfig:
        return SessionConfig(
            window=self.window, xi_joint=self.xi_joint, xi_paddle=self.xi_paddle
        )


class CreateSessionBody(BaseModel):
    stroke_id: str
    user_height_m: float
    anchor: list[float] = [0.0, 0.0, 0.0]


class ControlBody(BaseModel):
    command: str
    value: float | None = None
    frame: float | None = None
    cue: str | None = None
    on: bool | None = None


@dataclass
class SessionRuntime:
    """Engine session plus the async plumbing the service wraps around it."""

    session: TrainingSession
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: set[asyncio.Queue] = field(default_factory=set)
    in_sockets: set[WebSocket] = field(default_factory=set)
    pending_paddle: list = field(default_factory=list)
    last_stream_t: float | None = None
    closed: bool = False

    def publish(self, message: str) -> None:
        for q in self.subscribers:
            if q.full():
                try:
                    q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(message)

    def subscribe(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=_SUBSCRIBER_QUEUE)
        self.subscribers.add(q)
        return q

    def unsubscribe(self, q: asyncio.Queue) -> None:
        self.subscribers.discard(q)


def stroke_summary(rec: StrokeRecording) -> dict:
    return {
        "id": rec.id,
        "name": rec.name,
        "duration_ms": rec.duration_ms,
        "frame_count": rec.frame_count,
        "start_frame": rec.start_frame,
        "end_frame": rec.end_frame,
        "keyframes": [
            {"frame": k, "label": rec.keyframe_labels.get(k, "")}
            for k in rec.keyframes
        ],
    }


def wire_feedback(session: TrainingSession, event) -> dict:
    """Serialize a FeedbackEvent plus the avatar data the viewer renders."""
    topo = session.topology
    user_pose = session.latest_user_pose()
    expert_positions = session.expert_avatar_positions()
    if event.joint_errors or event.paddle_error:
        cues = session.guidance(event.joint_errors, event.paddle_error)
    else:
        cues = []
    return {
        "type": "feedback",
        "v": WIRE_VERSION,
        "session_id": event.session_id,
        "t": event.user_frame_timestamp,
        "playback_position": event.playback_position,
        "per_joint_score": event.per_joint_score,
        "joint_errors": list(event.joint_errors),
        "paddle_score": event.paddle_score,
        "paddle_error": event.paddle_error,
        "window_span": list(event.window_span),
        "topology": topo.name,
        "expert_pose": {
            j: expert_positions[i].tolist() for i, j in enumerate(topo.joints)
        },
        "user_pose": user_pose.to_mapping(topo) if user_pose is not None else {},
        "expert_angles": {
            j: [float(c) for c in event.expert_angle_frame.angles[i]]
            for i, j in enumerate(topo.comparison_joints)
        },
        "user_angles": {
            j: [float(c) for c in event.user_angle_frame.angles[i]]
            for i, j in enumerate(topo.comparison_joints)
        },
        "guidance": [
            {"joint": c.joint, "trajectory": c.trajectory.tolist()} for c in cues
        ],
    }


def build_app(library: StrokeLibrary, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="strokecoach", version="0.1.0")
    # desk tool, no auth: let the browser console connect from any origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, SessionRuntime] = {}
    _kernels.warmup()

    def runtime_or_404(session_id: str) -> SessionRuntime:
        rt = sessions.get(session_id)
        if rt is None:
            raise HTTPException(status_code=404, detail="session not found")
        return rt

    @app.get("/strokes")
    def list_strokes():
        return [stroke_summary(rec) for rec in library.all()]

    @app.get("/topologies/{name}")
    def topology(name: str):
        try:
            topo = get_topology(name)
        except ValueError:
            raise HTTPException(status_code=404, detail="unknown topology")
        return {
            "name": topo.name,
            "joints": list(topo.joints),
            "parent": topo.parent,
            "end_joints": sorted(topo.end_joints),
            "comparison_joints": list(topo.comparison_joints),
        }

    @app.post("/sessions", status_code=201)
    async def create(body: CreateSessionBody):
        try:
            session = create_session(
                library,
                body.stroke_id,
                body.user_height_m,
                body.anchor,
                config.session_config(),
            )
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except InvalidHeight as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        sessions[session.session_id] = SessionRuntime(session=session)
        return session.snapshot()

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        rt = runtime_or_404(session_id)
        async with rt.lock:
            return rt.session.snapshot()

    @app.post("/sessions/{session_id}/control")
    async def control(session_id: str, body: ControlBody):
        rt = runtime_or_404(session_id)
        payload = {k: v for k, v in body.model_dump().items() if v is not None}
        async with rt.lock:
            try:
                rt.session.control(payload)
            except (InvalidSpeed, SchemaError) as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return rt.session.snapshot()

    @app.delete("/sessions/{session_id}", status_code=204)
    async def delete(session_id: str):
        rt = sessions.pop(session_id, None)
        if rt is None:
            raise HTTPException(status_code=404, detail="session not found")
        async with rt.lock:
            rt.closed = True
        for q in list(rt.subscribers):
            q.put_nowait(_CLOSE)
        for ws in list(rt.in_sockets):
            try:
                await ws.close(code=CLOSE_NOT_FOUND, reason="session deleted")
            except RuntimeError:
                pass

    @app.websocket("/sessions/{session_id}/in")
    async def stream_in(ws: WebSocket, session_id: str):
        await ws.accept()
        rt = sessions.get(session_id)
        if rt is None:
            await ws.close(code=CLOSE_NOT_FOUND, reason="session not found")
            return
        rt.in_sockets.add(ws)
        topo = rt.session.topology
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "error": "invalid JSON"})
                    continue
                try:
                    message = None
                    if isinstance(obj, dict) and "joints" in obj:
                        pose = parse_pose_record(obj, topo)
                        async with rt.lock:
                            if rt.closed:
                                break
                            if rt.last_stream_t is not None:
                                dt = pose.t - rt.last_stream_t
                                if dt > 0:
                                    rt.session.advance_clock(dt)
                            event = rt.session.ingest_user(pose, rt.pending_paddle)
                            rt.pending_paddle.clear()
                            rt.last_stream_t = pose.t
                            if event is not None:
                                message = json.dumps(wire_feedback(rt.session, event))
                            if message is not None:
                                rt.publish(message)
                    elif isinstance(obj, dict) and "quat" in obj:
                        paddle = parse_paddle_record(obj)
                        async with rt.lock:
                            if rt.closed:
                                break
                            rt.pending_paddle.append(paddle)
                    else:
                        raise SchemaError("record is neither a pose nor a paddle sample")
                except EngineError as exc:
                    await ws.send_json({"type": "error", "error": str(exc)})
        except WebSocketDisconnect:
            pass
        finally:
            rt.in_sockets.discard(ws)

    @app.websocket("/sessions/{session_id}/out")
    async def stream_out(ws: WebSocket, session_id: str):
        await ws.accept()
        rt = sessions.get(session_id)
        if rt is None:
            await ws.close(code=CLOSE_NOT_FOUND, reason="session not found")
            return
        queue = rt.subscribe()
        try:
            while True:
                message = await queue.get()
                if message is _CLOSE:
                    await ws.close(code=CLOSE_NOT_FOUND, reason="session deleted")
                    break
                await ws.send_text(message)
        except WebSocketDisconnect:
            pass
        finally:
            rt.unsubscribe(queue)

    return app


def serve(
    library_dir,
    host: str = "127.0.0.1",
    port: int = 8016,
    window: int = DEFAULT_WINDOW,
    xi_joint: float = DEFAULT_XI,
    xi_paddle: float = DEFAULT_XI,
    log_level: str = "info",
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    library = StrokeLibrary(library_dir)
    config = ServiceConfig(
        host=host, port=port, window=window, xi_joint=xi_joint, xi_paddle=xi_paddle
    )
    app = build_app(library, config)
    uvicorn.run(app, host=host, port=port, log_level=log_level)
