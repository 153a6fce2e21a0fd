"""Streaming client that replays captured streams into a running service.

Stands in for the webcam-plus-IMU capture rig: it creates a session,
resumes playback, pushes pose and paddle records over the ``/in`` socket at
their native pacing (optionally time-scaled), and collects the feedback
stream from ``/out`` together with send-to-receive latencies.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time
from dataclasses import dataclass, field

import httpx
import websockets


@dataclass
class ReplaySummary:
    session_id: str = ""
    frames_sent: int = 0
    events: int = 0
    stream_errors: int = 0
    joint_flag_counts: dict[str, int] = field(default_factory=dict)
    paddle_flags: int = 0
    score_sums: dict[str, float] = field(default_factory=dict)
    paddle_score_sum: float = 0.0
    latencies_ms: list[float] = field(default_factory=list)
    wall_seconds: float = 0.0

    def mean_scores(self) -> dict[str, float]:
        if not self.events:
            return {}
        return {j: s / self.events for j, s in self.score_sums.items()}

    def mean_paddle_score(self) -> float:
        return self.paddle_score_sum / self.events if self.events else 0.0


def _ws_url(base_url: str, path: str) -> str:
    scheme = "wss" if base_url.startswith("https") else "ws"
    return scheme + ":" + base_url.split(":", 1)[1] + path


async def run_replay(
    base_url: str,
    stroke_id: str,
    user_height_m: float,
    pose_records: list[dict],
    paddle_records: list[dict],
    rate: float = 1.0,
    anchor=(0.0, 0.0, 0.0),
    on_second=None,
) -> ReplaySummary:
    """Stream the given records into a new session and gather feedback.

    rate scales wall-clock pacing only (2.0 halves the wall time); record
    timestamps are sent unchanged, so the feedback content is rate-
    independent. on_second, when given, is called with (second_index,
    events_so_far, flagged_events_so_far) once per elapsed stream second.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    summary = ReplaySummary()
    async with httpx.AsyncClient(base_url=base_url, timeout=10.0) as client:
        resp = await client.post(
            "/sessions",
            json={
                "stroke_id": stroke_id,
                "user_height_m": user_height_m,
                "anchor": list(anchor),
            },
        )
        resp.raise_for_status()
        session_id = resp.json()["session_id"]
        summary.session_id = session_id
        resp = await client.post(
            f"/sessions/{session_id}/control", json={"command": "resume"}
        )
        resp.raise_for_status()

        send_times: dict[float, float] = {}
        sender_done = asyncio.Event()
        last_t = pose_records[-1]["t"] if pose_records else 0.0
        start_wall = time.perf_counter()

        async def sender(ws_in):
            paddle_iter = iter(paddle_records)
            pending = next(paddle_iter, None)
            t0 = pose_records[0]["t"] if pose_records else 0.0
            loop_start = asyncio.get_running_loop().time()
            for rec in pose_records:
                target = loop_start + (rec["t"] - t0) / 1000.0 / rate
                delay = target - asyncio.get_running_loop().time()
                if delay > 0:
                    await asyncio.sleep(delay)
                while pending is not None and pending["t"] <= rec["t"]:
                    await ws_in.send(json.dumps(pending))
                    pending = next(paddle_iter, None)
                send_times[rec["t"]] = time.perf_counter()
                await ws_in.send(json.dumps(rec))
                summary.frames_sent += 1
            sender_done.set()

        async def receiver(ws_out):
            flagged = 0
            next_second = 1
            while True:
                raw = await ws_out.recv()
                now = time.perf_counter()
                msg = json.loads(raw)
                if msg.get("type") == "feedback":
                    summary.events += 1
                    sent = send_times.get(msg["t"])
                    if sent is not None:
                        summary.latencies_ms.append((now - sent) * 1000.0)
                    for j, s in msg["per_joint_score"].items():
                        summary.score_sums[j] = summary.score_sums.get(j, 0.0) + s
                    for j in msg["joint_errors"]:
                        summary.joint_flag_counts[j] = (
                            summary.joint_flag_counts.get(j, 0) + 1
                        )
                    if msg["joint_errors"] or msg["paddle_error"]:
                        flagged += 1
                    if msg["paddle_error"]:
                        summary.paddle_flags += 1
                    summary.paddle_score_sum += msg["paddle_score"]
                    if on_second is not None:
                        elapsed = now - start_wall
                        while elapsed >= next_second:
                            on_second(next_second, summary.events, flagged)
                            next_second += 1
                    if sender_done.is_set() and msg["t"] >= last_t:
                        return
                elif msg.get("type") == "error":
                    summary.stream_errors += 1

        in_url = _ws_url(base_url, f"/sessions/{session_id}/in")
        out_url = _ws_url(base_url, f"/sessions/{session_id}/out")
        async with websockets.connect(out_url, max_size=None) as ws_out:
            async with websockets.connect(in_url, max_size=None) as ws_in:
                recv_task = asyncio.create_task(receiver(ws_out))
                await sender(ws_in)
                done, _ = await asyncio.wait({recv_task}, timeout=2.0)
                if not done:
                    recv_task.cancel()
                with contextlib.suppress(
                    asyncio.CancelledError, websockets.ConnectionClosed
                ):
                    await recv_task
        summary.wall_seconds = time.perf_counter() - start_wall
        await client.delete(f"/sessions/{session_id}")
    return summary
