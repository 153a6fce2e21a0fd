"""Operator command line: import and edit recordings, batch-compare,
replay a stream against a running service, and launch the service.

Exit codes: 0 on success, 2 for usage errors, 1 for domain failures
(schema violations, missing entities, unreachable service).

``replay`` prints a live per-second digest and a final summary. The final
summary is windowed (trailing 10-frame comparisons), so its numbers track
but do not exactly equal ``analyze`` on the same data, which warps the
full sequences at once.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx
import numpy as np

from .align import DEFAULT_WINDOW, DEFAULT_XI
from .analysis import analyze, render_table
from .errors import EngineError
from .recording import StrokeLibrary, ingest, reset, set_keyframes, trim
from .replay import run_replay
from .skeleton import get_topology
from .streams import load_paddle_stream, load_pose_stream, read_ndjson


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--library-dir",
        default=os.environ.get("STROKECOACH_LIBRARY", "./stroke-library"),
        help="directory holding recording files",
    )
    common.add_argument("--topology", default="default17", help="skeleton topology name")
    common.add_argument("--xi-joint", type=float, default=DEFAULT_XI)
    common.add_argument("--xi-paddle", type=float, default=DEFAULT_XI)
    common.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="strokecoach")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("import", parents=[common], help="ingest capture streams")
    p.add_argument("pose_file")
    p.add_argument("paddle_file")
    p.add_argument("--name", required=True)
    p.add_argument("--height", type=float, required=True, help="expert height in m")

    p = sub.add_parser("edit", parents=[common], help="trim / keyframe / reset")
    p.add_argument("recording_id")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--trim", nargs=2, type=int, metavar=("START", "END"))
    group.add_argument("--keyframe", nargs=2, metavar=("FRAME", "LABEL"))
    group.add_argument("--reset", action="store_true")

    p = sub.add_parser("analyze", parents=[common], help="compare two recordings")
    p.add_argument("user_recording")
    p.add_argument("expert_recording")
    p.add_argument("--out", default="analysis_report.json")

    p = sub.add_parser("replay", parents=[common], help="stream files into the service")
    p.add_argument("pose_file")
    p.add_argument("paddle_file")
    p.add_argument("--stroke", required=True, help="stroke id to practice against")
    p.add_argument("--height", type=float, required=True, help="user height in m")
    p.add_argument("--url", default="http://127.0.0.1:8016")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--anchor", nargs=3, type=float, default=[0.0, 0.0, 0.0])

    p = sub.add_parser("serve", parents=[common], help="run the training service")
    p.add_argument("--host", default=os.environ.get("STROKECOACH_HOST", "127.0.0.1"))
    p.add_argument(
        "--port", type=int, default=int(os.environ.get("STROKECOACH_PORT", "8016"))
    )
    return parser


def cmd_import(args) -> int:
    pose_path = Path(args.pose_file)
    paddle_path = Path(args.paddle_file)
    if not pose_path.exists():
        print(f"error: pose stream required, no file at {pose_path}", file=sys.stderr)
        return 1
    if not paddle_path.exists():
        print(f"error: paddle stream required, no file at {paddle_path}", file=sys.stderr)
        return 1
    topo = get_topology(args.topology)
    rec = ingest(
        load_pose_stream(pose_path, topo),
        load_paddle_stream(paddle_path),
        topo,
        args.name,
        args.height,
    )
    StrokeLibrary(args.library_dir).save(rec)
    print(rec.id)
    return 0


def cmd_edit(args) -> int:
    lib = StrokeLibrary(args.library_dir)
    rec = lib.load(args.recording_id)
    if args.trim:
        rec = trim(rec, args.trim[0], args.trim[1])
    elif args.keyframe:
        frame = int(args.keyframe[0])
        label = args.keyframe[1]
        labels = dict(rec.keyframe_labels)
        if label:
            labels[frame] = label
        rec = set_keyframes(rec, rec.keyframes + (frame,), labels)
    elif args.reset:
        rec = reset(rec)
    lib.save(rec)
    print(
        f"{rec.id}: frames [{rec.start_frame}, {rec.end_frame}], "
        f"keyframes {list(rec.keyframes)}"
    )
    return 0


def cmd_analyze(args) -> int:
    lib = StrokeLibrary(args.library_dir)
    user = lib.load(args.user_recording)
    expert = lib.load(args.expert_recording)
    report = analyze(user, expert, args.xi_joint, args.xi_paddle)
    Path(args.out).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    print(render_table(report))
    print(f"\nreport written to {args.out}")
    return 0


def cmd_replay(args) -> int:
    pose_records = read_ndjson(args.pose_file)
    paddle_records = read_ndjson(args.paddle_file)

    def on_second(second, events, flagged):
        print(f"t={second:>3}s  events={events}  flagged={flagged}")

    summary = asyncio.run(
        run_replay(
            args.url,
            args.stroke,
            args.height,
            pose_records,
            paddle_records,
            rate=args.rate,
            anchor=args.anchor,
            on_second=on_second,
        )
    )
    print(f"\nsession {summary.session_id}")
    print(f"frames sent      {summary.frames_sent}")
    print(f"feedback events  {summary.events}")
    print(f"stream errors    {summary.stream_errors}")
    scores = summary.mean_scores()
    if scores:
        print(f"mean body cost   {np.mean(list(scores.values())):.6f}")
        print(f"mean paddle cost {summary.mean_paddle_score():.6f}")
    if summary.joint_flag_counts:
        worst = sorted(summary.joint_flag_counts.items(), key=lambda kv: -kv[1])
        print("flagged joints   " + ", ".join(f"{j} x{n}" for j, n in worst))
    if summary.paddle_flags:
        print(f"paddle flagged   x{summary.paddle_flags}")
    if summary.latencies_ms:
        lat = np.asarray(summary.latencies_ms)
        print(
            f"latency ms       p50={np.percentile(lat, 50):.2f} "
            f"p95={np.percentile(lat, 95):.2f}"
        )
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(
        args.library_dir,
        host=args.host,
        port=args.port,
        window=args.window,
        xi_joint=args.xi_joint,
        xi_paddle=args.xi_paddle,
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "import": cmd_import,
        "edit": cmd_edit,
        "analyze": cmd_analyze,
        "replay": cmd_replay,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.cmd](args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (httpx.HTTPError, ConnectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
