import json
from pathlib import Path

import numpy as np
import pytest

from strokecoach.cli import main
from strokecoach.recording import StrokeLibrary
from strokecoach.skeleton import PoseFrame, default_topology
from strokecoach.streams import paddle_record, pose_record, write_ndjson
from strokecoach.synth import (
    offset_joint_bone,
    synth_paddle_stream,
    synth_pose_stream,
)

from helpers import free_port, run_service

TOPO = default_topology()


@pytest.fixture()
def workspace(tmp_path):
    poses = synth_pose_stream(TOPO, frames=40, seed=6, frozen=("L_hip", "R_hip", "L_knee"))
    paddles = synth_paddle_stream(poses[-1].t, seed=7)
    pose_file = tmp_path / "pose.ndjson"
    paddle_file = tmp_path / "paddle.ndjson"
    write_ndjson(pose_file, [pose_record(f, TOPO) for f in poses])
    write_ndjson(paddle_file, [paddle_record(f) for f in paddles])
    return {
        "dir": tmp_path,
        "lib": str(tmp_path / "lib"),
        "pose_file": str(pose_file),
        "paddle_file": str(paddle_file),
        "poses": poses,
        "paddles": paddles,
    }


def do_import(ws, capsys, pose_file=None, name="drive"):
    rc = main(
        [
            "import",
            pose_file or ws["pose_file"],
            ws["paddle_file"],
            "--name",
            name,
            "--height",
            "1.8",
            "--library-dir",
            ws["lib"],
        ]
    )
    assert rc == 0
    return capsys.readouterr().out.strip().splitlines()[-1]


class TestImport:
    def test_creates_recording_and_prints_id(self, workspace, capsys):
        rec_id = do_import(workspace, capsys)
        assert (Path(workspace["lib"]) / f"{rec_id}.json").exists()

    def test_missing_paddle_file(self, workspace, capsys):
        rc = main(
            [
                "import",
                workspace["pose_file"],
                str(workspace["dir"] / "absent.ndjson"),
                "--name",
                "x",
                "--height",
                "1.8",
                "--library-dir",
                workspace["lib"],
            ]
        )
        assert rc == 1
        assert "paddle stream required" in capsys.readouterr().err

    def test_non_monotonic_names_index(self, workspace, capsys):
        poses = list(workspace["poses"])
        poses[5] = PoseFrame(t=poses[4].t - 1.0, positions=poses[5].positions)
        bad = workspace["dir"] / "bad.ndjson"
        write_ndjson(bad, [pose_record(f, TOPO) for f in poses])
        rc = main(
            [
                "import",
                str(bad),
                workspace["paddle_file"],
                "--name",
                "bad",
                "--height",
                "1.8",
                "--library-dir",
                workspace["lib"],
            ]
        )
        assert rc == 1
        assert "index 5" in capsys.readouterr().err

    def test_usage_error_is_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["import"])
        assert exc.value.code == 2


class TestEdit:
    def test_trim_keyframe_reset_cycle(self, workspace, capsys):
        rec_id = do_import(workspace, capsys)
        lib_args = ["--library-dir", workspace["lib"]]
        assert main(["edit", rec_id, "--trim", "10", "30"] + lib_args) == 0
        assert main(["edit", rec_id, "--keyframe", "12", "back swing"] + lib_args) == 0
        lib = StrokeLibrary(workspace["lib"])
        rec = lib.load(rec_id)
        assert (rec.start_frame, rec.end_frame) == (10, 30)
        assert rec.keyframes == (12,)
        assert rec.keyframe_labels[12] == "back swing"
        assert main(["edit", rec_id, "--reset"] + lib_args) == 0
        rec = StrokeLibrary(workspace["lib"]).load(rec_id)
        assert (rec.start_frame, rec.end_frame) == (0, 39)
        assert rec.keyframes == ()

    def test_inverted_trim_fails(self, workspace, capsys):
        rec_id = do_import(workspace, capsys)
        rc = main(
            ["edit", rec_id, "--trim", "30", "10", "--library-dir", workspace["lib"]]
        )
        assert rc == 1

    def test_unknown_recording(self, workspace, capsys):
        rc = main(["edit", "ghost", "--reset", "--library-dir", workspace["lib"]])
        assert rc == 1


class TestAnalyze:
    def test_self_comparison_zero(self, workspace, capsys, tmp_path):
        rec_id = do_import(workspace, capsys)
        out = tmp_path / "report.json"
        rc = main(
            [
                "analyze",
                rec_id,
                rec_id,
                "--library-dir",
                workspace["lib"],
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["flagged_joints"] == []
        assert report["paddle_flagged"] is False
        assert max(report["per_joint_cost"].values()) < 1e-9
        assert report["summary"]["mean_body_cost"] < 1e-9
        assert "mean body cost" in capsys.readouterr().out

    def test_offset_joint_flagged(self, workspace, capsys, tmp_path):
        expert_id = do_import(workspace, capsys)
        user_poses = offset_joint_bone(workspace["poses"], TOPO, "L_knee", 60.0)
        user_file = workspace["dir"] / "user.ndjson"
        write_ndjson(user_file, [pose_record(f, TOPO) for f in user_poses])
        user_id = do_import(workspace, capsys, pose_file=str(user_file), name="offset")
        out = tmp_path / "report.json"
        rc = main(
            [
                "analyze",
                user_id,
                expert_id,
                "--library-dir",
                workspace["lib"],
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["flagged_joints"] == ["L_knee"]
        assert report["per_joint_cost"]["L_knee"] == pytest.approx(
            1 - np.cos(np.radians(30)), abs=1e-6
        )

    def test_time_stretched_copy_costs_negligible(self, workspace, capsys, tmp_path):
        expert_id = do_import(workspace, capsys)
        poses = workspace["poses"]
        stretched = []
        for i, f in enumerate(poses):
            dt = 1000.0 / 30.0
            stretched.append(PoseFrame(t=f.t * 2, positions=f.positions))
            stretched.append(PoseFrame(t=f.t * 2 + dt, positions=f.positions))
        stretch_file = workspace["dir"] / "stretched.ndjson"
        write_ndjson(stretch_file, [pose_record(f, TOPO) for f in stretched])
        paddle_file = workspace["dir"] / "paddle2.ndjson"
        write_ndjson(
            paddle_file,
            [
                paddle_record(f)
                for f in synth_paddle_stream(stretched[-1].t, seed=7)
            ],
        )
        rc = main(
            [
                "import",
                str(stretch_file),
                str(paddle_file),
                "--name",
                "stretched",
                "--height",
                "1.8",
                "--library-dir",
                workspace["lib"],
            ]
        )
        assert rc == 0
        stretched_id = capsys.readouterr().out.strip().splitlines()[-1]
        out = tmp_path / "report.json"
        rc = main(
            [
                "analyze",
                expert_id,
                stretched_id,
                "--library-dir",
                workspace["lib"],
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["flagged_joints"] == []
        assert max(report["per_joint_cost"].values()) < 1e-3

    def test_keyframe_rows_present(self, workspace, capsys, tmp_path):
        rec_id = do_import(workspace, capsys)
        lib_args = ["--library-dir", workspace["lib"]]
        main(["edit", rec_id, "--keyframe", "8", "prepare"] + lib_args)
        out = tmp_path / "report.json"
        main(["analyze", rec_id, rec_id, "--out", str(out)] + lib_args)
        report = json.loads(out.read_text())
        (row,) = report["keyframes"]
        assert row["frame"] == 8
        assert row["label"] == "prepare"
        assert row["user_frame"] == 8
        assert row["dissimilarity"] == pytest.approx(0.0, abs=1e-12)


class TestReplay:
    def test_service_down(self, workspace, capsys):
        rc = main(
            [
                "replay",
                workspace["pose_file"],
                workspace["paddle_file"],
                "--stroke",
                "any",
                "--height",
                "1.8",
                "--url",
                f"http://127.0.0.1:{free_port()}",
            ]
        )
        assert rc == 1

    def test_echo_replay_no_flags(self, workspace, capsys):
        rec_id = do_import(workspace, capsys)
        with run_service(workspace["lib"]) as url:
            rc = main(
                [
                    "replay",
                    workspace["pose_file"],
                    workspace["paddle_file"],
                    "--stroke",
                    rec_id,
                    "--height",
                    "1.8",
                    "--url",
                    url,
                    "--rate",
                    "8.0",
                ]
            )
        assert rc == 0
        out = capsys.readouterr().out
        assert "feedback events  31" in out
        assert "flagged joints" not in out
        assert "mean body cost   0.000000" in out

    def test_rate_scales_wall_time_not_events(self, workspace, capsys):
        import time

        rec_id = do_import(workspace, capsys)
        with run_service(workspace["lib"]) as url:
            durations = {}
            for rate in ("4.0", "8.0"):
                t0 = time.perf_counter()
                rc = main(
                    [
                        "replay",
                        workspace["pose_file"],
                        workspace["paddle_file"],
                        "--stroke",
                        rec_id,
                        "--height",
                        "1.8",
                        "--url",
                        url,
                        "--rate",
                        rate,
                    ]
                )
                durations[rate] = time.perf_counter() - t0
                assert rc == 0
                assert "feedback events  31" in capsys.readouterr().out
        assert durations["8.0"] < durations["4.0"]
