"""Write the console smoke-test fixtures into a directory:

  library/            stroke library with one bundled stroke
  user_pose.ndjson    the same motion with one joint held 60 degrees off
  user_paddle.ndjson  matching paddle stream
  meta.json           {"stroke_id": ..., "offset_joint": ...}
"""

import json
import sys
from pathlib import Path

from strokecoach.recording import StrokeLibrary, set_keyframes
from strokecoach.skeleton import default_topology
from strokecoach.streams import paddle_record, pose_record, write_ndjson
from strokecoach.synth import offset_joint_bone, synth_recording


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    topo = default_topology()
    target = "R_elbow"
    rec = synth_recording(
        name="bundled drive",
        seed=12,
        frames=60,
        frozen=("L_hip", "R_hip", target),
    )
    rec = set_keyframes(
        rec, [10, 30, 45], {10: "back swing", 30: "fore swing", 45: "recovery"}
    )
    StrokeLibrary(out / "library").save(rec)
    user_poses = offset_joint_bone(rec.pose_frames, topo, target, 60.0)
    write_ndjson(out / "user_pose.ndjson", [pose_record(f, topo) for f in user_poses])
    write_ndjson(out / "user_paddle.ndjson", [paddle_record(f) for f in rec.paddle_frames])
    (out / "meta.json").write_text(
        json.dumps({"stroke_id": rec.id, "offset_joint": target})
    )
    print(rec.id)


if __name__ == "__main__":
    main(sys.argv[1])
