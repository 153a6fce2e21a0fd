// Live-service smoke suite: boots the real Python service on a loopback
// port with a bundled stroke, then drives it exactly the way the console
// does: REST for control (one call per gesture), websockets for frames
// and feedback, ViewModel for render state.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";

import { ServiceClient, type FetchFn, type SocketLike } from "../src/api.js";
import { ViewModel } from "../src/model.js";
import { COLORS } from "../src/colors.js";
import type { CueToggles, SessionSnapshot } from "../src/types.js";

const HERE = new URL(".", import.meta.url).pathname;

let child: ChildProcess | null = null;
let baseUrl = "";
let strokeId = "";
let offsetJoint = "";
let fixtureDir = "";

let apiCalls = 0;
const countingFetch: FetchFn = (url, init) => {
  apiCalls += 1;
  return fetch(url, init);
};

const wsFactory = (url: string): SocketLike =>
  new WebSocket(url) as unknown as SocketLike;

const client = () => new ServiceClient(baseUrl, countingFetch, wsFactory);

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr && typeof addr === "object") {
        const port = addr.port;
        srv.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}

async function waitForService(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(url + "/strokes");
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await sleep(250);
  }
}

function waitOpen(sock: SocketLike): Promise<void> {
  return new Promise((resolve) => {
    sock.onopen = () => resolve();
  });
}

function readNdjson(path: string): Record<string, unknown>[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim())
    .map((l) => JSON.parse(l));
}

beforeAll(async () => {
  fixtureDir = mkdtempSync(join(tmpdir(), "console-smoke-"));
  execFileSync("python3", [join(HERE, "../scripts/gen_fixtures.py"), fixtureDir]);
  const meta = JSON.parse(readFileSync(join(fixtureDir, "meta.json"), "utf-8"));
  strokeId = meta.stroke_id;
  offsetJoint = meta.offset_joint;

  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  child = spawn(
    "python3",
    [
      "-m",
      "strokecoach.cli",
      "serve",
      "--library-dir",
      join(fixtureDir, "library"),
      "--port",
      String(port),
      "--host",
      "127.0.0.1",
    ],
    { stdio: "ignore" },
  );
  await waitForService(baseUrl, 150_000);
});

afterAll(() => {
  child?.kill("SIGTERM");
});

describe("trainer console against a live service", () => {
  const model = new ViewModel();

  it("renders the stroke list", async () => {
    const api = client();
    model.setTopology(await api.topology("default17"));
    model.setStrokes(await api.listStrokes());
    const state = model.renderState();
    expect(state.strokes).toHaveLength(1);
    expect(state.strokes[0].name).toBe("bundled drive");
    expect(state.strokes[0].keyframes.map((k) => k.label)).toEqual([
      "back swing",
      "fore swing",
      "recovery",
    ]);
  });

  it("creates a session with one API call and a matching snapshot", async () => {
    const api = client();
    apiCalls = 0;
    const snap = await api.createSession(strokeId, 1.75);
    expect(apiCalls).toBe(1);
    expect(snap.playback.paused).toBe(true);
    expect(snap.playback.position).toBe(0);
    expect(snap.stroke.id).toBe(strokeId);
    model.setSnapshot(snap);
  });

  it("pause/resume each cost one call and update the snapshot", async () => {
    const api = client();
    const sid = model.currentSnapshot()!.session_id;
    apiCalls = 0;
    let snap = await api.control(sid, { command: "resume" });
    expect(apiCalls).toBe(1);
    expect(snap.playback.paused).toBe(false);
    apiCalls = 0;
    snap = await api.control(sid, { command: "pause" });
    expect(apiCalls).toBe(1);
    expect(snap.playback.paused).toBe(true);
    model.setSnapshot(snap);
  });

  it("sets half speed with one call", async () => {
    const api = client();
    const sid = model.currentSnapshot()!.session_id;
    apiCalls = 0;
    const snap = await api.control(sid, { command: "set_speed", value: 0.5 });
    expect(apiCalls).toBe(1);
    expect(snap.playback.speed).toBe(0.5);
    model.setSnapshot(snap);
  });

  it("each cue toggle is one call and flips the snapshot", async () => {
    const api = client();
    const sid = model.currentSnapshot()!.session_id;
    const cues: (keyof CueToggles)[] = [
      "detached_expert",
      "detached_user",
      "onbody_body",
      "onbody_paddle",
    ];
    for (const cue of cues) {
      const before = model.currentSnapshot()!.cue_toggles[cue];
      apiCalls = 0;
      let snap = await api.control(sid, { command: "toggle", cue });
      expect(apiCalls).toBe(1);
      expect(snap.cue_toggles[cue]).toBe(!before);
      apiCalls = 0;
      snap = await api.control(sid, { command: "toggle", cue });
      expect(apiCalls).toBe(1);
      expect(snap.cue_toggles[cue]).toBe(before);
      model.setSnapshot(snap);
    }
  });

  it("renders exactly one pink joint and a purple guidance polyline for an injected error", async () => {
    const api = client();
    // fresh session so playback tracks the injected stream from zero
    const snap: SessionSnapshot = await api.createSession(strokeId, 1.75);
    const sid = snap.session_id;
    model.setSnapshot(await api.control(sid, { command: "resume" }));

    const poses = readNdjson(join(fixtureDir, "user_pose.ndjson"));
    const paddles = readNdjson(join(fixtureDir, "user_paddle.ndjson"));

    const feedback: Record<string, unknown>[] = [];
    let resolveDone: () => void = () => {};
    const done = new Promise<void>((r) => {
      resolveDone = r;
    });
    const lastT = poses[poses.length - 1].t as number;
    const out = api.openFeedback(sid, (msg) => {
      if ((msg as { type?: string }).type === "feedback") {
        feedback.push(msg as Record<string, unknown>);
        if ((msg as { t: number }).t >= lastT) resolveDone();
      }
    });
    const input = api.openInput(sid);
    await waitOpen(input);

    let paddleIdx = 0;
    for (const pose of poses) {
      while (
        paddleIdx < paddles.length &&
        (paddles[paddleIdx].t as number) <= (pose.t as number)
      ) {
        input.send(JSON.stringify(paddles[paddleIdx]));
        paddleIdx += 1;
      }
      input.send(JSON.stringify(pose));
    }
    await done;
    input.close();
    out.close();

    expect(feedback.length).toBe(poses.length - 9);
    const last = feedback[feedback.length - 1];
    expect(model.applyFeedback(last)).toBe(true);
    const state = model.renderState();

    expect(state.pinkJoints).toEqual([offsetJoint]);
    const user = state.skeletons.find((s) => s.kind === "user")!;
    const pink = user.joints.filter((j) => j.color === COLORS.error);
    expect(pink).toHaveLength(1);
    expect(pink[0].name).toBe(offsetJoint);

    expect(state.guidance.length).toBeGreaterThanOrEqual(1);
    for (const line of state.guidance) {
      expect(line.color).toBe(COLORS.guidance);
      expect(line.points).toHaveLength(10);
    }
    expect(state.guidance.map((g) => g.joint)).toContain(offsetJoint);

    await api.deleteSession(sid);
  });
});
