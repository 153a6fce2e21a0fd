// View model: render state is a pure function of the last snapshot, the
// last feedback message, and the topology. Control responses are the only
// way session state changes here; nothing is updated optimistically.

import { COLORS } from "./colors.js";
import type {
  SessionSnapshot,
  StrokeSummary,
  Topology,
  Vec3,
  WireFeedback,
} from "./types.js";

export interface Segment {
  from: Vec3;
  to: Vec3;
}

export interface JointDot {
  name: string;
  pos: Vec3;
  color: string;
}

export interface SkeletonRender {
  kind: "expert" | "user";
  color: string;
  segments: Segment[];
  joints: JointDot[];
}

export interface PolylineRender {
  joint: string;
  color: string;
  points: Vec3[];
}

export interface RenderState {
  strokes: StrokeSummary[];
  snapshot: SessionSnapshot | null;
  skeletons: SkeletonRender[];
  guidance: PolylineRender[];
  pinkJoints: string[];
  paddleError: boolean;
  schemaWarnings: number;
}

const WIRE_VERSION = 1;

export function skeletonFromPose(
  pose: Record<string, Vec3>,
  topology: Topology,
  kind: "expert" | "user",
  errorJoints: string[] = [],
): SkeletonRender {
  const base = kind === "expert" ? COLORS.expert : COLORS.user;
  const segments: Segment[] = [];
  for (const joint of topology.joints) {
    const parent = topology.parent[joint];
    if (!parent) continue;
    const from = pose[parent];
    const to = pose[joint];
    if (from && to) segments.push({ from, to });
  }
  const joints: JointDot[] = topology.joints
    .filter((j) => pose[j] !== undefined)
    .map((j) => ({
      name: j,
      pos: pose[j],
      color: errorJoints.includes(j) ? COLORS.error : base,
    }));
  return { kind, color: base, segments, joints };
}

export function deriveRenderState(
  strokes: StrokeSummary[],
  topology: Topology | null,
  snapshot: SessionSnapshot | null,
  feedback: WireFeedback | null,
  schemaWarnings: number,
): RenderState {
  const skeletons: SkeletonRender[] = [];
  const guidance: PolylineRender[] = [];
  let pinkJoints: string[] = [];
  let paddleError = false;
  if (topology && snapshot && feedback) {
    const toggles = snapshot.cue_toggles;
    if (toggles.detached_expert) {
      skeletons.push(skeletonFromPose(feedback.expert_pose, topology, "expert"));
    }
    if (toggles.detached_user) {
      skeletons.push(
        skeletonFromPose(feedback.user_pose, topology, "user", feedback.joint_errors),
      );
      pinkJoints = feedback.joint_errors.slice();
    }
    paddleError = feedback.paddle_error;
    for (const cue of feedback.guidance) {
      const wanted = cue.joint === "paddle" ? toggles.onbody_paddle : toggles.onbody_body;
      if (wanted) {
        guidance.push({ joint: cue.joint, color: COLORS.guidance, points: cue.trajectory });
      }
    }
  }
  return { strokes, snapshot, skeletons, guidance, pinkJoints, paddleError, schemaWarnings };
}

export class ViewModel {
  private strokes: StrokeSummary[] = [];
  private topology: Topology | null = null;
  private snapshot: SessionSnapshot | null = null;
  private feedback: WireFeedback | null = null;
  private schemaWarnings = 0;

  setStrokes(strokes: StrokeSummary[]): void {
    this.strokes = strokes;
  }

  setTopology(topology: Topology): void {
    this.topology = topology;
  }

  setSnapshot(snapshot: SessionSnapshot | null): void {
    this.snapshot = snapshot;
    if (snapshot === null) this.feedback = null;
  }

  currentSnapshot(): SessionSnapshot | null {
    return this.snapshot;
  }

  applyFeedback(msg: Record<string, unknown>): boolean {
    if (
      msg["type"] !== "feedback" ||
      msg["v"] !== WIRE_VERSION ||
      (this.topology && msg["topology"] !== this.topology.name)
    ) {
      this.schemaWarnings += 1;
      console.warn("dropping schema-mismatched message", msg["type"], msg["v"]);
      return false;
    }
    this.feedback = msg as unknown as WireFeedback;
    return true;
  }

  renderState(): RenderState {
    return deriveRenderState(
      this.strokes,
      this.topology,
      this.snapshot,
      this.feedback,
      this.schemaWarnings,
    );
  }
}
