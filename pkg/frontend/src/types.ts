// Wire types mirroring the service schemas.

export type Vec3 = [number, number, number];

export interface KeyframeMark {
  frame: number;
  label: string;
}

export interface StrokeSummary {
  id: string;
  name: string;
  duration_ms: number;
  frame_count: number;
  start_frame: number;
  end_frame: number;
  keyframes: KeyframeMark[];
}

export interface PlaybackState {
  position: number;
  speed: number;
  paused: boolean;
  looping: boolean;
}

export interface CueToggles {
  detached_expert: boolean;
  detached_user: boolean;
  onbody_body: boolean;
  onbody_paddle: boolean;
}

export interface SessionSnapshot {
  session_id: string;
  stroke: {
    id: string;
    name: string;
    frame_count: number;
    start_frame: number;
    end_frame: number;
    keyframes: KeyframeMark[];
  };
  playback: PlaybackState;
  cue_toggles: CueToggles;
  scale: number;
  user_height_m: number;
  anchor: Vec3;
  window: number;
  xi_joint: number;
  xi_paddle: number;
}

export interface GuidanceWire {
  joint: string;
  trajectory: Vec3[];
}

export interface WireFeedback {
  type: "feedback";
  v: number;
  session_id: string;
  t: number;
  playback_position: number;
  per_joint_score: Record<string, number>;
  joint_errors: string[];
  paddle_score: number;
  paddle_error: boolean;
  window_span: [number, number];
  topology: string;
  expert_pose: Record<string, Vec3>;
  user_pose: Record<string, Vec3>;
  expert_angles: Record<string, [number, number, number, number]>;
  user_angles: Record<string, [number, number, number, number]>;
  guidance: GuidanceWire[];
}

export interface Topology {
  name: string;
  joints: string[];
  parent: Record<string, string | null>;
  end_joints: string[];
  comparison_joints: string[];
}

export type ControlCommand =
  | { command: "pause" }
  | { command: "resume" }
  | { command: "set_speed"; value: number }
  | { command: "seek"; frame: number }
  | { command: "toggle"; cue: keyof CueToggles }
  | { command: "loop"; on: boolean };
