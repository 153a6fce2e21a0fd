// Canvas renderer: a small perspective projection with an orbit camera,
// enough to show two skeletons side by side and guidance polylines
// without pulling in a 3D engine.

import { COLORS } from "./colors.js";
import type { RenderState } from "./model.js";
import type { Vec3 } from "./types.js";

export interface Camera {
  yaw: number;
  pitch: number;
  distance: number;
  target: Vec3;
}

export function defaultCamera(): Camera {
  // starts 3 m back from the avatars, slightly above waist height
  return { yaw: 0, pitch: 0.15, distance: 3.0, target: [0, 0.2, 0] };
}

function basis(cam: Camera) {
  const cp: Vec3 = [
    cam.target[0] + cam.distance * Math.cos(cam.pitch) * Math.sin(cam.yaw),
    cam.target[1] + cam.distance * Math.sin(cam.pitch),
    cam.target[2] + cam.distance * Math.cos(cam.pitch) * Math.cos(cam.yaw),
  ];
  const fwd = norm3(sub3(cam.target, cp));
  const right = norm3(cross3(fwd, [0, 1, 0]));
  const up = cross3(right, fwd);
  return { cp, fwd, right, up };
}

const sub3 = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const dot3 = (a: Vec3, b: Vec3) => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
const cross3 = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];
function norm3(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}

export function project(
  p: Vec3,
  cam: Camera,
  width: number,
  height: number,
): [number, number] | null {
  const { cp, fwd, right, up } = basis(cam);
  const rel = sub3(p, cp);
  const z = dot3(rel, fwd);
  if (z < 0.05) return null;
  const focal = 1.2;
  const sx = width / 2 + (dot3(rel, right) * focal * height) / z;
  const sy = height / 2 - (dot3(rel, up) * focal * height) / z;
  return [sx, sy];
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  points: Vec3[],
  cam: Camera,
  w: number,
  h: number,
  color: string,
  width: number,
) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  let started = false;
  for (const p of points) {
    const s = project(p, cam, w, h);
    if (!s) {
      started = false;
      continue;
    }
    if (started) ctx.lineTo(s[0], s[1]);
    else ctx.moveTo(s[0], s[1]);
    started = true;
  }
  ctx.stroke();
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera, w: number, h: number) {
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const y = -1.0;
  for (let i = -4; i <= 4; i++) {
    drawPolyline(ctx, [[i, y, -4], [i, y, 4]], cam, w, h, COLORS.grid, 1);
    drawPolyline(ctx, [[-4, y, i], [4, y, i]], cam, w, h, COLORS.grid, 1);
  }
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  state: RenderState,
  cam: Camera,
  width: number,
  height: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  drawGrid(ctx, cam, width, height);

  for (const skel of state.skeletons) {
    for (const seg of skel.segments) {
      drawPolyline(ctx, [seg.from, seg.to], cam, width, height, skel.color, 3);
    }
    for (const j of skel.joints) {
      const s = project(j.pos, cam, width, height);
      if (!s) continue;
      ctx.fillStyle = j.color;
      ctx.beginPath();
      ctx.arc(s[0], s[1], j.color === COLORS.error ? 7 : 4, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  for (const line of state.guidance) {
    drawPolyline(ctx, line.points, cam, width, height, line.color, 2.5);
  }
}

export function attachOrbitControls(
  canvas: HTMLCanvasElement,
  cam: Camera,
  onChange: () => void,
): void {
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("mousedown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
  });
  window.addEventListener("mouseup", () => {
    dragging = false;
  });
  window.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    cam.yaw += (e.clientX - lastX) * 0.008;
    cam.pitch = Math.min(1.4, Math.max(-1.4, cam.pitch + (e.clientY - lastY) * 0.006));
    lastX = e.clientX;
    lastY = e.clientY;
    onChange();
  });
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    cam.distance = Math.min(12, Math.max(0.8, cam.distance * (1 + e.deltaY * 0.001)));
    onChange();
  });
}
