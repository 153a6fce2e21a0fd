// Page wiring: connect to the service, build the control panel, subscribe
// to the feedback stream, and repaint on every change.

import { ServiceClient } from "./api.js";
import { ControlPanel } from "./controls.js";
import { ViewModel } from "./model.js";
import { attachOrbitControls, defaultCamera, drawScene } from "./render.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8016";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const panelRoot = document.getElementById("panel") as HTMLElement;
const status = document.getElementById("status") as HTMLElement;

const client = new ServiceClient(serviceUrl);
const model = new ViewModel();
const camera = defaultCamera();

let dirty = true;
const markDirty = () => {
  dirty = true;
};

function repaint(): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  const state = model.renderState();
  drawScene(ctx, state, camera, canvas.width, canvas.height);
  status.textContent = state.schemaWarnings
    ? `schema warnings: ${state.schemaWarnings}`
    : "";
}

function loop(): void {
  if (dirty) {
    repaint();
    dirty = false;
  }
  requestAnimationFrame(loop);
}

attachOrbitControls(canvas, camera, markDirty);
window.addEventListener("resize", markDirty);

const panel = new ControlPanel(panelRoot, client, model, markDirty, (sessionId) => {
  client.openFeedback(
    sessionId,
    (msg) => {
      if (model.applyFeedback(msg as Record<string, unknown>)) markDirty();
      else markDirty();
    },
    () => {
      model.setSnapshot(null);
      markDirty();
    },
  );
});

async function boot(): Promise<void> {
  try {
    model.setTopology(await client.topology("default17"));
    await panel.refreshStrokes();
  } catch (err) {
    status.textContent = `cannot reach service at ${serviceUrl}: ${err}`;
  }
  loop();
}

void boot();
