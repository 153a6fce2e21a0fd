// Control panel: every user gesture issues exactly one API call, and the
// UI state updates only from the snapshot the service returns.

import { speedDown, speedUp } from "./colors.js";
import { ApiError, ServiceClient } from "./api.js";
import { ViewModel } from "./model.js";
import type { ControlCommand, StrokeSummary } from "./types.js";

export class ControlPanel {
  private client: ServiceClient;
  private model: ViewModel;
  private onUpdate: () => void;
  private onSessionStart: (sessionId: string) => void;
  private root: HTMLElement;
  private pending = false;
  private strokes: StrokeSummary[] = [];

  private strokeSelect!: HTMLSelectElement;
  private heightInput!: HTMLInputElement;
  private pauseButton!: HTMLButtonElement;
  private speedLabel!: HTMLSpanElement;
  private seek!: HTMLInputElement;
  private seekTicks!: HTMLDataListElement;
  private loopBox!: HTMLInputElement;
  private cueBoxes: Record<string, HTMLInputElement> = {};
  private toast!: HTMLDivElement;
  private buttons: HTMLButtonElement[] = [];

  constructor(
    root: HTMLElement,
    client: ServiceClient,
    model: ViewModel,
    onUpdate: () => void,
    onSessionStart: (sessionId: string) => void,
  ) {
    this.root = root;
    this.client = client;
    this.model = model;
    this.onUpdate = onUpdate;
    this.onSessionStart = onSessionStart;
    this.build();
  }

  private build(): void {
    const h = (tag: string, cls?: string): HTMLElement => {
      const el = document.createElement(tag);
      if (cls) el.className = cls;
      this.root.appendChild(el);
      return el;
    };

    const pickerRow = h("div", "row");
    this.strokeSelect = document.createElement("select");
    pickerRow.appendChild(this.strokeSelect);
    this.heightInput = document.createElement("input");
    this.heightInput.type = "number";
    this.heightInput.step = "0.01";
    this.heightInput.value = "1.75";
    this.heightInput.title = "your height in meters";
    pickerRow.appendChild(this.heightInput);
    this.button(pickerRow, "start", () => this.startSession());

    const playbackRow = h("div", "row");
    this.pauseButton = this.button(playbackRow, "resume", () => this.togglePause());
    this.button(playbackRow, "slower", () => this.stepSpeed(-1));
    this.speedLabel = document.createElement("span");
    this.speedLabel.textContent = "1x";
    playbackRow.appendChild(this.speedLabel);
    this.button(playbackRow, "faster", () => this.stepSpeed(1));
    this.loopBox = document.createElement("input");
    this.loopBox.type = "checkbox";
    this.loopBox.onchange = () =>
      this.send({ command: "loop", on: this.loopBox.checked });
    playbackRow.appendChild(this.loopBox);
    playbackRow.appendChild(document.createTextNode("loop"));

    const seekRow = h("div", "row");
    this.seek = document.createElement("input");
    this.seek.type = "range";
    this.seek.min = "0";
    this.seek.value = "0";
    this.seekTicks = document.createElement("datalist");
    this.seekTicks.id = "keyframe-ticks";
    this.seek.setAttribute("list", this.seekTicks.id);
    this.seek.onchange = () =>
      this.send({ command: "seek", frame: Number(this.seek.value) });
    seekRow.appendChild(this.seek);
    seekRow.appendChild(this.seekTicks);

    const cueRow = h("div", "row");
    for (const cue of [
      "detached_expert",
      "detached_user",
      "onbody_body",
      "onbody_paddle",
    ] as const) {
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = true;
      box.onchange = () => this.send({ command: "toggle", cue });
      this.cueBoxes[cue] = box;
      cueRow.appendChild(box);
      cueRow.appendChild(document.createTextNode(cue.replace("_", " ") + " "));
    }

    this.toast = h("div", "toast") as HTMLDivElement;
  }

  private button(
    parent: HTMLElement,
    label: string,
    onClick: () => void,
  ): HTMLButtonElement {
    const b = document.createElement("button");
    b.textContent = label;
    b.onclick = onClick;
    parent.appendChild(b);
    this.buttons.push(b);
    return b;
  }

  async refreshStrokes(): Promise<void> {
    this.strokes = await this.client.listStrokes();
    this.model.setStrokes(this.strokes);
    this.strokeSelect.innerHTML = "";
    for (const s of this.strokes) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = `${s.name} (${s.frame_count} frames)`;
      this.strokeSelect.appendChild(opt);
    }
    this.onUpdate();
  }

  private setPending(on: boolean): void {
    this.pending = on;
    for (const b of this.buttons) b.disabled = on;
  }

  private showError(err: unknown): void {
    this.toast.textContent =
      err instanceof ApiError ? err.message : `request failed: ${err}`;
    setTimeout(() => {
      this.toast.textContent = "";
    }, 4000);
  }

  private applySnapshot(): void {
    const snap = this.model.currentSnapshot();
    if (!snap) return;
    this.pauseButton.textContent = snap.playback.paused ? "resume" : "pause";
    this.speedLabel.textContent = `${snap.playback.speed}x`;
    this.loopBox.checked = snap.playback.looping;
    const span = snap.stroke.end_frame - snap.stroke.start_frame;
    this.seek.max = String(span);
    this.seek.value = String(Math.round(snap.playback.position));
    this.seekTicks.innerHTML = "";
    for (const k of snap.stroke.keyframes) {
      const opt = document.createElement("option");
      opt.value = String(k.frame - snap.stroke.start_frame);
      opt.label = k.label;
      this.seekTicks.appendChild(opt);
    }
    for (const [cue, box] of Object.entries(this.cueBoxes)) {
      box.checked = snap.cue_toggles[cue as keyof typeof snap.cue_toggles];
    }
    this.onUpdate();
  }

  private async startSession(): Promise<void> {
    if (this.pending) return;
    this.setPending(true);
    try {
      const snap = await this.client.createSession(
        this.strokeSelect.value,
        Number(this.heightInput.value),
      );
      this.model.setSnapshot(snap);
      this.applySnapshot();
      this.onSessionStart(snap.session_id);
    } catch (err) {
      this.showError(err);
    } finally {
      this.setPending(false);
    }
  }

  private togglePause(): void {
    const snap = this.model.currentSnapshot();
    if (!snap) return;
    this.send({ command: snap.playback.paused ? "resume" : "pause" });
  }

  private stepSpeed(direction: 1 | -1): void {
    const snap = this.model.currentSnapshot();
    if (!snap) return;
    const next =
      direction === 1 ? speedUp(snap.playback.speed) : speedDown(snap.playback.speed);
    if (next === snap.playback.speed) return;
    this.send({ command: "set_speed", value: next });
  }

  private async send(command: ControlCommand): Promise<void> {
    const snap = this.model.currentSnapshot();
    if (!snap || this.pending) return;
    this.setPending(true);
    try {
      const updated = await this.client.control(snap.session_id, command);
      this.model.setSnapshot(updated);
      this.applySnapshot();
    } catch (err) {
      this.showError(err);
    } finally {
      this.setPending(false);
    }
  }
}
