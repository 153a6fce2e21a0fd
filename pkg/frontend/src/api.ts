// Thin client over the service endpoints. fetch and WebSocket are
// injectable so tests can count calls and run under node.

import type {
  ControlCommand,
  SessionSnapshot,
  StrokeSummary,
  Topology,
  WireFeedback,
} from "./types.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: { code?: number }) => void) | null;
  onopen: ((ev: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(`service returned ${status}: ${detail}`);
    this.status = status;
  }
}

export class ServiceClient {
  private baseUrl: string;
  private fetchFn: FetchFn;
  private socketFactory: SocketFactory;

  constructor(baseUrl: string, fetchFn?: FetchFn, socketFactory?: SocketFactory) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
    this.socketFactory =
      socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
  }

  private wsUrl(path: string): string {
    return this.baseUrl.replace(/^http/, "ws") + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    if (resp.status === 204) return undefined as T;
    return (await resp.json()) as T;
  }

  listStrokes(): Promise<StrokeSummary[]> {
    return this.request("/strokes");
  }

  topology(name: string): Promise<Topology> {
    return this.request(`/topologies/${name}`);
  }

  createSession(
    strokeId: string,
    userHeightM: number,
    anchor: [number, number, number] = [0, 0, 0],
  ): Promise<SessionSnapshot> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        stroke_id: strokeId,
        user_height_m: userHeightM,
        anchor,
      }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/sessions/${sessionId}`);
  }

  control(sessionId: string, command: ControlCommand): Promise<SessionSnapshot> {
    return this.request(`/sessions/${sessionId}/control`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(command),
    });
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }

  openFeedback(
    sessionId: string,
    onMessage: (msg: WireFeedback | Record<string, unknown>) => void,
    onClose?: (code?: number) => void,
  ): SocketLike {
    const sock = this.socketFactory(this.wsUrl(`/sessions/${sessionId}/out`));
    sock.onmessage = (ev) => {
      try {
        onMessage(JSON.parse(String(ev.data)));
      } catch {
        onMessage({ type: "unparseable" });
      }
    };
    sock.onclose = (ev) => onClose?.(ev?.code);
    return sock;
  }

  openInput(sessionId: string): SocketLike {
    return this.socketFactory(this.wsUrl(`/sessions/${sessionId}/in`));
  }
}
