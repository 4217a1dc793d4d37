/**
 * Session lifecycle over HTTP and the live message channel over WebSocket.
 *
 * The client never mutates simulation state except by sending protocol
 * messages; every frame it sends and receives is retained as raw text so a
 * recorded log can be replayed verbatim (determinism passes through the UI
 * boundary).  Works against the browser's native WebSocket or the `ws`
 * package under node -- anything matching WsLike.
 */

import {
  ClientMessage,
  parseServerMessage,
  ProtocolError,
  ErrorMessage,
  SessionInfo,
  StateSnapshot,
  validateSessionInfo,
  validateSnapshot,
} from "./protocol.js";

export interface WsLike {
  send(data: string): void;
  close(code?: number, reason?: string): void;
  addEventListener(
    type: "open" | "message" | "close" | "error",
    listener: (ev: any) => void,
  ): void;
}

export type WsCtor = new (url: string) => WsLike;

type Fetch = typeof fetch;

async function expectOk(resp: Response, what: string): Promise<unknown> {
  const text = await resp.text();
  if (!resp.ok) {
    throw new ProtocolError(`${what} failed (${resp.status}): ${text}`);
  }
  return text ? JSON.parse(text) : null;
}

export interface SessionOptions {
  tick_rate?: number;
  k?: number;
  v_max?: number;
  paced?: boolean;
}

export async function createSession(
  base: string,
  scenario: unknown,
  opts: SessionOptions = {},
  http: Fetch = fetch,
): Promise<SessionInfo> {
  const resp = await http(`${base}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ scenario, ...opts }),
  });
  return validateSessionInfo(await expectOk(resp, "create session"));
}

export async function resetSession(
  base: string,
  id: string,
  http: Fetch = fetch,
): Promise<StateSnapshot> {
  const resp = await http(`${base}/sessions/${id}/reset`, { method: "POST" });
  return validateSnapshot(await expectOk(resp, "reset session"));
}

export async function deleteSession(
  base: string,
  id: string,
  http: Fetch = fetch,
): Promise<void> {
  const resp = await http(`${base}/sessions/${id}`, { method: "DELETE" });
  await expectOk(resp, "delete session");
}

interface Waiter {
  resolve: (s: StateSnapshot) => void;
  reject: (e: Error) => void;
  timer: ReturnType<typeof setTimeout> | null;
}

export class SessionClient {
  onSnapshot: ((s: StateSnapshot) => void) | null = null;
  onProtocolError: ((e: ErrorMessage) => void) | null = null;
  onDisconnect: (() => void) | null = null;
  /** Raw frames, in order, for replay and byte-level comparisons. */
  readonly sentFrames: string[] = [];
  readonly receivedFrames: string[] = [];
  closed = false;

  private readonly queue: StateSnapshot[] = [];
  private readonly waiters: Waiter[] = [];

  private constructor(private readonly ws: WsLike) {
    ws.addEventListener("message", (ev) => this.handleFrame(String(ev.data)));
    ws.addEventListener("close", () => this.handleClose());
    ws.addEventListener("error", () => this.handleClose());
  }

  static open(url: string, Ws: WsCtor): Promise<SessionClient> {
    return new Promise((resolve, reject) => {
      const ws = new Ws(url);
      const client = new SessionClient(ws);
      ws.addEventListener("open", () => resolve(client));
      ws.addEventListener("error", (ev) =>
        reject(new ProtocolError(`websocket error: ${ev?.message ?? "unknown"}`)),
      );
    });
  }

  private handleFrame(text: string): void {
    this.receivedFrames.push(text);
    let msg;
    try {
      msg = parseServerMessage(text);
    } catch (e) {
      this.rejectAll(e as Error);
      return;
    }
    if (msg.type === "state") {
      const waiter = this.waiters.shift();
      if (waiter) {
        if (waiter.timer !== null) clearTimeout(waiter.timer);
        waiter.resolve(msg);
      } else {
        this.queue.push(msg);
      }
      this.onSnapshot?.(msg);
    } else {
      // a protocol error never produces a state frame; fail the oldest
      // waiter fast instead of letting a ping-pong loop hang
      const waiter = this.waiters.shift();
      if (waiter) {
        if (waiter.timer !== null) clearTimeout(waiter.timer);
        waiter.reject(new ProtocolError(msg.error));
      }
      this.onProtocolError?.(msg);
    }
  }

  private handleClose(): void {
    if (this.closed) return;
    this.closed = true;
    this.rejectAll(new ProtocolError("connection closed"));
    this.onDisconnect?.();
  }

  private rejectAll(err: Error): void {
    while (this.waiters.length > 0) {
      const w = this.waiters.shift()!;
      if (w.timer !== null) clearTimeout(w.timer);
      w.reject(err);
    }
  }

  send(msg: ClientMessage): void {
    if (this.closed) throw new ProtocolError("client is closed");
    const text = JSON.stringify(msg);
    this.sentFrames.push(text);
    this.ws.send(text);
  }

  /** Resend a previously recorded raw frame byte-for-byte. */
  sendRaw(text: string): void {
    if (this.closed) throw new ProtocolError("client is closed");
    this.sentFrames.push(text);
    this.ws.send(text);
  }

  setTarget(pos: number[]): void {
    this.send({ type: "set_target", pos });
  }

  pause(): void {
    this.send({ type: "pause" });
  }

  resume(): void {
    this.send({ type: "resume" });
  }

  setParams(params: { k?: number; v_max?: number }): void {
    this.send({ type: "set_params", ...params });
  }

  tick(count = 1): void {
    this.send({ type: "tick", count });
  }

  /** Next state frame: drains the buffer first, then waits. */
  nextState(timeoutMs = 10_000): Promise<StateSnapshot> {
    const buffered = this.queue.shift();
    if (buffered !== undefined) return Promise.resolve(buffered);
    if (this.closed) {
      return Promise.reject(new ProtocolError("connection closed"));
    }
    return new Promise((resolve, reject) => {
      const waiter: Waiter = { resolve, reject, timer: null };
      waiter.timer = setTimeout(() => {
        const at = this.waiters.indexOf(waiter);
        if (at >= 0) this.waiters.splice(at, 1);
        reject(new ProtocolError(`no state frame within ${timeoutMs} ms`));
      }, timeoutMs);
      this.waiters.push(waiter);
    });
  }

  async tickAndWait(): Promise<StateSnapshot> {
    this.tick(1);
    return this.nextState();
  }

  /** set_target and the snapshot the service emits in response. */
  async targetAndWait(pos: number[]): Promise<StateSnapshot> {
    this.setTarget(pos);
    return this.nextState();
  }

  close(): void {
    this.closed = true;
    this.rejectAll(new ProtocolError("client closed"));
    this.ws.close();
  }
}
