import { describe, expect, it } from "vitest";

import { SessionClient, WsLike } from "../src/client.js";
import { ProtocolError } from "../src/protocol.js";

class FakeWs implements WsLike {
  static last: FakeWs;
  sent: string[] = [];
  closed = false;
  private listeners = new Map<string, ((ev: any) => void)[]>();

  constructor(_url: string) {
    FakeWs.last = this;
    queueMicrotask(() => this.emit("open", {}));
  }

  addEventListener(type: string, fn: (ev: any) => void): void {
    const fns = this.listeners.get(type) ?? [];
    fns.push(fn);
    this.listeners.set(type, fns);
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.emit("close", {});
  }

  emit(type: string, ev: unknown): void {
    for (const fn of this.listeners.get(type) ?? []) fn(ev);
  }
}

const FRAME = JSON.stringify({
  type: "state", t: 0, head: [1.5, 0], segments: [[1, 0]], energy: 0,
  margin: 1, status: "running", clamped: false, w: [0, 0], axis: null,
});

async function open(): Promise<[SessionClient, FakeWs]> {
  const client = await SessionClient.open("ws://test", FakeWs);
  return [client, FakeWs.last];
}

describe("session client", () => {
  it("serializes protocol messages and keeps the sent log verbatim", async () => {
    const [client, ws] = await open();
    client.setTarget([1, 2]);
    client.setParams({ k: 6 });
    client.tick(3);
    expect(ws.sent).toEqual([
      '{"type":"set_target","pos":[1,2]}',
      '{"type":"set_params","k":6}',
      '{"type":"tick","count":3}',
    ]);
    expect(client.sentFrames).toEqual(ws.sent);
  });

  it("buffers unawaited frames and drains them in order", async () => {
    const [client, ws] = await open();
    ws.emit("message", { data: FRAME });
    ws.emit("message", { data: FRAME.replace('"t":0', '"t":1') });
    expect((await client.nextState()).t).toBe(0);
    expect((await client.nextState()).t).toBe(1);
  });

  it("resolves a pending wait on arrival and notifies onSnapshot", async () => {
    const [client, ws] = await open();
    const seen: number[] = [];
    client.onSnapshot = (s) => seen.push(s.t);
    const wait = client.nextState();
    ws.emit("message", { data: FRAME });
    expect((await wait).t).toBe(0);
    expect(seen).toEqual([0]);
  });

  it("fails the oldest waiter when a protocol error arrives", async () => {
    const [client, ws] = await open();
    const errors: string[] = [];
    client.onProtocolError = (e) => errors.push(e.error);
    const wait = client.nextState();
    ws.emit("message", { data: '{"type":"error","error":"bad tick","echo":{}}' });
    await expect(wait).rejects.toThrow(/bad tick/);
    expect(errors).toEqual(["bad tick"]);
  });

  it("fires onDisconnect and rejects pending waits when the socket drops", async () => {
    const [client, ws] = await open();
    let dropped = false;
    client.onDisconnect = () => { dropped = true; };
    const wait = client.nextState();
    ws.emit("close", {});
    await expect(wait).rejects.toThrow(ProtocolError);
    expect(dropped).toBe(true);
    expect(client.closed).toBe(true);
    expect(() => client.tick()).toThrow(ProtocolError);
  });

  it("times out a wait that nothing answers", async () => {
    const [client] = await open();
    await expect(client.nextState(20)).rejects.toThrow(/no state frame/);
  });
});
