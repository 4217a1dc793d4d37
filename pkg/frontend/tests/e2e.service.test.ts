/**
 * End-to-end acceptance against a real charm service instance.
 *
 * Spawns uvicorn in a child process, then drives sessions exactly the way
 * the UI does -- session HTTP lifecycle, WebSocket messages, SnapshotLog
 * export.  Sessions are unpaced and ticked explicitly (one tick per state
 * frame), which makes every run deterministic and lets the script stand in
 * for a 60 Hz human.
 */

import { spawn, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { createSession, resetSession, SessionClient, WsCtor } from "../src/client.js";
import { SnapshotLog } from "../src/export.js";
import { StateSnapshot } from "../src/protocol.js";
import { ViewState } from "../src/view.js";

const BOOT = `
import sys
import uvicorn
from snakecharm.service import create_app
uvicorn.run(create_app(), host="127.0.0.1", port=int(sys.argv[1]), log_level="warning")
`;

const ALPHA = Math.acos(0.25);
const THREE_ARM = {
  dimension: 2,
  partition: [0.0, 1.0, 2.0, 3.0],
  representation: { kind: "arm" },
  initial: [
    [Math.cos(ALPHA), Math.sin(ALPHA)],
    [1.0, 0.0],
    [Math.cos(ALPHA), -Math.sin(ALPHA)],
  ],
  seed: 0,
};

const FOLD = {
  dimension: 2,
  partition: [0.0, 1.0, 2.0],
  representation: { kind: "arm" },
  initial: [[1.0, 0.0], [Math.cos(2.6), Math.sin(2.6)]],
  integrator: { scheme: "euler", dt: 1e-3, feedback_gain: 4.0 },
  seed: 0,
};

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.on("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as { port: number }).port;
      srv.close(() => resolve(port));
    });
  });
}

let proc: ChildProcess;
let base: string;
let wsBase: string;

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  wsBase = `ws://127.0.0.1:${port}`;
  proc = spawn("python3", ["-c", BOOT, String(port)], {
    stdio: ["ignore", "ignore", "inherit"],
  });
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const resp = await fetch(`${base}/openapi.json`);
      if (resp.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 150));
  }
});

afterAll(() => {
  proc?.kill();
});

async function openStream(id: string): Promise<SessionClient> {
  const client = await SessionClient.open(
    `${wsBase}/sessions/${id}/stream`,
    WebSocket as unknown as WsCtor,
  );
  await client.nextState(); // the subscribe snapshot
  return client;
}

describe("scripted circle drag at 60 Hz", () => {
  it("keeps the exported head-tracking error within 5e-2", async () => {
    const info = await createSession(base, THREE_ARM, {
      tick_rate: 60, paced: false, k: 20, v_max: 2,
    });
    const client = await openStream(info.id);
    const view = new ViewState(info);
    const log = new SnapshotLog();

    // one full revolution at omega = 0.5 rad/s, dragged tick by tick;
    // the target starts exactly at the initial head (1.5, 0)
    const omega = 0.5;
    const ticks = Math.ceil((2 * Math.PI) / omega * 60);
    for (let i = 1; i <= ticks; i++) {
      const t = i / 60;
      const target = [1.5 * Math.cos(omega * t), 1.5 * Math.sin(omega * t)];
      view.setTarget(target);
      await client.targetAndWait(target);
      const snap = await client.tickAndWait();
      view.update(snap);
      log.record(snap, view.target);
      expect(snap.status).toBe("running");
      expect(snap.clamped).toBe(false);
    }
    client.close();

    // the acceptance reads the exported JSONL, not the live stream
    const rows = SnapshotLog.parseJsonl(log.toJsonl());
    expect(rows).toHaveLength(ticks);
    const maxErr = Math.max(...rows.map((r) => r.tracking_error));
    expect(maxErr).toBeLessThanOrEqual(5e-2);
    // the head really went around: all four quadrant crossings happen
    expect(rows.some((r) => r.head[1] > 1.0)).toBe(true);
    expect(rows.some((r) => r.head[1] < -1.0)).toBe(true);
    expect(rows.some((r) => r.head[0] < -1.0)).toBe(true);
    // snapshots obey the invariants the UI relies on
    for (const r of rows) {
      for (const seg of r.config) {
        expect(Math.abs(Math.hypot(...seg) - 1)).toBeLessThan(1e-12);
      }
    }
  });
});

describe("fold and pull", () => {
  it("reaches singular-stopped and recovers through an orthogonal pull", async () => {
    const info = await createSession(base, FOLD, {
      tick_rate: 60, paced: false, k: 4, v_max: 2,
    });
    const client = await openStream(info.id);
    const view = new ViewState(info);

    // fold: drag the target to the origin until the arm goes collinear
    await client.targetAndWait([0, 0]);
    let snap: StateSnapshot | null = null;
    for (let i = 0; i < 3000; i++) {
      snap = await client.tickAndWait();
      if (snap.status === "singular-stopped") break;
    }
    expect(snap!.status).toBe("singular-stopped");
    expect(snap!.margin).toBeLessThanOrEqual(info.tol_singular);
    view.update(snap!);
    const axis = snap!.axis!;
    expect(Math.hypot(...axis)).toBeCloseTo(1, 9);
    expect(view.axisLine()).not.toBeNull();

    // pulling straight along the uncontrollable axis stays locked
    await client.targetAndWait([0.9 * axis[0], 0.9 * axis[1]]);
    for (let i = 0; i < 30; i++) snap = await client.tickAndWait();
    expect(snap!.status).toBe("singular-stopped");

    // an orthogonal pull resumes via the restricted solve
    const orth = [-axis[1], axis[0]];
    await client.targetAndWait([0.8 * orth[0], 0.8 * orth[1]]);
    for (let i = 0; i < 60; i++) {
      snap = await client.tickAndWait();
      if (snap.status === "running") break;
    }
    expect(snap!.status).toBe("running");
    expect(snap!.margin).toBeGreaterThan(info.tol_singular);
    client.close();

    const fresh = await resetSession(base, info.id);
    expect(fresh.t).toBe(0);
    expect(fresh.status).toBe("running");
  });
});

describe("determinism through the UI boundary", () => {
  it("replaying a recorded message log reproduces the snapshot stream", async () => {
    const script: string[] = [];
    script.push(JSON.stringify({ type: "set_target", pos: [0.4, 1.1] }));
    for (let i = 0; i < 20; i++) script.push('{"type":"tick","count":1}');
    script.push(JSON.stringify({ type: "set_params", k: 7.5 }));
    for (let i = 0; i < 20; i++) script.push('{"type":"tick","count":1}');
    script.push('{"type":"pause"}');
    script.push('{"type":"resume"}');
    script.push(JSON.stringify({ type: "set_target", pos: [-1.2, 0.3] }));
    for (let i = 0; i < 20; i++) script.push('{"type":"tick","count":1}');

    async function run(): Promise<string[]> {
      const info = await createSession(base, THREE_ARM, {
        tick_rate: 60, paced: false, k: 4, v_max: 2,
      });
      const client = await SessionClient.open(
        `${wsBase}/sessions/${info.id}/stream`,
        WebSocket as unknown as WsCtor,
      );
      await client.nextState(); // subscribe snapshot is position-dependent only
      for (const frame of script) {
        client.sendRaw(frame);
        await client.nextState(); // every scripted message emits one frame
      }
      client.close();
      return client.receivedFrames.slice(1); // drop the subscribe frame
    }

    const first = await run();
    const second = await run();
    expect(first.length).toBe(script.length);
    expect(second).toEqual(first);
  });
});
