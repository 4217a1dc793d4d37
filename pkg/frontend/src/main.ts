/**
 * Browser entry point: session form, canvas, plane picker, parameter
 * sliders, export button.  All simulation state lives on the service; this
 * file only wires DOM events to protocol messages and snapshots to the
 * renderer.
 */

import {
  createSession,
  deleteSession,
  resetSession,
  SessionClient,
} from "./client.js";
import { DragThrottle } from "./drag.js";
import { SnapshotLog } from "./export.js";
import { SessionInfo } from "./protocol.js";
import { drawScene, fromScreen, worldTransform } from "./render.js";
import { ViewState } from "./view.js";

const THREE_ARM_SCENARIO = {
  dimension: 2,
  partition: [0.0, 1.0, 2.0, 3.0],
  representation: { kind: "arm" },
  initial: [
    [Math.cos(Math.acos(0.25)), Math.sin(Math.acos(0.25))],
    [1.0, 0.0],
    [Math.cos(Math.acos(0.25)), -Math.sin(Math.acos(0.25))],
  ],
  seed: 0,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d")!;
const scenarioBox = el<HTMLTextAreaElement>("scenario");
const baseBox = el<HTMLInputElement>("base-url");
const planeI = el<HTMLSelectElement>("plane-i");
const planeJ = el<HTMLSelectElement>("plane-j");
const statusLine = el<HTMLElement>("status-line");
const kSlider = el<HTMLInputElement>("k-gain");
const vSlider = el<HTMLInputElement>("v-max");

scenarioBox.value = JSON.stringify(THREE_ARM_SCENARIO, null, 2);

let client: SessionClient | null = null;
let view: ViewState | null = null;
let info: SessionInfo | null = null;
let drag: DragThrottle | null = null;
let log = new SnapshotLog();
let dragging = false;

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function fillPlanePickers(d: number): void {
  for (const sel of [planeI, planeJ]) {
    sel.innerHTML = "";
    for (let i = 0; i < d; i++) {
      const opt = document.createElement("option");
      opt.value = String(i);
      opt.textContent = `x${i}`;
      sel.appendChild(opt);
    }
  }
  planeI.value = "0";
  planeJ.value = "1";
}

async function openStream(base: string, id: string): Promise<void> {
  const wsBase = base.replace(/^http/, "ws");
  client = await SessionClient.open(`${wsBase}/sessions/${id}/stream`, WebSocket);
  client.onSnapshot = (snap) => {
    if (view !== null) {
      view.update(snap);
      log.record(snap, view.target);
    }
  };
  client.onProtocolError = (e) => setStatus(`protocol error: ${e.error}`);
  client.onDisconnect = () => {
    view?.markDisconnected();
    setStatus("connection lost -- reconnecting...");
    const retry = setInterval(async () => {
      if (info === null) {
        clearInterval(retry);
        return;
      }
      try {
        await openStream(base, info.id);
        clearInterval(retry);
        view?.markConnected();
        setStatus(`reconnected to ${info.id}`);
      } catch {
        // keep trying; the banner stays up
      }
    }, 2000);
  };
}

el<HTMLButtonElement>("connect").addEventListener("click", async () => {
  try {
    const base = baseBox.value.replace(/\/$/, "");
    const scenario = JSON.parse(scenarioBox.value);
    info = await createSession(base, scenario, {
      tick_rate: 60,
      paced: true,
      k: Number(kSlider.value),
      v_max: Number(vSlider.value),
    });
    view = new ViewState(info);
    log = new SnapshotLog();
    drag = new DragThrottle((pos) => {
      view?.setTarget(pos);
      client?.setTarget(pos);
    }, info.tick_rate);
    fillPlanePickers(info.dimension);
    await openStream(base, info.id);
    setStatus(`session ${info.id}: d=${info.dimension}, L=${info.total_length}`);
  } catch (e) {
    setStatus(String(e));
  }
});

el<HTMLButtonElement>("pause").addEventListener("click", () => client?.pause());
el<HTMLButtonElement>("resume").addEventListener("click", () => client?.resume());
el<HTMLButtonElement>("reset").addEventListener("click", async () => {
  if (info !== null) {
    await resetSession(baseBox.value.replace(/\/$/, ""), info.id);
    log = new SnapshotLog();
  }
});
el<HTMLButtonElement>("disconnect").addEventListener("click", async () => {
  if (info !== null) {
    const id = info.id;
    info = null; // stop the reconnect loop before the socket drops
    client?.close();
    await deleteSession(baseBox.value.replace(/\/$/, ""), id);
    client = null;
    view = null;
    setStatus("session deleted");
  }
});
el<HTMLButtonElement>("export").addEventListener("click", () => log.download());

el<HTMLButtonElement>("apply-params").addEventListener("click", () => {
  client?.setParams({ k: Number(kSlider.value), v_max: Number(vSlider.value) });
});

for (const sel of [planeI, planeJ]) {
  sel.addEventListener("change", () => {
    try {
      view?.selectPlane(Number(planeI.value), Number(planeJ.value));
    } catch (e) {
      setStatus(String(e));
    }
  });
}

/** Pointer position -> full-dimensional target: drag moves the selected
 * plane coordinates, all others stay at their current target value. */
function pointerTarget(ev: PointerEvent): number[] | null {
  if (view === null) return null;
  const rect = canvas.getBoundingClientRect();
  const tr = worldTransform(view, canvas.width, canvas.height);
  const [wx, wy] = fromScreen(tr, ev.clientX - rect.left, ev.clientY - rect.top);
  const pos = (view.target ?? view.snapshot?.head ?? new Array(view.dimension).fill(0)).slice();
  pos[view.plane[0]] = wx;
  pos[view.plane[1]] = wy;
  return pos;
}

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  canvas.setPointerCapture(ev.pointerId);
  const pos = pointerTarget(ev);
  if (pos !== null && drag !== null) drag.offer(pos, performance.now());
});
canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const pos = pointerTarget(ev);
  if (pos !== null && drag !== null) drag.offer(pos, performance.now());
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});

function frame(): void {
  drag?.flush(performance.now());
  if (view !== null) {
    drawScene(ctx, view, canvas.width, canvas.height);
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
