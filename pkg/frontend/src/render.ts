/**
 * Canvas renderer.  Pure functions of (ctx, view, width, height): world
 * coordinates are projected plane coordinates, mapped so the boundary circle
 * of radius L fits with some margin; y points up.  The ctx is a structural
 * subset of CanvasRenderingContext2D so tests can pass a recorder.
 */

import { ViewState } from "./view.js";

export interface Ctx2D {
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  font: string;
  globalAlpha: number;
  textAlign: CanvasTextAlign;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(s: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  save(): void;
  restore(): void;
}

export interface Transform {
  scale: number;
  cx: number;
  cy: number;
}

const GAUGE_STRIP = 90; // px reserved at the bottom for the three gauges

export function worldTransform(view: ViewState, width: number, height: number): Transform {
  const usable = Math.min(width, height - GAUGE_STRIP);
  const scale = (0.45 * usable) / view.info.total_length;
  return { scale, cx: width / 2, cy: (height - GAUGE_STRIP) / 2 };
}

export function toScreen(tr: Transform, p: [number, number]): [number, number] {
  return [tr.cx + tr.scale * p[0], tr.cy - tr.scale * p[1]];
}

export function fromScreen(tr: Transform, x: number, y: number): [number, number] {
  return [(x - tr.cx) / tr.scale, (tr.cy - y) / tr.scale];
}

function strokeCircle(ctx: Ctx2D, tr: Transform, r: number, style: string, dash: number[]): void {
  ctx.beginPath();
  ctx.setLineDash(dash);
  ctx.strokeStyle = style;
  ctx.arc(tr.cx, tr.cy, tr.scale * r, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
}

function strokePath(ctx: Ctx2D, tr: Transform, pts: [number, number][]): void {
  if (pts.length < 2) return;
  ctx.beginPath();
  const [x0, y0] = toScreen(tr, pts[0]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < pts.length; i++) {
    const [x, y] = toScreen(tr, pts[i]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function dot(ctx: Ctx2D, tr: Transform, p: [number, number], r: number, style: string): void {
  const [x, y] = toScreen(tr, p);
  ctx.beginPath();
  ctx.fillStyle = style;
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function drawGauge(
  ctx: Ctx2D,
  label: string,
  series: number[],
  x: number,
  y: number,
  w: number,
  h: number,
  threshold: number | null,
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#16161e";
  ctx.fillRect(x, y, w, h);
  ctx.fillStyle = "#9aa0b0";
  ctx.fillText(`${label}${series.length ? ": " + series[series.length - 1].toPrecision(3) : ""}`,
    x + 4, y + 12);
  if (series.length >= 2) {
    let lo = Math.min(...series);
    let hi = Math.max(...series);
    if (threshold !== null) {
      lo = Math.min(lo, threshold);
      hi = Math.max(hi, threshold);
    }
    if (hi - lo < 1e-30) hi = lo + 1e-30;
    const px = (k: number) => x + (w * k) / (series.length - 1);
    const py = (v: number) => y + h - 4 - ((h - 20) * (v - lo)) / (hi - lo);
    ctx.beginPath();
    ctx.strokeStyle = "#7aa2f7";
    ctx.moveTo(px(0), py(series[0]));
    for (let k = 1; k < series.length; k++) ctx.lineTo(px(k), py(series[k]));
    ctx.stroke();
    if (threshold !== null) {
      ctx.beginPath();
      ctx.strokeStyle = "#f7768e";
      ctx.setLineDash([3, 3]);
      ctx.moveTo(x, py(threshold));
      ctx.lineTo(x + w, py(threshold));
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }
}

export function drawScene(ctx: Ctx2D, view: ViewState, width: number, height: number): void {
  const tr = worldTransform(view, width, height);
  ctx.globalAlpha = 1;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1a1b26";
  ctx.fillRect(0, 0, width, height);
  ctx.lineWidth = 1;
  ctx.font = "12px monospace";
  ctx.textAlign = "left";

  // reachable ball of radius L, and the clamp radius just inside it
  strokeCircle(ctx, tr, view.info.total_length, "#3b4261", []);
  strokeCircle(ctx, tr, view.info.boundary_radius, "#3b4261", [4, 4]);

  const snap = view.snapshot;
  const singular = snap?.status === "singular-stopped";

  const axis = view.axisLine();
  if (axis !== null) {
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = "#f7768e";
    ctx.setLineDash([6, 4]);
    strokePath(ctx, tr, axis);
    ctx.setLineDash([]);
  }

  const line = view.polyline();
  if (line.length > 0) {
    ctx.lineWidth = 2.5;
    ctx.strokeStyle = singular ? "#f7768e" : "#9ece6a";
    strokePath(ctx, tr, line);
    for (const p of line) dot(ctx, tr, p, 3, "#c0caf5");
  }

  const head = view.headPoint();
  if (head !== null) dot(ctx, tr, head, 5, "#e0af68");

  const marker = view.markerPos();
  if (marker !== null) {
    dot(ctx, tr, marker, 4, snap?.clamped ? "#f7768e" : "#7dcfff");
    if (snap?.clamped) {
      ctx.fillStyle = "#f7768e";
      const [mx, my] = toScreen(tr, marker);
      ctx.fillText("clamped", mx + 8, my - 8);
    }
  }

  if (singular) {
    ctx.fillStyle = "#f7768e";
    ctx.fillText("singular-stopped: motion locked to the highlighted axis", 10, 16);
  } else if (snap !== null) {
    ctx.fillStyle = "#9aa0b0";
    ctx.fillText(
      `t=${snap.t.toFixed(3)}  status=${snap.status}  margin=${snap.margin.toExponential(2)}`,
      10, 16);
  }

  const gaugeW = (width - 40) / 3;
  const gy = height - GAUGE_STRIP + 10;
  drawGauge(ctx, "energy", view.energy.values(), 10, gy, gaugeW, GAUGE_STRIP - 20, null);
  drawGauge(ctx, "margin", view.margin.values(), 20 + gaugeW, gy, gaugeW, GAUGE_STRIP - 20,
    view.info.tol_singular);
  drawGauge(ctx, "error", view.error.values(), 30 + 2 * gaugeW, gy, gaugeW, GAUGE_STRIP - 20, null);

  if (view.stale) {
    ctx.globalAlpha = 0.35;
    ctx.fillStyle = "#c0caf5";
    ctx.font = "32px monospace";
    ctx.textAlign = "center";
    ctx.fillText("stale", tr.cx, tr.cy);
    ctx.globalAlpha = 1;
    ctx.font = "12px monospace";
    ctx.textAlign = "left";
  }
  if (!view.connected) {
    ctx.fillStyle = "#f7768e";
    ctx.fillRect(0, height - GAUGE_STRIP - 24, width, 24);
    ctx.fillStyle = "#1a1b26";
    ctx.fillText("connection lost -- reconnecting...", 10, height - GAUGE_STRIP - 8);
  }
}
