/**
 * Session log export: JSONL with the same schema as offline trajectory
 * records, one object per tick with keys
 *
 *     {"t", "head", "config", "w", "margin", "tracking_error", "energy"}
 *
 * in that order.  Floats are written shortest-round-trip with a ".0" suffix
 * on integral values, so a line written here loads back to the identical
 * float64s (and matches the offline writer's convention).
 */

import { StateSnapshot } from "./protocol.js";

export function fmtNum(x: number): string {
  if (!Number.isFinite(x)) {
    throw new RangeError(`cannot serialize non-finite value ${x}`);
  }
  if (Object.is(x, -0)) return "-0.0";
  const s = String(x);
  return /^-?\d+$/.test(s) ? `${s}.0` : s;
}

const vec = (v: number[]): string => `[${v.map(fmtNum).join(",")}]`;
const mat = (m: number[][]): string => `[${m.map(vec).join(",")}]`;

export interface TrajectoryRecord {
  t: number;
  head: number[];
  config: number[][];
  w: number[];
  margin: number;
  tracking_error: number;
  energy: number;
}

function dist(a: number[], b: number[]): number {
  let s = 0;
  for (let i = 0; i < a.length; i++) s += (a[i] - b[i]) ** 2;
  return Math.sqrt(s);
}

export class SnapshotLog {
  readonly rows: TrajectoryRecord[] = [];

  /** Log one snapshot; tracking error is against the currently held target. */
  record(snap: StateSnapshot, target: number[] | null): void {
    this.rows.push({
      t: snap.t,
      head: snap.head.slice(),
      config: snap.segments.map((r) => r.slice()),
      w: snap.w.slice(),
      margin: snap.margin,
      tracking_error: target === null ? 0 : dist(snap.head, target),
      energy: snap.energy,
    });
  }

  toJsonl(): string {
    return this.rows
      .map(
        (r) =>
          `{"t":${fmtNum(r.t)},"head":${vec(r.head)},"config":${mat(r.config)}` +
          `,"w":${vec(r.w)},"margin":${fmtNum(r.margin)}` +
          `,"tracking_error":${fmtNum(r.tracking_error)},"energy":${fmtNum(r.energy)}}\n`,
      )
      .join("");
  }

  static parseJsonl(text: string): TrajectoryRecord[] {
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as TrajectoryRecord);
  }

  /** Browser-only: offer the log as a .jsonl download. */
  download(filename = "session.jsonl", doc: Document = document): void {
    const blob = new Blob([this.toJsonl()], { type: "application/jsonl" });
    const url = URL.createObjectURL(blob);
    const a = doc.createElement("a");
    a.href = url;
    a.download = filename;
    a.click();
    URL.revokeObjectURL(url);
  }
}
